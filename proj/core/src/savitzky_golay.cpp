#include "apldf/savitzky_golay.hpp"

#include <Eigen/Dense>

#include "apldf/error.hpp"

namespace apldf {

SavitzkyGolay::SavitzkyGolay(std::size_t window, int order) : window_(window), order_(order) {
  if (order < 0 || window % 2 == 0 || window < static_cast<std::size_t>(order) + 2) {
    throw ValidationError("Savitzky-Golay window must be odd and exceed order + 1");
  }
  const auto w = static_cast<Eigen::Index>(window);
  const Eigen::Index cols = order + 1;
  const double half = static_cast<double>(window / 2);
  // Scaled abscissa keeps the normal equations well conditioned.
  Eigen::MatrixXd vander(w, cols);
  for (Eigen::Index j = 0; j < w; ++j) {
    const double u = (static_cast<double>(j) - half) / (half > 0 ? half : 1.0);
    double p = 1.0;
    for (Eigen::Index k = 0; k < cols; ++k) {
      vander(j, k) = p;
      p *= u;
    }
  }
  const Eigen::MatrixXd pinv =
      vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(w, w));
  const Eigen::MatrixXd hat = vander * pinv;
  hat_.resize(window * window);
  for (Eigen::Index r = 0; r < w; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      hat_[static_cast<std::size_t>(r * w + c)] = hat(r, c);
    }
  }
}

std::span<const double> SavitzkyGolay::weights(std::size_t pos) const {
  return std::span<const double>(hat_).subspan(pos * window_, window_);
}

std::vector<double> SavitzkyGolay::apply(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n < window_) {
    const std::size_t w = n % 2 == 1 ? n : n - 1;
    if (n == 0 || w < static_cast<std::size_t>(order_) + 3) return {x.begin(), x.end()};
    return SavitzkyGolay(w, order_).apply(x);
  }
  const std::size_t half = window_ / 2;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t origin = 0;
    std::size_t pos = half;
    if (i < half) {
      pos = i;
    } else if (i >= n - half) {
      origin = n - window_;
      pos = i - origin;
    } else {
      origin = i - half;
    }
    const auto w = weights(pos);
    double acc = 0.0;
    for (std::size_t j = 0; j < window_; ++j) acc += w[j] * x[origin + j];
    y[i] = acc;
  }
  return y;
}

}  // namespace apldf
