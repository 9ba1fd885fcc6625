#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace apldf {

/// Least-squares polynomial smoothing over a sliding window. Points closer
/// than half a window to either end are evaluated on the polynomial fitted to
/// the first/last full window.
class SavitzkyGolay {
 public:
  /// window must be odd and larger than order + 1.
  SavitzkyGolay(std::size_t window, int order);

  std::size_t window() const { return window_; }
  int order() const { return order_; }

  /// Weights evaluating the window fit at window position pos (0..window-1).
  /// The centre row is the classic convolution kernel.
  std::span<const double> weights(std::size_t pos) const;

  /// Inputs shorter than the window are filtered with the largest odd window
  /// that fits, or returned unchanged when that is below order + 3.
  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::size_t window_;
  int order_;
  std::vector<double> hat_;  // window x window, row-major
};

}  // namespace apldf
