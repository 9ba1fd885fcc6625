#include <gtest/gtest.h>

#include <cmath>

#include "apldf/error.hpp"
#include "apldf/speed_profile.hpp"

using namespace apldf;

TEST(SpeedProfile, Invariants) {
  EXPECT_THROW(SpeedProfile(0, 1, {1.0}), ValidationError);
  EXPECT_THROW(SpeedProfile(0, 0, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(SpeedProfile(0, 1, {1.0, -0.1}), ValidationError);
  EXPECT_THROW(SpeedProfile(0, 1, {1.0, std::nan("")}), ValidationError);
}

TEST(SpeedProfile, Interpolation) {
  const SpeedProfile p(10, 2, {0, 4, 8});
  EXPECT_DOUBLE_EQ(p.at(0), 0);
  EXPECT_DOUBLE_EQ(p.at(11), 2);
  EXPECT_DOUBLE_EQ(p.at(12), 4);
  EXPECT_DOUBLE_EQ(p.at(13), 8 * 0.5 + 4 * 0.5);
  EXPECT_DOUBLE_EQ(p.at(100), 8);
  EXPECT_DOUBLE_EQ(p.end(), 14);
}

TEST(SpeedProfile, GridPoints) {
  EXPECT_EQ(grid_points(4500, 1), 4501u);
  EXPECT_EQ(grid_points(10, 0.1), 101u);
  EXPECT_EQ(grid_points(10.5, 1), 11u);
}

TEST(SpeedProfile, CsvRoundTripIsExact) {
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(0.1 * i + 1.0 / 3.0);
  const SpeedProfile p(0, 1, v);
  const auto csv = profile_to_csv(p);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "d_m,v_mps,v_kmh");
  EXPECT_EQ(profile_from_csv(csv), p);
  EXPECT_THROW(profile_from_csv("d_m,v_mps,v_kmh\n0,1,3.6\n"), ParseError);
  EXPECT_THROW(profile_from_csv("garbage"), ParseError);
}
