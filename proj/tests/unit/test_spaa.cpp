#include <gtest/gtest.h>

#include <cmath>

#include "apldf/error.hpp"
#include "apldf/planner.hpp"
#include "apldf/spaa.hpp"
#include "apldf/units.hpp"
#include "fixtures.hpp"

using namespace apldf;

namespace {

RouteMap flat(double len = 3000) { return RouteMap("flat", len, {{0, 30.0}}, {}); }

InterventionRecord gas_record(std::vector<VelocitySample> samples) {
  InterventionRecord r;
  r.kind = InterventionKind::gas;
  r.d_start = samples.front().d_m;
  r.d_end = samples.back().d_m;
  r.samples = std::move(samples);
  return r;
}

RouteMap demo() { return load_route_file(fixtures::data_dir() / "demo_route.json"); }

}  // namespace

TEST(Spaa, EffectiveAlphaCap) {
  const auto map = flat();
  StretchParams p;
  EXPECT_DOUBLE_EQ(effective_alpha(gas_record({{1000, 10}, {1300, 10}}), 10, map, p), 0.1);
  EXPECT_DOUBLE_EQ(effective_alpha(gas_record({{1000, 20}, {1080, 20}}), 20, map, p), 0.5);
  EXPECT_DOUBLE_EQ(effective_alpha(gas_record({{1000, 20}, {1000, 20}}), 20, map, p), 0.0);
}

TEST(Spaa, EffectiveAlphaCurvatureAttenuation) {
  StretchParams p;
  const RouteMap sharp("c", 3000, {{0, 30}}, {{0, 0}, {900, 0.03}, {1100, 0.03}, {1200, 0}});
  EXPECT_DOUBLE_EQ(effective_alpha(gas_record({{1000, 20}, {1080, 20}}), 20, sharp, p), 0.0);
  // Halfway through the band halves alpha.
  const double mid = 0.5 * (p.kappa_low + p.kappa_high);
  const RouteMap half("c", 3000, {{0, 30}}, {{0, mid}});
  EXPECT_NEAR(effective_alpha(gas_record({{1000, 20}, {1080, 20}}), 20, half, p), 0.25, 1e-12);
  // Curvature inside the backward-extended window counts too.
  const RouteMap behind("c", 3000, {{0, 30}}, {{0, 0}, {950, 0}, {970, 0.05}, {990, 0}});
  EXPECT_DOUBLE_EQ(effective_alpha(gas_record({{1000, 20}, {1080, 20}}), 20, behind, p), 0.0);
}

TEST(Spaa, StretchExamples) {
  const std::vector<VelocitySample> s{{1000, 25}, {1040, 24}, {1080, 22}};
  const auto out = stretch_intervention(s, 0.5);
  EXPECT_DOUBLE_EQ(out[0].d_m, 960);
  EXPECT_DOUBLE_EQ(out[1].d_m, 1020);
  EXPECT_DOUBLE_EQ(out[2].d_m, 1080);
  EXPECT_DOUBLE_EQ(out[1].v_mps, 24);
  const auto same = stretch_intervention(s, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(same[i], s[i]);
}

TEST(Spaa, AlignExamples) {
  const std::vector<VelocitySample> s{{960, 25}, {1020, 24}, {1080, 22}};
  const SpeedProfile driver(960, 1, std::vector<double>(200, 27.0));
  const auto out = align_offset(s, driver);
  EXPECT_DOUBLE_EQ(out[0].v_mps, 27);
  EXPECT_DOUBLE_EQ(out[1].v_mps, 25);
  EXPECT_DOUBLE_EQ(out[2].v_mps, 22);
  const SpeedProfile match(960, 1, std::vector<double>(200, 25.0));
  const auto same = align_offset(s, match);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(same[i].v_mps, s[i].v_mps);
  const std::vector<VelocitySample> degenerate{{1000, 20}, {1000, 21}};
  EXPECT_EQ(align_offset(degenerate, driver)[0].v_mps, 20);
}

TEST(Spaa, InterpolateSamples) {
  const std::vector<VelocitySample> s{{0, 10}, {2, 14}, {3, 14}};
  EXPECT_DOUBLE_EQ(interpolate_samples(s, -1), 10);
  EXPECT_DOUBLE_EQ(interpolate_samples(s, 1), 12);
  EXPECT_DOUBLE_EQ(interpolate_samples(s, 2), 14);
  EXPECT_DOUBLE_EQ(interpolate_samples(s, 9), 14);
  EXPECT_THROW(interpolate_samples({}, 0), ValidationError);
}

TEST(Spaa, BlendConstants) {
  StretchParams p;
  std::vector<double> base(600, 22.0), pre(600, 22.0);
  for (std::size_t i = 200; i < 400; ++i) pre[i] = 26.0;
  const SpeedProfile b(0, 1, base), q(0, 1, pre);
  const auto out = blend(b, q, p);
  EXPECT_NEAR(out[300], 24.0, 1e-9);  // interior of a constant step
  EXPECT_EQ(out[100], 22.0);
  EXPECT_EQ(out[500], 22.0);
  EXPECT_EQ(blend(b, b, p), b);
  EXPECT_THROW(blend(b, SpeedProfile(0, 2, base), p), ValidationError);
}

TEST(Spaa, DeviationSegmentsMerge) {
  StretchParams p;
  std::vector<double> base(300, 20.0), pre(300, 20.0);
  for (std::size_t i = 10; i < 20; ++i) pre[i] = 21;
  for (std::size_t i = 35; i < 40; ++i) pre[i] = 19;   // gap 16 m < 20 m: merged
  for (std::size_t i = 100; i < 110; ++i) pre[i] = 21; // far: separate
  pre[200] = 20.1;                                     // below eps: ignored
  const auto segs = deviation_segments(SpeedProfile(0, 1, base), SpeedProfile(0, 1, pre), p);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0], (GridSegment{10, 39}));
  EXPECT_EQ(segs[1], (GridSegment{100, 109}));
}

TEST(Spaa, AdoptSetSpeedWholeZoneAndPartial) {
  const auto map = demo();
  const auto base = plan_base_profile(map, {});
  // +5 km/h 40 m after entering the 80 zone, and mid-zone in the last 100 zone.
  ScriptedInputSource script({{ScriptAction::Type::lever, 940, 0, false, 0, 1},
                              {ScriptAction::Type::lever, 4100, 0, false, 0, 1}});
  const auto log = run_lap(map, base, script, SimParams{});
  const auto adopted = adopt_set_speed(log, map, {}, StretchParams{});
  ASSERT_EQ(adopted.entries().size(), 2u);
  const auto& a = adopted.entries()[0];
  EXPECT_TRUE(a.whole_segment);
  EXPECT_DOUBLE_EQ(a.start_m, 900);
  EXPECT_DOUBLE_EQ(a.end_m, 1900);
  EXPECT_NEAR(mps_to_kmh(a.offset_mps), 5.0, 1e-12);
  const auto& b = adopted.entries()[1];
  EXPECT_FALSE(b.whole_segment);
  EXPECT_NEAR(b.start_m, 4100, 1.0);
  EXPECT_DOUBLE_EQ(b.end_m, 4500);

  NullInputSource none;
  const auto quiet = run_lap(map, base, none, SimParams{});
  SetSpeedOffsetMap current;
  current.overwrite({0, 100, 1.0, false});
  EXPECT_EQ(adopt_set_speed(quiet, map, current, StretchParams{}), current);
}

TEST(Spaa, FixedPointBitIdentical) {
  const auto map = demo();
  const auto base = plan_base_profile(map, {});
  NullInputSource none;
  const auto log = run_lap(map, base, none, SimParams{});
  const auto s0 = IterationState::start(base);
  const auto s1 = apply_iteration(s0, log, map, {});
  EXPECT_EQ(s1.iteration, 1u);
  EXPECT_EQ(s1.baseline, base);
  EXPECT_EQ(s1.history.size(), 2u);
  EXPECT_TRUE(s1.offsets.empty());
}

TEST(Spaa, RejectsMismatchedLogs) {
  const auto map = demo();
  const auto base = plan_base_profile(map, {});
  NullInputSource none;
  auto log = run_lap(map, base, none, SimParams{});
  const auto s0 = IterationState::start(base);
  auto bad = log;
  bad.complete = false;
  EXPECT_THROW(apply_iteration(s0, bad, map, {}), ValidationError);
  bad = log;
  bad.route_name = "elsewhere";
  EXPECT_THROW(apply_iteration(s0, bad, map, {}), ValidationError);
  const auto other = IterationState::start(SpeedProfile(0, 1, std::vector<double>(100, 10.0)));
  EXPECT_THROW(apply_iteration(other, log, map, {}), ValidationError);
}

TEST(Spaa, TwoDropShapeAndBetweenness) {
  const auto map = load_route_file(fixtures::data_dir() / "two_drop_route.json");
  const auto base = plan_base_profile(map, {});
  ScriptedInputSource script({{ScriptAction::Type::gas, 430, 500, false, 0.35, 0},
                              {ScriptAction::Type::gas, 530, 590, false, 0.3, 0}});
  const auto log = run_lap(map, base, script, SimParams{});
  const StretchParams p;
  const auto prepro = build_prepro_profile(log, base, map, p);
  const auto next = blend(base, prepro, p);
  const auto segs = deviation_segments(base, prepro, p);
  ASSERT_FALSE(segs.empty());
  // The stretched copy leads the raw trace: its first deviation starts earlier.
  const auto trace = driver_trace(log, base);
  std::size_t raw_first = 0, pre_first = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!raw_first && std::abs(trace[i] - base[i]) > p.deviation_eps && base.distance_at(i) > 50) raw_first = i;
    if (!pre_first && std::abs(prepro[i] - base[i]) > p.deviation_eps) pre_first = i;
  }
  EXPECT_LT(pre_first, raw_first);
  // Away from the smoothed segment borders the new profile stays between both.
  for (const auto& s : segs) {
    for (std::size_t i = s.first + 30; i + 30 <= s.last; ++i) {
      EXPECT_GE(next[i], std::min(base[i], prepro[i]) - 0.05);
      EXPECT_LE(next[i], std::max(base[i], prepro[i]) + 0.05);
    }
  }
}

TEST(Spaa, LocalityOutsideSegmentsAndSpans) {
  fixtures::Rng rng(17);
  for (int k = 0; k < 40; ++k) {
    const auto inst = fixtures::random_instance(rng);
    const SpaaConfig cfg;
    const auto s1 = apply_iteration(IterationState::start(inst.baseline), inst.log, inst.map, cfg);
    const auto lap = adopt_set_speed(inst.log, inst.map, {}, cfg.stretch);
    const auto ref = apply_set_speed_offsets(inst.baseline, inst.map, lap, cfg.planner);
    const auto prepro = build_prepro_profile(inst.log, ref, inst.map, cfg.stretch);
    const auto segs = deviation_segments(ref, prepro, cfg.stretch);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      bool inside = false;
      for (const auto& s : segs) inside |= i >= s.first && i <= s.last;
      if (!inside) ASSERT_EQ(s1.baseline[i], ref[i]) << i;
      // Where the reference differs from the old baseline a set-speed span or its ramp is active.
      if (ref[i] != inst.baseline[i]) ASSERT_FALSE(lap.empty());
    }
  }
}

TEST(Spaa, MaxOverLimitClamp) {
  const auto map = demo();
  const auto base = plan_base_profile(map, {});
  ScriptedInputSource script({{ScriptAction::Type::gas, 200, 400, false, 0.6, 0}});
  const auto log = run_lap(map, base, script, SimParams{});
  SpaaConfig cfg;
  const auto free = apply_iteration(IterationState::start(base), log, map, cfg);
  cfg.stretch.max_over_limit = kmh_to_mps(2);
  const auto clamped = apply_iteration(IterationState::start(base), log, map, cfg);
  double over_free = 0, over_clamped = 0;
  for (std::size_t i = 0; i + 1 < base.size(); ++i) {
    const double legal = map.legal_speed(base.distance_at(i));
    over_free = std::max(over_free, free.baseline[i] - legal);
    over_clamped = std::max(over_clamped, clamped.baseline[i] - legal);
  }
  EXPECT_GT(over_free, kmh_to_mps(2));
  EXPECT_LE(over_clamped, kmh_to_mps(2) + 1e-12);
}

TEST(Spaa, ParamsValidated) {
  StretchParams p;
  p.alpha = 1.0;
  EXPECT_THROW(p.validate(1.0), ValidationError);
  p = {};
  p.sg_order = 3;
  EXPECT_THROW(p.validate(1.0), ValidationError);
  p = {};
  p.sg_window_m = 3;
  EXPECT_THROW(p.validate(1.0), ValidationError);
  EXPECT_EQ(StretchParams{}.sg_window_points(1.0), 51u);
  EXPECT_EQ(StretchParams{}.sg_window_points(2.0), 27u);
}
