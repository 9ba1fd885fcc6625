#include <gtest/gtest.h>

#include <cmath>

#include "apldf/planner.hpp"
#include "apldf/spaa.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace apldf;

TEST(Oracle, KinematicPassesMatchClosedForm) {
  fixtures::Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> v(static_cast<std::size_t>(fixtures::uniform_int(rng, 2, 300)));
    for (auto& x : v) x = fixtures::uniform(rng, 0.0, 40.0);
    const double acc = fixtures::uniform(rng, 0.3, 3.0), dec = fixtures::uniform(rng, 0.3, 3.0);
    const double step = fixtures::uniform(rng, 0.2, 5.0);
    auto fast = v;
    enforce_kinematics(fast, step, acc, dec);
    const auto ref = oracle::kinematics(v, step, acc, dec);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(fast[i], ref[i], 1e-9);
  }
}

TEST(Oracle, PipelineMatchesReference) {
  fixtures::Rng rng(2024);
  const SpaaConfig cfg;
  for (int k = 0; k < 60; ++k) {
    const auto inst = fixtures::random_instance(rng);
    const auto s1 = apply_iteration(IterationState::start(inst.baseline), inst.log, inst.map, cfg);
    std::vector<double> base(inst.baseline.values().begin(), inst.baseline.values().end());
    const auto ref = oracle::spaa_step(base, 1.0, inst.log, inst.map, cfg.planner, cfg.stretch);
    for (std::size_t i = 0; i < base.size(); ++i) {
      ASSERT_NEAR(s1.baseline[i], ref.next[i], 1e-6) << "instance " << k << " i=" << i;
    }
  }
}

TEST(Oracle, SecondIterationMatchesReference) {
  // A learned (not kinematically planned) baseline as input.
  fixtures::Rng rng(77);
  const SpaaConfig cfg;
  for (int k = 0; k < 20; ++k) {
    const auto inst = fixtures::random_instance(rng);
    const auto s1 = apply_iteration(IterationState::start(inst.baseline), inst.log, inst.map, cfg);
    ScriptedInputSource script(fixtures::random_script(rng, inst.map));
    const auto log2 = run_lap(inst.map, s1.baseline, script, SimParams{});
    if (!log2.complete) continue;
    const auto s2 = apply_iteration(s1, log2, inst.map, cfg);
    std::vector<double> b1(s1.baseline.values().begin(), s1.baseline.values().end());
    const auto ref = oracle::spaa_step(b1, 1.0, log2, inst.map, cfg.planner, cfg.stretch);
    for (std::size_t i = 0; i < b1.size(); ++i) ASSERT_NEAR(s2.baseline[i], ref.next[i], 1e-6);
  }
}
