// Copyright 2026 The locogauge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "locogauge/goals.hpp"

namespace locogauge {
namespace {

TEST(CommandLimits, TerrainTable) {
  EXPECT_EQ(command_limits(TerrainKind::kFlat), (CommandLimits{2.0, 1.0, 2.0}));
  EXPECT_EQ(command_limits(TerrainKind::kWave), (CommandLimits{1.5, 1.0, 1.5}));
  EXPECT_EQ(command_limits(TerrainKind::kSlopeDown), (CommandLimits{1.5, 1.0, 1.5}));
  EXPECT_EQ(command_limits(TerrainKind::kStairsUp), (CommandLimits{1.0, 1.0, 1.5}));
  EXPECT_EQ(command_limits(TerrainKind::kObstacle), (CommandLimits{1.0, 1.0, 1.5}));
  EXPECT_DOUBLE_EQ(sigma_max(TerrainKind::kFlat), 0.25);
  EXPECT_DOUBLE_EQ(sigma_max(TerrainKind::kWave), 5.0 / 12.0);
  EXPECT_DOUBLE_EQ(sigma_max(TerrainKind::kStairsDown), 0.5);
  EXPECT_DOUBLE_EQ(sigma_max(TerrainKind::kObstacle), 0.75);
}

TEST(BuildGoal, TrialCounts) {
  const CommandLimits flat = command_limits(TerrainKind::kFlat);
  for (auto kind : {GoalKind::kMaxVelocity, GoalKind::kDiagonalVelocity, GoalKind::kTargetPosition}) {
    const auto s = build_goal(kind, flat);
    std::set<int> trials;
    for (const auto& seg : s.segments) trials.insert(seg.trial);
    EXPECT_EQ(static_cast<int>(trials.size()), max_trials(kind));
    EXPECT_EQ(s.max_trials, max_trials(kind));
  }
  EXPECT_EQ(max_trials(GoalKind::kMaxVelocity), 6);
  EXPECT_EQ(max_trials(GoalKind::kDiagonalVelocity), 8);
  EXPECT_EQ(max_trials(GoalKind::kTargetPosition), 1);
}

TEST(BuildGoal, MaxVelocityStopsAfterEachDirection) {
  const auto s = build_goal(GoalKind::kMaxVelocity, {2.0, 1.0, 2.0});
  const auto first = s.trial(0);
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].command, (Command{2.0, 0.0, 0.0}));
  EXPECT_FALSE(first[0].stop);
  EXPECT_EQ(first[1].command, (Command{0.0, 0.0, 0.0}));
  EXPECT_TRUE(first[1].stop);
  EXPECT_EQ(s.trial(5)[0].command, (Command{0.0, 0.0, -2.0}));
}

TEST(BuildGoal, DiagonalCoversAllSignPairs) {
  const auto s = build_goal(GoalKind::kDiagonalVelocity, {1.5, 1.0, 1.5});
  ASSERT_EQ(s.segments.size(), 8u);
  std::set<std::tuple<double, double, double>> seen;
  for (const auto& seg : s.segments) {
    const Command& c = seg.command;
    EXPECT_EQ(std::abs(c.vx), 1.5);
    EXPECT_TRUE((c.vy == 0.0) != (c.wz == 0.0));
    seen.insert({c.vx, c.vy, c.wz});
  }
  EXPECT_EQ(seen.size(), 8u);
}

TEST(BuildGoal, LinearCapAndJsonRoundTrip) {
  GoalOptions o;
  o.linear_cap = 1.0;
  const auto s = build_goal(GoalKind::kMaxVelocity, {2.0, 1.0, 2.0}, o);
  EXPECT_EQ(s.segments[0].command.vx, 1.0);
  EXPECT_EQ(s.segments[8].command.wz, 2.0);
  const auto back = goal_schedule_from_json(to_json(s));
  ASSERT_EQ(back.segments.size(), s.segments.size());
  EXPECT_EQ(back.segments[3].command, s.segments[3].command);
  EXPECT_EQ(goal_options_from_json(to_json(o)), o);
}

TEST(TargetController, AtTargetIsZero) {
  const Command c = target_position_controller({1.0, 2.0, 0.4}, {1.0, 2.0}, 1.0, {1, 1, 1});
  EXPECT_EQ(c, (Command{0.0, 0.0, 0.0}));
}

TEST(TargetController, SaturatesFarAhead) {
  const Command c = target_position_controller({0.0, 0.0, 0.0}, {10.0, 0.0}, 1.0, {1.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(c.vx, 1.0);
  EXPECT_DOUBLE_EQ(c.vy, 0.0);
  EXPECT_DOUBLE_EQ(c.wz, 0.0);
}

TEST(TargetController, TurnsTowardsTargetOnTheLeft) {
  const Command c = target_position_controller({0.0, 0.0, 0.0}, {0.0, 3.0}, 1.0, {1.0, 1.0, 1.0});
  EXPECT_GT(c.wz, 0.0);
  EXPECT_NEAR(c.vx, 0.0, 1e-12);
  EXPECT_NEAR(c.vy, 0.0, 1e-12);
}

TEST(TargetController, ErrorIsInBodyFrame) {
  // Facing +y, a target straight ahead is body +x.
  const Command c = target_position_controller({0.0, 0.0, M_PI / 2}, {0.0, 0.5}, 1.0, {1.0, 1.0, 1.0});
  EXPECT_NEAR(c.vx, 0.5, 1e-12);
  EXPECT_NEAR(c.vy, 0.0, 1e-12);
}

TEST(SuccessCheck, ThresholdRule) {
  EXPECT_TRUE(success_check({4.2, false, false}, 4.0));
  EXPECT_TRUE(success_check({4.0, false, false}, 4.0));
  EXPECT_FALSE(success_check({3.0, true, false}, 4.0));
  EXPECT_FALSE(success_check({3.9, false, true}, 4.0));
  EXPECT_FALSE(success_check({4.5, true, false}, 4.0));
}

TEST(DynamicSigma, LevelZeroIsBase) {
  for (double v : {0.0, 0.7, 1.2, 3.0}) {
    EXPECT_DOUBLE_EQ(dynamic_sigma(0.25, 0.75, v, kLinearSigmaBand, 0.0), 0.25);
  }
}

TEST(DynamicSigma, BelowBandIsBase) {
  EXPECT_DOUBLE_EQ(dynamic_sigma(0.25, 0.75, 0.3, kLinearSigmaBand, 10.0), 0.25);
}

TEST(DynamicSigma, FullLevelAboveBandIsMax) {
  for (TerrainKind k : {TerrainKind::kFlat, TerrainKind::kWave, TerrainKind::kStairsUp, TerrainKind::kObstacle}) {
    EXPECT_DOUBLE_EQ(dynamic_sigma(kBaseSigma, sigma_max(k), 1.5, kLinearSigmaBand, 10.0), sigma_max(k));
  }
}

TEST(DynamicSigma, BlendWeightFollowsExponential) {
  // L = 5: e^0.5 - 1 = 0.6487...
  const double w = std::exp(0.5) - 1.0;
  EXPECT_NEAR(dynamic_sigma(0.25, 0.75, 2.0, kLinearSigmaBand, 5.0), 0.25 + w * 0.5, 1e-15);
  // Saturates once e^(L/10) - 1 reaches 1, i.e. L >= 10 ln 2.
  EXPECT_DOUBLE_EQ(dynamic_sigma(0.25, 0.75, 2.0, kLinearSigmaBand, 7.0), 0.75);
}

TEST(DynamicSigma, InterpolationModes) {
  // Midpoint of the band.
  EXPECT_NEAR(sigma_vel(0.25, 0.75, 1.0, kLinearSigmaBand), 0.5, 1e-15);
  EXPECT_NEAR(sigma_vel(0.25, 0.75, 0.5, kLinearSigmaBand), 0.25, 1e-15);
  EXPECT_NEAR(sigma_vel(0.25, 0.75, 0.5, kLinearSigmaBand, SigmaMode::kVerbatim), 0.75, 1e-15);
  EXPECT_THROW(sigma_vel(0.25, 0.75, 1.0, {1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(dynamic_sigma(0.25, 0.75, -0.1, kLinearSigmaBand, 1.0), InvalidArgument);
}

TEST(DynamicSigma, BoundedAndMonotoneInLevel) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const double v = rng.uniform(0.0, 3.0);
    double prev = 0.0;
    for (int l = 0; l <= 10; ++l) {
      const double s = dynamic_sigma(0.25, 0.5, v, kLinearSigmaBand, l);
      ASSERT_GE(s, 0.25 - 1e-15);
      ASSERT_LE(s, 0.5 + 1e-15);
      ASSERT_GE(s, prev - 1e-15);
      prev = s;
    }
  }
}

TEST(Curriculum, StageTable) {
  EXPECT_EQ(stage_for_step(0), CurriculumStage::kInitial);
  EXPECT_EQ(stage_for_step(20000), CurriculumStage::kInitial);
  EXPECT_EQ(stage_for_step(20001), CurriculumStage::kIntermediate);
  EXPECT_EQ(stage_for_step(50000), CurriculumStage::kIntermediate);
  EXPECT_EQ(stage_for_step(50001), CurriculumStage::kAdvanced);
  EXPECT_EQ(stage_limits(CurriculumStage::kInitial), (CommandLimits{0.5, 0.5, 1.0}));
  EXPECT_EQ(stage_limits(CurriculumStage::kIntermediate), (CommandLimits{1.0, 1.0, 1.5}));
  EXPECT_EQ(stage_limits(CurriculumStage::kAdvanced), (CommandLimits{2.0, 1.0, 2.0}));
  SamplingContext ctx;
  ctx.stage = CurriculumStage::kAdvanced;
  ctx.terrain = TerrainKind::kStairsUp;
  EXPECT_EQ(effective_limits(ctx), (CommandLimits{1.0, 1.0, 1.5}));
}

TEST(ExclusionSpeed, Arithmetic) {
  const CommandLimits initial{0.5, 0.5, 1.0};
  // 5 m over 20 s.
  EXPECT_DOUBLE_EQ(exclusion_speed({}, 10.0, 20.0, initial), 0.25);
  // 0.2 m/s for 10 s leaves 3 m over 10 s.
  EXPECT_NEAR(exclusion_speed({{0.2, 0.0, 0.0}}, 10.0, 20.0, initial), 0.3, 1e-15);
  // Already covered.
  EXPECT_DOUBLE_EQ(exclusion_speed({{0.5, 0.0, 0.0}}, 10.0, 20.0, initial), 0.0);
  // Clipped at the limit.
  EXPECT_DOUBLE_EQ(exclusion_speed({}, 1.0, 5.0, initial), 0.5);
  EXPECT_THROW(exclusion_speed({{}, {}}, 10.0, 20.0, initial), InvalidArgument);
}

TEST(ZeroDuration, Arithmetic) {
  const CommandLimits initial{0.5, 0.5, 1.0};
  // 20 - 5 / 0.4 = 7.5.
  EXPECT_DOUBLE_EQ(zero_duration({}, 10.0, 20.0, initial), 7.5);
  EXPECT_DOUBLE_EQ(zero_duration({{0.5, 0.0, 0.0}}, 10.0, 20.0, initial), 10.0);
  EXPECT_DOUBLE_EQ(zero_duration({}, 10.0, 10.0, initial), 0.0);
}

TEST(Sampling, FractionsAndBand) {
  Rng rng(7);
  SamplingContext ctx;
  ctx.stage = CurriculumStage::kAdvanced;
  const int n = 20000;
  int stationary = 0, extreme = 0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_training_command(rng, ctx);
    if (s.kind == SampleKind::kStationary) {
      ++stationary;
      EXPECT_EQ(s.command, Command{});
      ASSERT_TRUE(s.duration.has_value());
    } else if (s.kind == SampleKind::kExtreme) {
      ++extreme;
      EXPECT_EQ(std::abs(s.command.vx), 2.0);
      EXPECT_EQ(std::abs(s.command.vy), 1.0);
      EXPECT_EQ(std::abs(s.command.wz), 2.0);
    } else {
      ASSERT_GE(std::abs(s.command.vx), s.v_star);
      ASSERT_LE(std::abs(s.command.vx), 2.0);
    }
  }
  EXPECT_NEAR(stationary / static_cast<double>(n), 0.10, 0.015);
  EXPECT_NEAR(extreme / static_cast<double>(n), 0.20, 0.02);
}

TEST(Sampling, PivotOnlyWithoutBand) {
  Rng rng(8);
  SamplingContext ctx;
  ctx.stage = CurriculumStage::kAdvanced;
  ctx.prior = {{2.0, 0.0, 0.0}};  // 20 m covered, no band
  int pivots = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto s = sample_training_command(rng, ctx);
    EXPECT_DOUBLE_EQ(s.v_star, 0.0);
    if (s.kind == SampleKind::kPivot) {
      ++pivots;
      EXPECT_EQ(s.command.vx, 0.0);
      EXPECT_EQ(std::abs(s.command.wz), 2.0);
    }
    if (s.kind == SampleKind::kUniform) {
      const double lin = s.command.linear_norm();
      EXPECT_TRUE(lin == 0.0 || lin >= kSmallCommand);
    }
  }
  EXPECT_GT(pivots, 0);
}

TEST(Sampling, ExhaustedEpisodeThrows) {
  Rng rng(9);
  SamplingContext ctx;
  ctx.prior = {{}, {}};
  EXPECT_THROW(sample_training_command(rng, ctx), InvalidArgument);
}

}  // namespace
}  // namespace locogauge
