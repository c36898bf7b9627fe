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
#include <sstream>

#include <gtest/gtest.h>

#include "locogauge/rewards.hpp"
#include "reward_oracle.hpp"

namespace locogauge {
namespace {

const RobotDescription& robot() {
  static const RobotDescription r = default_quadruped();
  return r;
}

TEST(RewardConfig, PresetWeights) {
  const auto m = RewardConfig::multi_terrain();
  EXPECT_EQ(m.weights[kRewLinTracking], 1.0);
  EXPECT_EQ(m.weights[kRewAngTracking], 0.5);
  EXPECT_EQ(m.weights[kRewLinVelZ], -2.0);
  EXPECT_EQ(m.weights[kRewAngVelXY], -0.05);
  EXPECT_EQ(m.weights[kRewJointAcc], -2.5e-7);
  EXPECT_EQ(m.weights[kRewJointPower], -2e-5);
  EXPECT_EQ(m.weights[kRewJointTorque], -1e-4);
  EXPECT_EQ(m.weights[kRewBaseHeight], -1.0);
  EXPECT_EQ(m.weights[kRewActionRate], -0.01);
  EXPECT_EQ(m.weights[kRewActionSmoothness], -0.01);
  EXPECT_EQ(m.weights[kRewCollision], -1.0);
  EXPECT_EQ(m.weights[kRewJointLimit], -2.0);
  EXPECT_EQ(m.weights[kRewFootRegulation], -0.05);
  EXPECT_EQ(m.weights[kRewHipRegulation], -0.05);
  EXPECT_EQ(m.weights[kRewHipSymmetry], 0.0);
  EXPECT_EQ(m.base_height_target, 0.38);
  EXPECT_EQ(m.sigma, 0.25);
  const auto f = RewardConfig::flat_high_speed();
  EXPECT_EQ(f.weights[kRewLinTracking], 2.0);
  EXPECT_EQ(f.weights[kRewHipSymmetry], -1.0);
  EXPECT_EQ(f.base_height_target, 0.33);
}

TEST(RewardConfig, JsonOverrides) {
  const auto c = reward_config_from_json({{"preset", "flat_high_speed"}, {"weights", {{"collision", -3.0}}}});
  EXPECT_EQ(c.weights[kRewCollision], -3.0);
  EXPECT_EQ(c.weights[kRewLinTracking], 2.0);
  EXPECT_THROW(reward_config_from_json({{"weights", {{"jumping", 1.0}}}}), InvalidArgument);
  EXPECT_THROW(reward_config_from_json({{"colour", 1}}), InvalidArgument);
  EXPECT_THROW(reward_config_from_json({{"sigma", 0.0}}), InvalidArgument);
}

TEST(StepRewards, MatchScalarRecomputation) {
  Rng rng(1);
  for (const auto& cfg : {RewardConfig::multi_terrain(), RewardConfig::flat_high_speed()}) {
    for (int i = 0; i < 100; ++i) {
      RobotState s, p;
      const StepInput in = testing::random_step(rng, robot(), s, p);
      const StepRewards got = compute_step_rewards(in, robot(), cfg);
      const RewardArray ref = testing::oracle_rewards(in, robot(), cfg.sigma, cfg.base_height_target, cfg.control_dt);
      double total = 0.0;
      for (int k = 0; k < kNumRewardTerms; ++k) {
        ASSERT_NEAR(got.terms[k], ref[k], 1e-9 * std::max(1.0, std::abs(ref[k]))) << reward_term_name(k);
        total += cfg.weights[k] * ref[k];
      }
      ASSERT_NEAR(got.total, total, 1e-9 * std::max(1.0, std::abs(total)));
    }
  }
}

TEST(StepRewards, PerfectTrackingIsOne) {
  RobotState s = testing::standing_state(robot());
  s.lin_vel = {0.7, -0.2, 0.0};
  s.ang_vel = {0.0, 0.0, 0.4};
  StepInput in;
  in.state = &s;
  in.command = {0.7, -0.2, 0.4};
  const auto r = compute_step_rewards(in, robot(), RewardConfig::multi_terrain());
  EXPECT_EQ(r.terms[kRewLinTracking], 1.0);
  EXPECT_EQ(r.terms[kRewAngTracking], 1.0);
}

TEST(StepRewards, TrackingForms) {
  RobotState s = testing::standing_state(robot());
  s.lin_vel = {0.0, 0.0, 0.0};
  StepInput in;
  in.state = &s;
  in.command = {1.0, 0.0, 0.0};
  RewardConfig cfg = RewardConfig::multi_terrain();
  EXPECT_NEAR(compute_step_rewards(in, robot(), cfg).terms[kRewLinTracking], std::exp(-0.25), 1e-15);
  cfg.tracking = TrackingForm::kConventional;
  EXPECT_NEAR(compute_step_rewards(in, robot(), cfg).terms[kRewLinTracking], std::exp(-4.0), 1e-15);
}

TEST(HipSymmetry, AllHipsOutwardExample) {
  RobotState s = testing::standing_state(robot());
  for (int j : kHipJoints) s.q[j] = 0.1;
  StepInput in;
  in.state = &s;
  in.command = {1.0, 0.0, 0.0};
  EXPECT_NEAR(compute_step_rewards(in, robot(), RewardConfig::flat_high_speed()).terms[kRewHipSymmetry], 0.4,
              1e-15);
}

TEST(HipSymmetry, ZeroForMirroredHips) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    RobotState s = testing::standing_state(robot());
    const double front = rng.uniform(-0.5, 0.5), rear = rng.uniform(-0.5, 0.5);
    s.q[0] = front;
    s.q[3] = -front;
    s.q[6] = rear;
    s.q[9] = -rear;
    StepInput in;
    in.state = &s;
    in.command = {rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-2, 2)};
    ASSERT_EQ(compute_step_rewards(in, robot(), RewardConfig::flat_high_speed()).terms[kRewHipSymmetry], 0.0);
  }
}

TEST(HipSymmetry, ZeroWithoutLinearCommand) {
  RobotState s = testing::standing_state(robot());
  for (int j : kHipJoints) s.q[j] = 0.3;
  StepInput in;
  in.state = &s;
  in.command = {0.0, 0.0, 1.0};
  EXPECT_EQ(compute_step_rewards(in, robot(), RewardConfig::flat_high_speed()).terms[kRewHipSymmetry], 0.0);
}

TEST(StepRewards, FootRegulationHook) {
  RewardConfig cfg = RewardConfig::multi_terrain();
  cfg.foot_regulation = [](const StepInput&) { return 2.0; };
  RobotState s = testing::standing_state(robot());
  StepInput in;
  in.state = &s;
  const auto r = compute_step_rewards(in, robot(), cfg);
  EXPECT_EQ(r.terms[kRewFootRegulation], 2.0);
  EXPECT_THROW(compute_step_rewards(StepInput{}, robot(), cfg), InvalidArgument);
}

EpisodeTrace random_episode(Rng& rng, int n) {
  EpisodeTrace t;
  for (int i = 0; i < n; ++i) {
    RobotState s, p;
    const StepInput in = testing::random_step(rng, robot(), s, p);
    TraceRecord r;
    r.time = 0.02 * (i + 1);
    r.trial = i / 7;
    r.command = in.command;
    r.state = s;
    r.action = in.action;
    r.terrain_height = in.terrain_height;
    t.records.push_back(r);
  }
  return t;
}

TEST(EpisodeReport, LinearInWeights) {
  Rng rng(3);
  const auto t = random_episode(rng, 30);
  const RewardConfig cfg = RewardConfig::multi_terrain();
  const auto rep = episode_reward_report(t, robot(), cfg);
  EXPECT_EQ(rep.steps, 30u);
  double dot = 0.0;
  for (int k = 0; k < kNumRewardTerms; ++k) dot += cfg.weights[k] * rep.means[k];
  EXPECT_NEAR(rep.total_mean, dot, 1e-9);
  RewardConfig doubled = cfg;
  doubled.weights[kRewJointTorque] *= 2.0;
  const auto rep2 = episode_reward_report(t, robot(), doubled);
  EXPECT_NEAR(rep2.total_mean - rep.total_mean, rep.weighted_means[kRewJointTorque], 1e-9);
}

TEST(EpisodeReport, HistoryResetsAtTrialBoundaries) {
  Rng rng(4);
  const auto t = random_episode(rng, 14);
  const RewardConfig cfg = RewardConfig::multi_terrain();
  const auto rep = episode_reward_report(t, robot(), cfg);
  double rate = 0.0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const bool first = i == 0 || t.records[i].trial != t.records[i - 1].trial;
    const JointVector prev = first ? JointVector::Zero() : t.records[i - 1].action;
    rate += (t.records[i].action - prev).squaredNorm();
  }
  EXPECT_NEAR(rep.means[kRewActionRate], rate / 14.0, 1e-12);
  EXPECT_NEAR(rep.sums[kRewActionRate], rate * 0.02, 1e-12);
}

TEST(EpisodeReport, ConstantStateMeanEqualsStep) {
  RobotState s = testing::standing_state(robot());
  s.lin_vel = {0.4, 0.0, 0.1};
  EpisodeTrace t;
  t.records = testing::constant_records(8, {1.0, 0.0, 0.0}, s);
  const auto cfg = RewardConfig::multi_terrain();
  const auto rep = episode_reward_report(t, robot(), cfg);
  EXPECT_NEAR(rep.means[kRewLinVelZ], 0.01, 1e-15);
  EXPECT_NEAR(rep.means[kRewLinTracking], std::exp(-0.25 * 0.36), 1e-15);
  EXPECT_THROW(episode_reward_report(EpisodeTrace{}, robot(), cfg), InvalidArgument);
  std::ostringstream csv;
  write_reward_csv(rep, cfg, csv);
  EXPECT_EQ(csv.str().rfind("term,weight,sum,mean,weighted_mean\n", 0), 0u);
}

}  // namespace
}  // namespace locogauge
