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

#include <gtest/gtest.h>

#include "locogauge/reference_sim.hpp"
#include "locogauge/sim.hpp"
#include "test_support.hpp"

namespace locogauge {
namespace {

Heightfield tile(TerrainKind kind, int level, std::uint64_t seed = 0) {
  TerrainSpec s;
  s.kind = kind;
  s.difficulty = difficulty_for_level(level);
  s.seed = seed;
  return generate(s);
}

TEST(PdTorque, ZeroAtSetpoint) {
  const auto robot = default_quadruped();
  const JointVector tau = pd_torque(JointVector::Zero(), robot.default_pose, JointVector::Zero(),
                                    robot, PdGains{});
  EXPECT_EQ(tau, JointVector::Zero());
}

TEST(PdTorque, TenthOfARadianGivesTwoNewtonMetres) {
  const auto robot = default_quadruped();
  const JointVector q = robot.default_pose - JointVector::Constant(0.1);
  const JointVector tau = pd_torque(JointVector::Zero(), q, JointVector::Zero(), robot, PdGains{});
  for (int i = 0; i < kNumJoints; ++i) EXPECT_NEAR(tau[i], 2.0, 1e-12);
}

TEST(PdTorque, AppliesScalesOffsetAndLimits) {
  auto robot = default_quadruped();
  PdGains g;
  g.kp_scale = 1.1;
  g.kd_scale = 0.9;
  g.strength = 0.8;
  g.offset = 0.01;
  const JointVector dq = JointVector::Constant(2.0);
  const JointVector tau = pd_torque(JointVector::Constant(0.05), robot.default_pose, dq, robot, g);
  const double expected = 0.8 * (1.1 * 20.0 * 0.06 - 0.9 * 0.5 * 2.0);
  for (int i = 0; i < kNumJoints; ++i) EXPECT_NEAR(tau[i], expected, 1e-12);
  const JointVector big = pd_torque(JointVector::Constant(100.0), robot.default_pose,
                                    JointVector::Zero(), robot, PdGains{});
  for (int i = 0; i < kNumJoints; ++i) EXPECT_EQ(big[i], robot.torque_limit[i]);
}

TEST(LatencyQueue, TwentyMillisecondsIsFourPhysicsSteps) {
  LatencyQueue q(0.020, 200);
  EXPECT_EQ(q.delay_steps(), 4u);
  const JointVector a = JointVector::Constant(1.0);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(q.push(a), JointVector::Zero()) << i;
  EXPECT_EQ(q.push(JointVector::Constant(2.0)), a);
}

TEST(LatencyQueue, ZeroLatencyPassesThrough) {
  LatencyQueue q(0.0, 200);
  const JointVector a = JointVector::Constant(0.3);
  EXPECT_EQ(q.push(a), a);
  EXPECT_THROW(LatencyQueue(-0.01, 200), InvalidArgument);
}

TEST(Observe, LayoutAndDimension) {
  static_assert(kObsDim == 3 + 3 + 12 + 12 + 3 + 12);
  const auto robot = default_quadruped();
  RobotState s = testing::standing_state(robot);
  s.q[3] += 0.2;
  s.dq[5] = -1.0;
  s.ang_vel = {0.1, 0.2, 0.3};
  JointVector prev = JointVector::Zero();
  prev[11] = 0.7;
  const Observation o = observe(s, {0.5, -0.25, 1.0}, prev, robot, NoiseModel{}, nullptr);
  EXPECT_DOUBLE_EQ(o[obs_layout::kAngVel + 2], 0.3);
  EXPECT_DOUBLE_EQ(o[obs_layout::kGravity + 2], -1.0);
  EXPECT_NEAR(o[obs_layout::kJointPos + 3], 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(o[obs_layout::kJointVel + 5], -1.0);
  EXPECT_DOUBLE_EQ(o[obs_layout::kCommand + 1], -0.25);
  EXPECT_DOUBLE_EQ(o[obs_layout::kPrevAction + 11], 0.7);
}

TEST(Observe, NoiseIsBoundedAndSeeded) {
  const auto robot = default_quadruped();
  const RobotState s = testing::standing_state(robot);
  const NoiseModel noise;
  const Observation clean = observe(s, {}, JointVector::Zero(), robot, noise, nullptr);
  Rng a(1), b(1);
  const Observation na = observe(s, {}, JointVector::Zero(), robot, noise, &a);
  const Observation nb = observe(s, {}, JointVector::Zero(), robot, noise, &b);
  EXPECT_EQ(na, nb);
  EXPECT_NE(na, clean);
  for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(na[i] - clean[i]), noise.ang_vel);
  for (int i = obs_layout::kJointVel; i < obs_layout::kJointVel + 12; ++i) {
    EXPECT_LE(std::abs(na[i] - clean[i]), noise.joint_vel);
  }
  // Commands and previous actions are never perturbed.
  for (int i = obs_layout::kCommand; i < kObsDim; ++i) EXPECT_EQ(na[i], clean[i]);
}

TEST(DomainRandomization, TrainingSamplesStayInTable) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto dr = sample_training_dr(rng);
    ASSERT_NO_THROW(validate(dr));
    ASSERT_GE(dr.friction, 0.5);
    ASSERT_LE(dr.friction, 1.5);
    ASSERT_LE(std::abs(dr.payload_mass), 1.0);
    ASSERT_LE(dr.com_offset.cwiseAbs().maxCoeff(), 0.03);
    ASSERT_GE(dr.actuator_strength_scale, 0.8);
    ASSERT_LE(dr.actuator_strength_scale, 1.2);
    ASSERT_LE(dr.control_latency, 0.020);
  }
}

TEST(DomainRandomization, RejectsOutOfRange) {
  DomainRandomization dr;
  dr.friction = 0.05;
  EXPECT_THROW(validate(dr), InvalidArgument);
  dr = {};
  dr.control_latency = 0.05;
  EXPECT_THROW(validate(dr), InvalidArgument);
}

TEST(DomainRandomization, PresetSets) {
  const auto nine = default_dr_set();
  ASSERT_EQ(nine.size(), 9u);
  EXPECT_EQ(nine.front().label, "friction_0.2");
  EXPECT_EQ(nine.back().label, "friction_1.0");
  EXPECT_DOUBLE_EQ(nine[3].dr.friction, 0.5);
  const auto ten = friction_sweep_dr_set();
  ASSERT_EQ(ten.size(), 10u);
  EXPECT_DOUBLE_EQ(ten.front().dr.friction, 0.1);
  EXPECT_EQ(dr_from_json(to_json(nine[4].dr)), nine[4].dr);
}

TEST(RobotStateJson, RoundTripAndValidation) {
  const auto robot = default_quadruped();
  RobotState s = testing::standing_state(robot);
  s.lin_vel = {0.3, -0.1, 0.01};
  s.tau[2] = 4.5;
  s.collisions = 2;
  const RobotState back = state_from_json(to_json(s));
  EXPECT_EQ(back.base_position, s.base_position);
  EXPECT_EQ(back.lin_vel, s.lin_vel);
  EXPECT_EQ(back.tau, s.tau);
  EXPECT_EQ(back.collisions, 2);
  EXPECT_NO_THROW(validate_state(back));
  s.base_orientation.coeffs() *= 2.0;
  EXPECT_THROW(validate_state(s), InvalidArgument);
}

TEST(SimConfig, SubstepsAndValidation) {
  SimConfig c;
  EXPECT_EQ(c.substeps(), 4);
  EXPECT_DOUBLE_EQ(c.control_dt(), 0.02);
  c.physics_hz = 210;
  EXPECT_THROW(validate(c), InvalidArgument);
}

TEST(ReferenceSim, FlatResetStandsAtNominalHeight) {
  ReferenceSim sim(SimConfig{}, default_quadruped());
  const auto hf = tile(TerrainKind::kFlat, 1);
  const RobotState s = sim.reset(hf, DomainRandomization{}, 0);
  EXPECT_NEAR(s.base_position.z(), 0.38, 1e-12);
  EXPECT_EQ(s.q, sim.robot().default_pose);
  EXPECT_NEAR((s.projected_gravity - Eigen::Vector3d(0, 0, -1)).norm(), 0.0, 1e-12);
}

TEST(ReferenceSim, BitIdenticalForSameInputs) {
  const auto hf = tile(TerrainKind::kWave, 3);
  DomainRandomization dr;
  dr.control_latency = 0.01;
  ReferenceSim a(SimConfig{}, default_quadruped()), b(SimConfig{}, default_quadruped());
  const auto ra = run_reference_gait(a, hf, dr, 7, {1.0, 0.0, 0.3}, 2.0);
  const auto rb = run_reference_gait(b, hf, dr, 7, {1.0, 0.0, 0.3}, 2.0);
  ASSERT_EQ(ra.states.size(), rb.states.size());
  for (std::size_t i = 0; i < ra.states.size(); ++i) {
    ASSERT_EQ(to_json(ra.states[i]).dump(), to_json(rb.states[i]).dump()) << i;
  }
}

TEST(ReferenceSim, ComOffsetLeansTheBase) {
  ReferenceSim sim(SimConfig{}, default_quadruped());
  const auto hf = tile(TerrainKind::kFlat, 1);
  DomainRandomization dr;
  dr.com_offset = {0.03, 0.0, 0.0};
  const RobotState s = sim.reset(hf, dr, 0);
  const Eigen::Vector3d rpy = roll_pitch_yaw(s.base_orientation);
  EXPECT_NEAR(std::abs(rpy[1]), std::atan(0.03 / 0.38), 1e-9);
  EXPECT_NEAR(rpy[0], 0.0, 1e-12);
  EXPECT_GT(std::abs(s.projected_gravity.x()), 0.07);
}

TEST(ReferenceSim, TracksOneMetrePerSecondOnFlat) {
  ReferenceSim sim(SimConfig{}, default_quadruped());
  const auto run = run_reference_gait(sim, tile(TerrainKind::kFlat, 1), {}, 0, {1.0, 0.0, 0.0}, 3.0);
  ASSERT_FALSE(run.fallen);
  const auto& last = run.states.back();
  EXPECT_NEAR(last.lin_vel.x(), 1.0, 0.05);
  EXPECT_NEAR(last.lin_vel.y(), 0.0, 1e-6);
}

TEST(ReferenceSim, StandingPolicyDoesNotMove) {
  ReferenceSim sim(SimConfig{}, default_quadruped());
  const auto hf = tile(TerrainKind::kFlat, 1);
  const RobotState start = sim.reset(hf, {}, 0);
  sim.set_command({1.0, 0.0, 0.0});
  RobotState s = start;
  for (int i = 0; i < 100; ++i) s = sim.step(JointVector::Zero());
  EXPECT_NEAR((s.base_position - start.base_position).head<2>().norm(), 0.0, 1e-9);
}

TEST(ReferenceSim, StairsAboveCapabilityFall) {
  ReferenceSim sim(SimConfig{}, default_quadruped());
  const auto hf = tile(TerrainKind::kStairsUp, 7);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto run = run_reference_gait(sim, hf, {}, seed, {1.0, 0.0, 0.0}, 6.0);
    EXPECT_TRUE(run.fallen) << seed;
  }
}

TEST(ReferenceSim, LowFrictionTracksWorse) {
  const auto hf = tile(TerrainKind::kFlat, 1);
  std::uint64_t seed = 0;
  while (ReferenceSim::capability_draw(seed) >= 0.3) ++seed;  // survives friction 0.1
  DomainRandomization slick, grippy;
  slick.friction = 0.1;
  ReferenceSim a(SimConfig{}, default_quadruped()), b(SimConfig{}, default_quadruped());
  const auto ra = run_reference_gait(a, hf, slick, seed, {1.0, 0.0, 0.0}, 3.0);
  const auto rb = run_reference_gait(b, hf, grippy, seed, {1.0, 0.0, 0.0}, 3.0);
  ASSERT_FALSE(ra.fallen);
  ASSERT_FALSE(rb.fallen);
  EXPECT_LT(a.efficiency(), b.efficiency());
  EXPECT_GT(std::abs(1.0 - ra.states.back().lin_vel.x()), std::abs(1.0 - rb.states.back().lin_vel.x()));
}

TEST(CapabilityProfile, UpToIsMonotone) {
  const auto p = CapabilityProfile::up_to(6);
  EXPECT_TRUE(p.monotone());
  EXPECT_EQ(p.pass_fraction[5], 1.0);
  EXPECT_EQ(p.pass_fraction[6], 0.0);
  CapabilityProfile bumpy;
  bumpy.pass_fraction = {1, 0.5, 0.7, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_FALSE(bumpy.monotone());
}

}  // namespace
}  // namespace locogauge
