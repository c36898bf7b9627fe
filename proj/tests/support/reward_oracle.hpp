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

// Scalar re-statement of the reward table, written with plain loops and no
// Eigen expressions so that it shares no code with the library version.

#ifndef LOCOGAUGE_TESTS_REWARD_ORACLE_HPP_
#define LOCOGAUGE_TESTS_REWARD_ORACLE_HPP_

#include <cmath>

#include "locogauge/rewards.hpp"
#include "test_support.hpp"

namespace locogauge::testing {

inline RewardArray oracle_rewards(const StepInput& in, const RobotDescription& robot, double sigma,
                                  double h_des, double dt) {
  const RobotState& s = *in.state;
  RewardArray r{};
  const double ex = in.command.vx - s.lin_vel[0];
  const double ey = in.command.vy - s.lin_vel[1];
  const double ez = in.command.wz - s.ang_vel[2];
  r[kRewLinTracking] = std::exp(-sigma * (ex * ex + ey * ey));
  r[kRewAngTracking] = std::exp(-sigma * ez * ez);
  r[kRewLinVelZ] = s.lin_vel[2] * s.lin_vel[2];
  r[kRewAngVelXY] = s.ang_vel[0] * s.ang_vel[0] + s.ang_vel[1] * s.ang_vel[1];
  double acc = 0, power = 0, torque = 0, rate = 0, smooth = 0, hip = 0;
  int limits = 0;
  for (int i = 0; i < 12; ++i) {
    const double prev_dq = in.prev_state ? in.prev_state->dq[i] : 0.0;
    const double qdd = (s.dq[i] - prev_dq) / dt;
    acc += qdd * qdd;
    power += std::fabs(s.tau[i]) * std::fabs(s.dq[i]);
    torque += s.tau[i] * s.tau[i];
    const double d1 = in.action[i] - in.prev_action[i];
    rate += d1 * d1;
    const double d2 = in.action[i] - 2 * in.prev_action[i] + in.prev_prev_action[i];
    smooth += d2 * d2;
    if (s.q[i] < robot.soft_lower[i] || s.q[i] > robot.soft_upper[i]) ++limits;
    if (i % 3 == 0) hip += std::fabs(s.q[i] - robot.default_pose[i]);
  }
  r[kRewJointAcc] = acc;
  r[kRewJointPower] = power;
  r[kRewJointTorque] = torque;
  const double dh = h_des - (s.base_position[2] - in.terrain_height);
  r[kRewBaseHeight] = dh * dh;
  r[kRewActionRate] = rate;
  r[kRewActionSmoothness] = smooth;
  r[kRewCollision] = s.collisions;
  r[kRewJointLimit] = limits;
  r[kRewFootRegulation] = 0.0;
  r[kRewHipRegulation] = hip;
  const double norm = std::sqrt(in.command.vx * in.command.vx + in.command.vy * in.command.vy);
  // Hips are joints 0 (FL), 3 (FR), 6 (RL), 9 (RR).
  r[kRewHipSymmetry] = norm == 0.0 ? 0.0
                                   : std::fabs(in.command.vx) / norm *
                                         (std::fabs(s.q[0] + s.q[3]) + std::fabs(s.q[6] + s.q[9]));
  return r;
}

/// Random step with history; `states` must outlive the returned input.
inline StepInput random_step(Rng& rng, const RobotDescription& robot, RobotState& state,
                             RobotState& prev) {
  auto fill = [&](RobotState& s) {
    s = standing_state(robot);
    s.base_position[2] = rng.uniform(0.2, 0.5);
    s.lin_vel = {rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)};
    s.ang_vel = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-2, 2)};
    s.q = robot.default_pose + random_joints(rng, -0.8, 0.8);
    s.dq = random_joints(rng, -10, 10);
    s.tau = random_joints(rng, -30, 30);
    s.collisions = static_cast<int>(rng.below(3));
  };
  fill(state);
  fill(prev);
  StepInput in;
  in.state = &state;
  in.prev_state = rng.bernoulli(0.9) ? &prev : nullptr;
  in.command = {rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-2, 2)};
  if (rng.bernoulli(0.05)) in.command.vx = in.command.vy = 0.0;
  in.action = random_joints(rng, -1, 1);
  in.prev_action = random_joints(rng, -1, 1);
  in.prev_prev_action = random_joints(rng, -1, 1);
  in.terrain_height = rng.uniform(-0.2, 0.2);
  return in;
}

}  // namespace locogauge::testing

#endif  // LOCOGAUGE_TESTS_REWARD_ORACLE_HPP_
