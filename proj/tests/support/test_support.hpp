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

#ifndef LOCOGAUGE_TESTS_TEST_SUPPORT_HPP_
#define LOCOGAUGE_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "locogauge/policy.hpp"
#include "locogauge/robot.hpp"
#include "locogauge/scoring.hpp"
#include "locogauge/sim.hpp"
#include "locogauge/trace.hpp"
#include "locogauge/util.hpp"

namespace locogauge::testing {

/// Standing robot at the default pose with a level base.
inline RobotState standing_state(const RobotDescription& robot) {
  RobotState s;
  s.base_position = {1.0, 4.0, robot.nominal_base_height};
  s.q = robot.default_pose;
  s.foot_contact.fill(true);
  return s;
}

/// `n` records of one trial with identical states, 50 Hz.
inline std::vector<TraceRecord> constant_records(int n, const Command& cmd, const RobotState& state) {
  std::vector<TraceRecord> out;
  for (int i = 0; i < n; ++i) {
    TraceRecord r;
    r.time = (i + 1) * 0.02;
    r.command = cmd;
    r.state = state;
    out.push_back(r);
  }
  return out;
}

inline JointVector random_joints(Rng& rng, double lo, double hi) {
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

/// Two experts, one-step history, no hidden layers, identity activation.
/// Gate logits are (ln 3, 0), so the weights are (0.75, 0.25). Expert k
/// outputs the unit vector e_k; the head copies z into actions 0 and 1 and
/// the first observation channel into action 2.
inline MoeNetwork two_expert_network() {
  MoeArchitecture arch;
  arch.num_experts = 2;
  arch.history = 1;
  arch.latent_dim = 2;
  arch.activation = Activation::kIdentity;
  arch.gate_hidden = arch.expert_hidden = arch.head_hidden = {};
  DenseLayer gate{Eigen::MatrixXd::Zero(2, kObsDim), Eigen::Vector2d(std::log(3.0), 0.0)};
  std::vector<Mlp> experts;
  for (int k = 0; k < 2; ++k) {
    DenseLayer e{Eigen::MatrixXd::Zero(2, kObsDim), Eigen::VectorXd::Unit(2, k)};
    experts.emplace_back(std::vector<DenseLayer>{e}, Activation::kIdentity);
  }
  DenseLayer head{Eigen::MatrixXd::Zero(kNumJoints, 2 + kObsDim), Eigen::VectorXd::Zero(kNumJoints)};
  head.weight(0, 0) = 1.0;
  head.weight(1, 1) = 1.0;
  head.weight(2, 2) = 1.0;
  return MoeNetwork(arch, Mlp({gate}, Activation::kIdentity), std::move(experts),
                    Mlp({head}, Activation::kIdentity));
}

/// Trial of `n` records whose tracking, torque, joint and attitude errors
/// grow linearly with `error_scale` for a fixed stream of draws.
inline std::vector<TraceRecord> noisy_records(Rng& rng, const RobotDescription& robot, int n,
                                              double error_scale) {
  std::vector<TraceRecord> recs;
  for (int t = 0; t < n; ++t) {
    TraceRecord r;
    r.time = 0.02 * (t + 1);
    r.command = {1.0, 0.2, 0.5};
    r.state = standing_state(robot);
    r.state.lin_vel = {1.0 + error_scale * rng.uniform(-1, 1), 0.2 + error_scale * rng.uniform(-1, 1), 0.0};
    r.state.ang_vel = {0.0, 0.0, 0.5 + error_scale * rng.uniform(-1, 1)};
    r.state.tau = error_scale * random_joints(rng, -10, 10);
    r.state.dq = random_joints(rng, -3, 3);
    r.state.q = robot.default_pose + error_scale * random_joints(rng, -1, 1);
    const double gy = std::clamp(error_scale * rng.uniform(-0.5, 0.5), -1.0, 1.0);
    r.state.projected_gravity = {0.0, gy, -std::sqrt(1.0 - gy * gy)};
    recs.push_back(r);
  }
  return recs;
}

/// Cell whose search passes every level up to `level_star` and whose three
/// metric seeds all report the constant metric vector `m`.
inline CellScore constant_cell(const std::string& terrain, const std::string& dr, int level_star,
                               const MetricVector& m) {
  CellScore c;
  c.terrain = terrain;
  c.dr = dr;
  for (int l = 1; l <= 10; ++l) c.search.push_back({l, l <= level_star ? 5 : 0, 5, l <= level_star});
  for (int seed = 0; seed < 3; ++seed) {
    ScoreLeaf leaf;
    leaf.level = std::max(level_star, 1);
    leaf.goal = "max_velocity";
    leaf.seed_index = seed;
    leaf.seed = 1000 + seed;
    leaf.trials.assign(6, m);
    leaf.fallen.assign(6, false);
    c.leaves.push_back(leaf);
  }
  return c;
}

/// Tree over `terrains` x `drs` with cells from `make(terrain_index, dr_index)`.
template <typename Fn>
ScoreTree synthetic_tree(const std::vector<std::string>& terrains, const std::vector<std::string>& drs,
                         Fn make) {
  ScoreTree t;
  t.terrains = terrains;
  t.drs = drs;
  for (std::size_t i = 0; i < terrains.size(); ++i) {
    for (std::size_t j = 0; j < drs.size(); ++j) t.cells.push_back(make(i, j));
  }
  recompute(t);
  return t;
}

}  // namespace locogauge::testing

#endif  // LOCOGAUGE_TESTS_TEST_SUPPORT_HPP_
