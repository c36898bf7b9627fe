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

#include "locogauge/rewards.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace locogauge {
namespace {

constexpr std::array<std::string_view, kNumRewardTerms> kNames{
    "lin_tracking", "ang_tracking",      "lin_vel_z",  "ang_vel_xy",      "joint_acc",
    "joint_power",  "joint_torque",      "base_height", "action_rate",    "action_smoothness",
    "collision",    "joint_limit",       "foot_regulation", "hip_regulation", "hip_symmetry"};

int term_index(std::string_view name) {
  for (int i = 0; i < kNumRewardTerms; ++i) {
    if (kNames[i] == name) return i;
  }
  throw InvalidArgument(fmt::format("rewards: unknown term '{}'", name));
}

}  // namespace

std::string_view reward_term_name(int term) {
  if (term < 0 || term >= kNumRewardTerms) throw InvalidArgument("reward term out of range");
  return kNames[term];
}

RewardConfig RewardConfig::multi_terrain() {
  RewardConfig c;
  auto& w = c.weights;
  w[kRewLinTracking] = 1.0;
  w[kRewAngTracking] = 0.5;
  w[kRewLinVelZ] = -2.0;
  w[kRewAngVelXY] = -0.05;
  w[kRewJointAcc] = -2.5e-7;
  w[kRewJointPower] = -2e-5;
  w[kRewJointTorque] = -1e-4;
  w[kRewBaseHeight] = -1.0;
  w[kRewActionRate] = -0.01;
  w[kRewActionSmoothness] = -0.01;
  w[kRewCollision] = -1.0;
  w[kRewJointLimit] = -2.0;
  w[kRewFootRegulation] = -0.05;
  w[kRewHipRegulation] = -0.05;
  w[kRewHipSymmetry] = 0.0;
  return c;
}

RewardConfig RewardConfig::flat_high_speed() {
  RewardConfig c = multi_terrain();
  c.weights[kRewLinTracking] = 2.0;
  c.weights[kRewHipSymmetry] = -1.0;
  c.base_height_target = 0.33;
  return c;
}

void validate(const RewardConfig& cfg) {
  for (double w : cfg.weights) {
    if (!std::isfinite(w)) throw InvalidArgument("rewards: non-finite weight");
  }
  if (!(cfg.sigma > 0.0)) throw InvalidArgument("rewards: sigma must be positive");
  if (!(cfg.base_height_target > 0.0)) throw InvalidArgument("rewards: base height target must be positive");
  if (!(cfg.control_dt > 0.0)) throw InvalidArgument("rewards: control_dt must be positive");
}

nlohmann::json to_json(const RewardConfig& cfg) {
  nlohmann::json w = nlohmann::json::object();
  for (int i = 0; i < kNumRewardTerms; ++i) w[std::string(kNames[i])] = cfg.weights[i];
  return {{"weights", w},
          {"sigma", cfg.sigma},
          {"base_height_target", cfg.base_height_target},
          {"tracking", cfg.tracking == TrackingForm::kPrinted ? "printed" : "conventional"}};
}

RewardConfig reward_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("rewards: must be an object");
  const std::string preset = j.value("preset", "multi_terrain");
  RewardConfig c;
  if (preset == "multi_terrain") {
    c = RewardConfig::multi_terrain();
  } else if (preset == "flat_high_speed") {
    c = RewardConfig::flat_high_speed();
  } else {
    throw InvalidArgument(fmt::format("rewards: unknown preset '{}'", preset));
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    if (key == "weights") {
      for (const auto& [term, w] : value.items()) c.weights[term_index(term)] = w.get<double>();
    } else if (key == "sigma") {
      c.sigma = value.get<double>();
    } else if (key == "base_height_target") {
      c.base_height_target = value.get<double>();
    } else if (key == "tracking") {
      const auto form = value.get<std::string>();
      if (form == "printed") c.tracking = TrackingForm::kPrinted;
      else if (form == "conventional") c.tracking = TrackingForm::kConventional;
      else throw InvalidArgument(fmt::format("rewards: unknown tracking form '{}'", form));
    } else {
      throw InvalidArgument(fmt::format("rewards: unknown key '{}'", key));
    }
  }
  validate(c);
  return c;
}

StepRewards compute_step_rewards(const StepInput& in, const RobotDescription& robot,
                                 const RewardConfig& cfg) {
  if (in.state == nullptr) throw InvalidArgument("rewards: missing state");
  const RobotState& s = *in.state;
  StepRewards out;
  auto& r = out.terms;

  const double lin_err2 = std::pow(in.command.vx - s.lin_vel.x(), 2) +
                          std::pow(in.command.vy - s.lin_vel.y(), 2);
  const double ang_err2 = std::pow(in.command.wz - s.ang_vel.z(), 2);
  if (cfg.tracking == TrackingForm::kPrinted) {
    r[kRewLinTracking] = std::exp(-cfg.sigma * lin_err2);
    r[kRewAngTracking] = std::exp(-cfg.sigma * ang_err2);
  } else {
    r[kRewLinTracking] = std::exp(-lin_err2 / cfg.sigma);
    r[kRewAngTracking] = std::exp(-ang_err2 / cfg.sigma);
  }
  r[kRewLinVelZ] = s.lin_vel.z() * s.lin_vel.z();
  r[kRewAngVelXY] = s.ang_vel.x() * s.ang_vel.x() + s.ang_vel.y() * s.ang_vel.y();

  const JointVector prev_dq = in.prev_state ? in.prev_state->dq : JointVector::Zero();
  r[kRewJointAcc] = ((s.dq - prev_dq) / cfg.control_dt).squaredNorm();
  r[kRewJointPower] = (s.tau.cwiseAbs().array() * s.dq.cwiseAbs().array()).sum();
  r[kRewJointTorque] = s.tau.squaredNorm();

  const double h = s.base_position.z() - in.terrain_height;
  r[kRewBaseHeight] = (cfg.base_height_target - h) * (cfg.base_height_target - h);
  r[kRewActionRate] = (in.action - in.prev_action).squaredNorm();
  r[kRewActionSmoothness] = (in.action - 2.0 * in.prev_action + in.prev_prev_action).squaredNorm();
  r[kRewCollision] = static_cast<double>(s.collisions);

  int violations = 0;
  for (int i = 0; i < kNumJoints; ++i) {
    if (s.q[i] < robot.soft_lower[i] || s.q[i] > robot.soft_upper[i]) ++violations;
  }
  r[kRewJointLimit] = static_cast<double>(violations);
  r[kRewFootRegulation] = cfg.foot_regulation ? cfg.foot_regulation(in) : 0.0;

  double hip = 0.0;
  for (int j : kHipJoints) hip += std::abs(s.q[j] - robot.default_pose[j]);
  r[kRewHipRegulation] = hip;

  const double cmd_norm = std::hypot(in.command.vx, in.command.vy);
  if (cmd_norm > 0.0) {
    const double fl = s.q[joint_index(0, kHip)], fr = s.q[joint_index(1, kHip)];
    const double rl = s.q[joint_index(2, kHip)], rr = s.q[joint_index(3, kHip)];
    r[kRewHipSymmetry] = std::abs(in.command.vx) / cmd_norm * (std::abs(fl + fr) + std::abs(rl + rr));
  }

  for (int i = 0; i < kNumRewardTerms; ++i) out.total += cfg.weights[i] * r[i];
  return out;
}

RewardReport episode_reward_report(const EpisodeTrace& trace, const RobotDescription& robot,
                                   const RewardConfig& cfg) {
  if (trace.records.empty()) throw InvalidArgument("rewards: empty trace");
  validate(cfg);
  RewardReport rep;
  const RobotState* prev_state = nullptr;
  JointVector a1 = JointVector::Zero(), a2 = JointVector::Zero();
  int trial = trace.records.front().trial;
  for (const auto& rec : trace.records) {
    if (rec.trial != trial) {
      prev_state = nullptr;
      a1.setZero();
      a2.setZero();
      trial = rec.trial;
    }
    StepInput in;
    in.state = &rec.state;
    in.prev_state = prev_state;
    in.command = rec.command;
    in.action = rec.action;
    in.prev_action = a1;
    in.prev_prev_action = a2;
    in.terrain_height = rec.terrain_height;
    const StepRewards step = compute_step_rewards(in, robot, cfg);
    for (int i = 0; i < kNumRewardTerms; ++i) rep.sums[i] += step.terms[i];
    a2 = a1;
    a1 = rec.action;
    prev_state = &rec.state;
    ++rep.steps;
  }
  const double n = static_cast<double>(rep.steps);
  for (int i = 0; i < kNumRewardTerms; ++i) {
    rep.means[i] = rep.sums[i] / n;
    rep.sums[i] *= cfg.control_dt;
    rep.weighted_means[i] = cfg.weights[i] * rep.means[i];
    rep.total_mean += rep.weighted_means[i];
  }
  return rep;
}

void write_reward_csv(const RewardReport& report, const RewardConfig& cfg, std::ostream& out) {
  out << "term,weight,sum,mean,weighted_mean\n";
  for (int i = 0; i < kNumRewardTerms; ++i) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", kNames[i], cfg.weights[i],
                       report.sums[i], report.means[i], report.weighted_means[i]);
  }
  out << fmt::format("total,,,,{:.17g}\n", report.total_mean);
}

}  // namespace locogauge
