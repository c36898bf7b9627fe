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

#include "locogauge/sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace locogauge {
namespace {

constexpr double kRangeTol = 1e-9;

void check_range(const char* name, double v, double lo, double hi) {
  if (!std::isfinite(v) || v < lo - kRangeTol || v > hi + kRangeTol) {
    throw InvalidArgument(fmt::format("domain randomization: {} = {} outside [{}, {}]",
                                      name, v, lo, hi));
  }
}

template <int N>
nlohmann::json vec_to_json(const Eigen::Matrix<double, N, 1>& v) {
  auto a = nlohmann::json::array();
  for (int i = 0; i < N; ++i) a.push_back(v[i]);
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> vec_from_json(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != N) {
    throw InvalidArgument(fmt::format("state: '{}' must have {} entries", key, N));
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!a[i].is_number()) throw InvalidArgument(fmt::format("state: '{}'[{}] not a number", key, i));
    v[i] = a[i].get<double>();
  }
  return v;
}

}  // namespace

double Command::linear_norm() const { return std::hypot(vx, vy); }

void validate(const DomainRandomization& dr) {
  check_range("friction", dr.friction, 0.1, 1.5);
  check_range("payload_mass", dr.payload_mass, -1.0, 1.0);
  check_range("link_mass_scale", dr.link_mass_scale, 0.9, 1.1);
  for (int i = 0; i < 3; ++i) check_range("com_offset", dr.com_offset[i], -0.03, 0.03);
  check_range("restitution", dr.restitution, 0.0, 0.5);
  check_range("kp_scale", dr.kp_scale, 0.9, 1.1);
  check_range("kd_scale", dr.kd_scale, 0.9, 1.1);
  check_range("actuator_strength_scale", dr.actuator_strength_scale, 0.8, 1.2);
  check_range("actuator_offset", dr.actuator_offset, -0.035, 0.035);
  check_range("control_latency", dr.control_latency, 0.0, 0.020);
}

DomainRandomization sample_training_dr(Rng& rng) {
  DomainRandomization dr;
  dr.friction = rng.uniform(0.5, 1.5);
  dr.payload_mass = rng.uniform(-1.0, 1.0);
  dr.link_mass_scale = rng.uniform(0.9, 1.1);
  for (int i = 0; i < 3; ++i) dr.com_offset[i] = rng.uniform(-0.03, 0.03);
  dr.restitution = rng.uniform(0.0, 0.5);
  dr.kp_scale = rng.uniform(0.9, 1.1);
  dr.kd_scale = rng.uniform(0.9, 1.1);
  dr.actuator_strength_scale = rng.uniform(0.8, 1.2);
  dr.actuator_offset = rng.uniform(-0.035, 0.035);
  dr.control_latency = rng.uniform(0.0, 0.020);
  return dr;
}

nlohmann::json to_json(const DomainRandomization& dr) {
  return {{"friction", dr.friction},
          {"payload_mass", dr.payload_mass},
          {"link_mass_scale", dr.link_mass_scale},
          {"com_offset", {dr.com_offset.x(), dr.com_offset.y(), dr.com_offset.z()}},
          {"restitution", dr.restitution},
          {"kp_scale", dr.kp_scale},
          {"kd_scale", dr.kd_scale},
          {"actuator_strength_scale", dr.actuator_strength_scale},
          {"actuator_offset", dr.actuator_offset},
          {"control_latency", dr.control_latency}};
}

DomainRandomization dr_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("domain randomization must be an object");
  static const char* kKeys[] = {"friction",    "payload_mass", "link_mass_scale",
                                "com_offset",  "restitution",  "kp_scale",
                                "kd_scale",    "actuator_strength_scale",
                                "actuator_offset", "control_latency", "label"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw InvalidArgument(fmt::format("domain randomization: unknown key '{}'", key));
    }
  }
  DomainRandomization dr;
  dr.friction = j.value("friction", dr.friction);
  dr.payload_mass = j.value("payload_mass", dr.payload_mass);
  dr.link_mass_scale = j.value("link_mass_scale", dr.link_mass_scale);
  if (j.contains("com_offset")) dr.com_offset = vec_from_json<3>(j, "com_offset");
  dr.restitution = j.value("restitution", dr.restitution);
  dr.kp_scale = j.value("kp_scale", dr.kp_scale);
  dr.kd_scale = j.value("kd_scale", dr.kd_scale);
  dr.actuator_strength_scale = j.value("actuator_strength_scale", dr.actuator_strength_scale);
  dr.actuator_offset = j.value("actuator_offset", dr.actuator_offset);
  dr.control_latency = j.value("control_latency", dr.control_latency);
  validate(dr);
  return dr;
}

std::vector<NamedDr> default_dr_set() {
  std::vector<NamedDr> out;
  for (int i = 2; i <= 10; ++i) {
    DomainRandomization dr;
    dr.friction = i / 10.0;
    out.push_back({fmt::format("friction_{:.1f}", dr.friction), dr});
  }
  return out;
}

std::vector<NamedDr> friction_sweep_dr_set() {
  std::vector<NamedDr> out;
  for (int i = 1; i <= 10; ++i) {
    DomainRandomization dr;
    dr.friction = i / 10.0;
    out.push_back({fmt::format("friction_{:.1f}", dr.friction), dr});
  }
  return out;
}

void validate(const SimConfig& cfg) {
  if (cfg.control_hz <= 0 || cfg.physics_hz <= 0 || cfg.physics_hz % cfg.control_hz != 0) {
    throw InvalidArgument(fmt::format("sim: physics_hz ({}) must be a positive multiple of control_hz ({})",
                                      cfg.physics_hz, cfg.control_hz));
  }
  if (!(cfg.kp > 0.0) || !(cfg.kd >= 0.0)) throw InvalidArgument("sim: PD gains must be positive");
  if (!(cfg.action_clip > 0.0)) throw InvalidArgument("sim: action_clip must be positive");
  if (!(cfg.episode_timeout > 0.0)) throw InvalidArgument("sim: episode_timeout must be positive");
}

void validate_state(const RobotState& s) {
  auto finite = [](const auto& m) { return m.allFinite(); };
  if (!finite(s.base_position) || !finite(s.lin_vel) || !finite(s.ang_vel) || !finite(s.q) ||
      !finite(s.dq) || !finite(s.tau) || !finite(s.projected_gravity) ||
      !s.base_orientation.coeffs().allFinite()) {
    throw InvalidArgument("state: non-finite value");
  }
  if (std::abs(s.base_orientation.norm() - 1.0) > 1e-6) {
    throw InvalidArgument(fmt::format("state: quaternion norm {} is not 1", s.base_orientation.norm()));
  }
  if (std::abs(s.projected_gravity.norm() - 1.0) > 1e-6) {
    throw InvalidArgument(fmt::format("state: projected gravity norm {} is not 1",
                                      s.projected_gravity.norm()));
  }
  if (s.collisions < 0) throw InvalidArgument("state: negative collision count");
}

nlohmann::json to_json(const RobotState& s) {
  const auto& q = s.base_orientation;
  return {{"base_position", vec_to_json<3>(s.base_position)},
          {"base_orientation", {q.w(), q.x(), q.y(), q.z()}},
          {"lin_vel", vec_to_json<3>(s.lin_vel)},
          {"ang_vel", vec_to_json<3>(s.ang_vel)},
          {"q", vec_to_json<kNumJoints>(s.q)},
          {"dq", vec_to_json<kNumJoints>(s.dq)},
          {"tau", vec_to_json<kNumJoints>(s.tau)},
          {"foot_contact", s.foot_contact},
          {"projected_gravity", vec_to_json<3>(s.projected_gravity)},
          {"collisions", s.collisions}};
}

RobotState state_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("state: must be an object");
  RobotState s;
  s.base_position = vec_from_json<3>(j, "base_position");
  const auto wxyz = vec_from_json<4>(j, "base_orientation");
  s.base_orientation = Eigen::Quaterniond(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
  s.lin_vel = vec_from_json<3>(j, "lin_vel");
  s.ang_vel = vec_from_json<3>(j, "ang_vel");
  s.q = vec_from_json<kNumJoints>(j, "q");
  s.dq = vec_from_json<kNumJoints>(j, "dq");
  s.tau = vec_from_json<kNumJoints>(j, "tau");
  const auto& contact = j.at("foot_contact");
  if (!contact.is_array() || contact.size() != kNumFeet) {
    throw InvalidArgument("state: 'foot_contact' must have 4 entries");
  }
  for (int i = 0; i < kNumFeet; ++i) s.foot_contact[i] = contact[i].get<bool>();
  s.projected_gravity = vec_from_json<3>(j, "projected_gravity");
  s.collisions = j.value("collisions", 0);
  return s;
}

Eigen::Vector3d roll_pitch_yaw(const Eigen::Quaterniond& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double sinp = std::clamp(2.0 * (w * y - z * x), -1.0, 1.0);
  const double pitch = std::asin(sinp);
  const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return {roll, pitch, yaw};
}

Observation observe(const RobotState& state, const Command& cmd,
                    const JointVector& prev_action, const RobotDescription& robot,
                    const NoiseModel& noise, Rng* noise_rng) {
  using namespace obs_layout;
  Observation o;
  o.segment<3>(kAngVel) = state.ang_vel;
  o.segment<3>(kGravity) = state.projected_gravity;
  o.segment<kNumJoints>(kJointPos) = state.q - robot.default_pose;
  o.segment<kNumJoints>(kJointVel) = state.dq;
  o.segment<3>(kCommand) << cmd.vx, cmd.vy, cmd.wz;
  o.segment<kNumJoints>(kPrevAction) = prev_action;
  if (noise.enabled && noise_rng != nullptr) {
    auto perturb = [&](int start, int n, double amp) {
      for (int i = start; i < start + n; ++i) o[i] += noise_rng->uniform(-amp, amp);
    };
    perturb(kAngVel, 3, noise.ang_vel);
    perturb(kGravity, 3, noise.gravity);
    perturb(kJointPos, kNumJoints, noise.joint_pos);
    perturb(kJointVel, kNumJoints, noise.joint_vel);
  }
  return o;
}

JointVector pd_torque(const JointVector& action, const JointVector& q,
                      const JointVector& dq, const RobotDescription& robot,
                      const PdGains& g) {
  const JointVector target = robot.default_pose + action + JointVector::Constant(g.offset);
  JointVector tau =
      g.strength * (g.kp_scale * g.kp * (target - q) - g.kd_scale * g.kd * dq);
  return tau.cwiseMax(-robot.torque_limit).cwiseMin(robot.torque_limit);
}

namespace {

std::size_t latency_steps(double latency_s, int physics_hz) {
  if (!(latency_s >= 0.0) || !std::isfinite(latency_s)) throw InvalidArgument("latency must be non-negative");
  if (physics_hz <= 0) throw InvalidArgument("physics rate must be positive");
  return static_cast<std::size_t>(std::lround(latency_s * physics_hz));
}

}  // namespace

LatencyQueue::LatencyQueue(double latency_s, int physics_hz)
    : delay_(latency_steps(latency_s, physics_hz)), queue_(delay_, JointVector::Zero()) {}

JointVector LatencyQueue::push(const JointVector& action) {
  queue_.push_back(action);
  JointVector out = queue_.front();
  queue_.pop_front();
  return out;
}

}  // namespace locogauge
