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

/*
 * sim.hpp
 *
 * Simulator contract shared by the reference proxy and external backends,
 * together with the pieces applied uniformly on the engine side: domain
 * randomization parameters, observation assembly and noise, the PD law, and
 * the actuation latency queue.
 */

#ifndef LOCOGAUGE_SIM_HPP_
#define LOCOGAUGE_SIM_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "locogauge/robot.hpp"
#include "locogauge/terrain.hpp"
#include "locogauge/util.hpp"

namespace locogauge {

/// Body-frame velocity command.
struct Command {
  double vx = 0.0;  // m/s
  double vy = 0.0;  // m/s
  double wz = 0.0;  // rad/s

  bool operator==(const Command&) const = default;
  double linear_norm() const;
};

struct DomainRandomization {
  double friction = 1.0;
  double payload_mass = 0.0;       // kg
  double link_mass_scale = 1.0;
  Eigen::Vector3d com_offset = Eigen::Vector3d::Zero();  // m
  double restitution = 0.0;
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  double actuator_strength_scale = 1.0;
  double actuator_offset = 0.0;    // rad
  double control_latency = 0.0;    // s

  bool operator==(const DomainRandomization&) const = default;
};

/// Throws InvalidArgument when a field leaves its admissible range (the
/// union of the training ranges and the evaluation friction sweep).
void validate(const DomainRandomization& dr);
/// Draws every field uniformly from its training range.
DomainRandomization sample_training_dr(Rng& rng);
nlohmann::json to_json(const DomainRandomization& dr);
DomainRandomization dr_from_json(const nlohmann::json& j);

struct NamedDr {
  std::string label;
  DomainRandomization dr;
};
/// Nine friction presets 0.2 .. 1.0, nominal elsewhere.
std::vector<NamedDr> default_dr_set();
/// Ten-point friction sweep 0.1 .. 1.0.
std::vector<NamedDr> friction_sweep_dr_set();

struct NoiseModel {
  bool enabled = true;
  double ang_vel = 0.05;    // rad/s
  double gravity = 0.025;
  double joint_pos = 0.01;  // rad
  double joint_vel = 1.5;   // rad/s
};

struct FallDetection {
  double min_height = 0.12;  // m above local terrain
  double max_tilt = 1.0;     // rad, roll or pitch
  double hold_time = 0.1;    // s
};

struct SimConfig {
  int control_hz = 50;
  int physics_hz = 200;
  double kp = 20.0;
  double kd = 0.5;
  double action_clip = 4.8;
  double episode_timeout = 20.0;
  NoiseModel noise;
  FallDetection fall;

  int substeps() const { return physics_hz / control_hz; }
  double control_dt() const { return 1.0 / control_hz; }
  double physics_dt() const { return 1.0 / physics_hz; }
};

/// Throws InvalidArgument unless physics_hz is a positive multiple of control_hz.
void validate(const SimConfig& cfg);

struct RobotState {
  Eigen::Vector3d base_position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond base_orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d lin_vel = Eigen::Vector3d::Zero();  // body frame
  Eigen::Vector3d ang_vel = Eigen::Vector3d::Zero();  // body frame
  JointVector q = JointVector::Zero();
  JointVector dq = JointVector::Zero();
  JointVector tau = JointVector::Zero();
  std::array<bool, kNumFeet> foot_contact{};
  Eigen::Vector3d projected_gravity{0.0, 0.0, -1.0};
  int collisions = 0;  // body/terrain contact events during the last control step
};

/// Checks finiteness, quaternion and gravity normalisation (1e-6). Throws
/// InvalidArgument naming the violated invariant.
void validate_state(const RobotState& s);
nlohmann::json to_json(const RobotState& s);
/// Parses without normalising anything; callers validate separately.
RobotState state_from_json(const nlohmann::json& j);

/// Roll, pitch, yaw (ZYX convention) of a unit quaternion.
Eigen::Vector3d roll_pitch_yaw(const Eigen::Quaterniond& q);

inline constexpr int kObsDim = 45;
using Observation = Eigen::Matrix<double, kObsDim, 1>;

namespace obs_layout {
inline constexpr int kAngVel = 0;
inline constexpr int kGravity = 3;
inline constexpr int kJointPos = 6;
inline constexpr int kJointVel = 18;
inline constexpr int kCommand = 30;
inline constexpr int kPrevAction = 33;
}  // namespace obs_layout

/// [omega(3), g_proj(3), q - q_default(12), dq(12), command(3), prev action(12)].
/// Noise is uniform per channel group and only applied when `noise_rng` is
/// non-null and the model is enabled.
Observation observe(const RobotState& state, const Command& cmd,
                    const JointVector& prev_action, const RobotDescription& robot,
                    const NoiseModel& noise, Rng* noise_rng);

struct PdGains {
  double kp = 20.0;
  double kd = 0.5;
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  double strength = 1.0;
  double offset = 0.0;
};

/// tau = strength * (kp_scale kp (q* - q) - kd_scale kd dq), with
/// q* = default + action + offset, clipped to the torque limits.
JointVector pd_torque(const JointVector& action, const JointVector& q,
                      const JointVector& dq, const RobotDescription& robot,
                      const PdGains& gains);

/// FIFO delaying actions by round(latency * physics_hz) physics steps. The
/// queue starts filled with zero actions.
class LatencyQueue {
 public:
  LatencyQueue(double latency_s, int physics_hz);
  /// Pushes the action commanded for this physics step and returns the one
  /// that takes effect.
  JointVector push(const JointVector& action);
  std::size_t delay_steps() const { return delay_; }

 private:
  std::size_t delay_;
  std::deque<JointVector> queue_;
};

/// Simulator backend contract. One instance is owned by one worker.
class Simulator {
 public:
  virtual ~Simulator() = default;

  virtual RobotState reset(const Heightfield& terrain, const DomainRandomization& dr,
                           std::uint64_t seed) = 0;
  /// One control step (physics_hz / control_hz substeps).
  virtual RobotState step(const JointVector& action) = 0;
  /// Velocity setpoint for backends with a built-in gait generator. Physics
  /// backends ignore it.
  virtual void set_command(const Command& cmd) { (void)cmd; }
  virtual bool fallen() const = 0;
  virtual const SimConfig& config() const = 0;
  virtual const RobotDescription& robot() const = 0;
};

using SimulatorFactory = std::function<std::unique_ptr<Simulator>()>;

}  // namespace locogauge

#endif  // LOCOGAUGE_SIM_HPP_
