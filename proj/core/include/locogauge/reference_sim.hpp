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
 * reference_sim.hpp
 *
 * Built-in reference backend. This is not a physics engine: the base rides
 * the heightfield, its planar velocity follows the gait setpoint through a
 * first-order lag scaled by a traction efficiency, and joint torques come
 * from the PD law acting on a unit-inertia joint model. Everything that
 * matters for scoring is a closed-form, monotone function of terrain
 * difficulty, friction, and payload:
 *
 *   efficiency = clamp(1 - difficulty_slip * d - friction_slip * (1 - mu)
 *                        - payload_slip * max(payload, 0), 0.05, 1)
 *   steady velocity = engagement * efficiency * command
 *
 * Locomotion needs gait engagement: the action must carry the trot pattern
 * produced by TrotGait. A standing policy (zero actions) never moves.
 *
 * Falls are decided at reset from the capability profile of the terrain
 * kind: with u = capability_draw(seed), the episode is doomed when
 *   u >= pass_fraction[level - 1] * min(1, mu / full_traction_friction).
 * A doomed robot tips over once it has covered fall_trigger_distance or
 * after fall_trigger_time, whichever comes first. Because u depends only on
 * the seed, success for a fixed seed is monotone in the level whenever the
 * profile is non-increasing.
 */

#ifndef LOCOGAUGE_REFERENCE_SIM_HPP_
#define LOCOGAUGE_REFERENCE_SIM_HPP_

#include <array>
#include <optional>
#include <vector>

#include "locogauge/sim.hpp"

namespace locogauge {

struct CapabilityProfile {
  std::array<double, kNumLevels> pass_fraction{};

  /// Passes every level up to and including `level_cap`, fails above.
  static CapabilityProfile up_to(int level_cap);
  bool monotone() const;
};

struct ReferenceDynamics {
  std::array<CapabilityProfile, kNumTerrainKinds> capability = default_capability();

  double velocity_time_constant = 0.15;  // s
  double yaw_time_constant = 0.10;       // s
  double height_time_constant = 0.05;    // s, base height/attitude filter
  double difficulty_slip = 0.25;
  double friction_slip = 0.35;
  double payload_slip = 0.02;            // per kg
  double full_traction_friction = 0.3;
  double max_speed = 4.0;                // m/s
  double max_yaw_rate = 4.0;             // rad/s
  double engage_amplitude = 0.1;         // rad
  double joint_inertia = 0.02;           // kg m^2
  double payload_sag = 0.004;            // m per kg
  double fall_trigger_distance = 1.0;    // m
  double fall_trigger_time = 2.0;        // s
  double fall_roll_rate = 4.0;           // rad/s
  double fall_sink_rate = 0.3;           // m/s
  /// Base follows the setpoint exactly with a level attitude and the legs
  /// are not simulated (held at the default pose with zero torque).
  bool ideal = false;

  static std::array<CapabilityProfile, kNumTerrainKinds> default_capability();
  /// Passes every level with exact tracking.
  static ReferenceDynamics all_capable();
};

nlohmann::json to_json(const ReferenceDynamics& d);
/// Unknown keys are rejected. Missing keys keep their defaults.
ReferenceDynamics reference_dynamics_from_json(const nlohmann::json& j);

/// Per-leg trot generator. Thigh offsets follow A sin(phase) and calf
/// offsets A cos(phase) with diagonal legs in phase, so the pattern
/// amplitude is recoverable from a single action.
class TrotGait {
 public:
  explicit TrotGait(double frequency_hz = 2.0) : frequency_(frequency_hz) {}

  void reset() { phase_ = 0.0; }
  /// Offsets for the current phase, then advances the phase by dt.
  JointVector next(const Command& cmd, double dt);
  double phase() const { return phase_; }

  /// 0 for a zero command, otherwise 0.12 .. 0.20 rad with command magnitude.
  static double amplitude_for(const Command& cmd);
  /// Per-joint amplitude of the trot pattern contained in an action.
  static double pattern_amplitude(const JointVector& action);
  /// +1 for legs FL and RR, -1 for FR and RL.
  static double leg_sign(int leg);

 private:
  double frequency_;
  double phase_ = 0.0;
};

class ReferenceSim final : public Simulator {
 public:
  ReferenceSim(SimConfig config, RobotDescription robot,
               ReferenceDynamics dynamics = {});

  RobotState reset(const Heightfield& terrain, const DomainRandomization& dr,
                   std::uint64_t seed) override;
  RobotState step(const JointVector& action) override;
  void set_command(const Command& cmd) override { command_ = cmd; }
  bool fallen() const override { return fallen_; }
  const SimConfig& config() const override { return config_; }
  const RobotDescription& robot() const override { return robot_; }

  const ReferenceDynamics& dynamics() const { return dynamics_; }
  const RobotState& state() const { return state_; }
  /// Traction efficiency of the current episode.
  double efficiency() const { return efficiency_; }
  /// True when the capability profile dooms the current episode.
  bool doomed() const { return doomed_; }
  /// Uniform draw in [0, 1) that decides capability for a seed.
  static double capability_draw(std::uint64_t seed);
  /// Curriculum level a terrain is treated as (1 for flat or unknown terrain).
  static int terrain_level(const Heightfield& terrain);

 private:
  void physics_step(const JointVector& applied);
  void update_pose_from_terrain(bool filter);
  double ground_height_under_base() const;

  SimConfig config_;
  RobotDescription robot_;
  ReferenceDynamics dynamics_;

  std::optional<Heightfield> terrain_copy_;
  DomainRandomization dr_;
  PdGains gains_;
  std::optional<LatencyQueue> latency_;
  Command command_;
  RobotState state_;

  double efficiency_ = 1.0;
  double difficulty_ = 0.0;
  bool doomed_ = false;
  bool falling_ = false;
  bool fallen_ = false;
  int tilt_steps_ = 0;
  double time_ = 0.0;
  double yaw_ = 0.0;
  double roll_ = 0.0;
  double pitch_ = 0.0;
  double fall_roll_ = 0.0;
  double fall_sink_ = 0.0;
  Eigen::Vector2d planar_vel_ = Eigen::Vector2d::Zero();  // heading frame
  double yaw_rate_ = 0.0;
  Eigen::Vector2d spawn_ = Eigen::Vector2d::Zero();
  bool reset_called_ = false;
  int collision_steps_ = 0;
};

SimulatorFactory reference_sim_factory(SimConfig config, RobotDescription robot,
                                       ReferenceDynamics dynamics = {});

struct ReferenceGaitRun {
  std::vector<RobotState> states;  // one per control step
  bool fallen = false;
};

/// Drives the reference simulator with the trot generator at a constant
/// command for `duration_s`, stopping early on a fall.
ReferenceGaitRun run_reference_gait(ReferenceSim& sim, const Heightfield& terrain,
                                    const DomainRandomization& dr, std::uint64_t seed,
                                    const Command& cmd, double duration_s);

}  // namespace locogauge

#endif  // LOCOGAUGE_REFERENCE_SIM_HPP_
