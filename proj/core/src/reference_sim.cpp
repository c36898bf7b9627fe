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

#include "locogauge/reference_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace locogauge {
namespace {

// Foot footprint in the heading frame.
constexpr double kFootX = 0.19;
constexpr double kFootY = 0.14;
constexpr double kBodyHalfHeight = 0.10;
constexpr double kSpawnTolerance = 0.05;

double filter_gain(double dt, double time_constant) {
  return time_constant > 0.0 ? 1.0 - std::exp(-dt / time_constant) : 1.0;
}

Eigen::Matrix3d roll_pitch_matrix(double roll, double pitch) {
  return (Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

CapabilityProfile CapabilityProfile::up_to(int level_cap) {
  CapabilityProfile p;
  for (int i = 0; i < kNumLevels; ++i) p.pass_fraction[i] = (i + 1 <= level_cap) ? 1.0 : 0.0;
  return p;
}

bool CapabilityProfile::monotone() const {
  return std::is_sorted(pass_fraction.rbegin(), pass_fraction.rend());
}

std::array<CapabilityProfile, kNumTerrainKinds> ReferenceDynamics::default_capability() {
  std::array<CapabilityProfile, kNumTerrainKinds> caps;
  caps[static_cast<int>(TerrainKind::kFlat)] = CapabilityProfile::up_to(10);
  caps[static_cast<int>(TerrainKind::kWave)] = CapabilityProfile::up_to(8);
  caps[static_cast<int>(TerrainKind::kSlopeUp)] = CapabilityProfile::up_to(9);
  caps[static_cast<int>(TerrainKind::kSlopeDown)] = CapabilityProfile::up_to(10);
  caps[static_cast<int>(TerrainKind::kRoughSlope)] = CapabilityProfile::up_to(8);
  caps[static_cast<int>(TerrainKind::kStairsUp)] = CapabilityProfile::up_to(6);
  caps[static_cast<int>(TerrainKind::kStairsDown)] = CapabilityProfile::up_to(7);
  caps[static_cast<int>(TerrainKind::kObstacle)] = CapabilityProfile::up_to(5);
  return caps;
}

ReferenceDynamics ReferenceDynamics::all_capable() {
  ReferenceDynamics d;
  d.capability.fill(CapabilityProfile::up_to(kNumLevels));
  d.full_traction_friction = 0.1;
  d.ideal = true;
  return d;
}

nlohmann::json to_json(const ReferenceDynamics& d) {
  nlohmann::json caps = nlohmann::json::object();
  for (int k = 0; k < kNumTerrainKinds; ++k) {
    caps[std::string(to_string(static_cast<TerrainKind>(k)))] = d.capability[k].pass_fraction;
  }
  return {{"capability", caps},
          {"velocity_time_constant", d.velocity_time_constant},
          {"yaw_time_constant", d.yaw_time_constant},
          {"height_time_constant", d.height_time_constant},
          {"difficulty_slip", d.difficulty_slip},
          {"friction_slip", d.friction_slip},
          {"payload_slip", d.payload_slip},
          {"full_traction_friction", d.full_traction_friction},
          {"max_speed", d.max_speed},
          {"max_yaw_rate", d.max_yaw_rate},
          {"engage_amplitude", d.engage_amplitude},
          {"joint_inertia", d.joint_inertia},
          {"payload_sag", d.payload_sag},
          {"fall_trigger_distance", d.fall_trigger_distance},
          {"fall_trigger_time", d.fall_trigger_time},
          {"fall_roll_rate", d.fall_roll_rate},
          {"fall_sink_rate", d.fall_sink_rate},
          {"ideal", d.ideal}};
}

ReferenceDynamics reference_dynamics_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("reference: must be an object");
  ReferenceDynamics d;
  const nlohmann::json defaults = to_json(d);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw InvalidArgument(fmt::format("reference: unknown key '{}'", key));
  }
  if (j.contains("capability")) {
    for (const auto& [name, value] : j.at("capability").items()) {
      const auto kind = terrain_kind_from_string(name);
      CapabilityProfile p;
      if (value.is_number_integer()) {
        p = CapabilityProfile::up_to(value.get<int>());
      } else if (value.is_array() && value.size() == kNumLevels) {
        for (int i = 0; i < kNumLevels; ++i) p.pass_fraction[i] = value[i].get<double>();
      } else {
        throw InvalidArgument(fmt::format(
            "reference: capability.{} must be a level cap or 10 pass fractions", name));
      }
      for (double f : p.pass_fraction) {
        if (!(f >= 0.0 && f <= 1.0)) {
          throw InvalidArgument(fmt::format("reference: capability.{} fraction outside [0, 1]", name));
        }
      }
      d.capability[static_cast<int>(kind)] = p;
    }
  }
  auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  num("velocity_time_constant", d.velocity_time_constant);
  num("yaw_time_constant", d.yaw_time_constant);
  num("height_time_constant", d.height_time_constant);
  num("difficulty_slip", d.difficulty_slip);
  num("friction_slip", d.friction_slip);
  num("payload_slip", d.payload_slip);
  num("full_traction_friction", d.full_traction_friction);
  num("max_speed", d.max_speed);
  num("max_yaw_rate", d.max_yaw_rate);
  num("engage_amplitude", d.engage_amplitude);
  num("joint_inertia", d.joint_inertia);
  num("payload_sag", d.payload_sag);
  num("fall_trigger_distance", d.fall_trigger_distance);
  num("fall_trigger_time", d.fall_trigger_time);
  num("fall_roll_rate", d.fall_roll_rate);
  num("fall_sink_rate", d.fall_sink_rate);
  if (j.contains("ideal")) d.ideal = j.at("ideal").get<bool>();
  if (!(d.joint_inertia > 0.0) || !(d.engage_amplitude > 0.0) ||
      !(d.full_traction_friction > 0.0) || !(d.max_speed > 0.0)) {
    throw InvalidArgument("reference: inertia, engagement, traction and speed limits must be positive");
  }
  return d;
}

// --- TrotGait -------------------------------------------------------------

double TrotGait::leg_sign(int leg) { return (leg == 0 || leg == 3) ? 1.0 : -1.0; }

double TrotGait::amplitude_for(const Command& cmd) {
  const double magnitude = std::max(cmd.linear_norm(), 0.5 * std::abs(cmd.wz));
  if (magnitude < 1e-9) return 0.0;
  return 0.12 + 0.08 * std::min(1.0, magnitude / 2.0);
}

double TrotGait::pattern_amplitude(const JointVector& action) {
  double swing = 0.0;
  double lift = 0.0;
  for (int leg = 0; leg < 4; ++leg) {
    swing += leg_sign(leg) * action[joint_index(leg, kThigh)];
    lift += leg_sign(leg) * action[joint_index(leg, kCalf)];
  }
  // A sin / A cos over four legs sum to 4A sin / 4A cos.
  return std::hypot(swing, lift) / 4.0;
}

JointVector TrotGait::next(const Command& cmd, double dt) {
  const double a = amplitude_for(cmd);
  JointVector out = JointVector::Zero();
  if (a > 0.0) {
    for (int leg = 0; leg < 4; ++leg) {
      out[joint_index(leg, kThigh)] = leg_sign(leg) * a * std::sin(phase_);
      out[joint_index(leg, kCalf)] = leg_sign(leg) * a * std::cos(phase_);
    }
    phase_ = std::fmod(phase_ + 2.0 * std::numbers::pi * frequency_ * dt,
                       2.0 * std::numbers::pi);
  }
  return out;
}

// --- ReferenceSim -----------------------------------------------------------

ReferenceSim::ReferenceSim(SimConfig config, RobotDescription robot,
                           ReferenceDynamics dynamics)
    : config_(std::move(config)), robot_(std::move(robot)), dynamics_(std::move(dynamics)) {
  validate(config_);
}

double ReferenceSim::capability_draw(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "capability"));
  return rng.uniform();
}

int ReferenceSim::terrain_level(const Heightfield& terrain) {
  if (!terrain.spec() || terrain.spec()->kind == TerrainKind::kFlat) return 1;
  const int level = static_cast<int>(std::lround(terrain.spec()->difficulty * 10.0));
  return std::clamp(level, 1, kNumLevels);
}

double ReferenceSim::ground_height_under_base() const {
  return terrain_copy_->height_clamped(state_.base_position.x(), state_.base_position.y());
}

void ReferenceSim::update_pose_from_terrain(bool filter) {
  const Heightfield& hf = *terrain_copy_;
  const double c = std::cos(yaw_), s = std::sin(yaw_);
  const Eigen::Vector2d base = state_.base_position.head<2>();
  auto foot = [&](double lx, double ly) {
    return hf.height_clamped(base.x() + c * lx - s * ly, base.y() + s * lx + c * ly);
  };
  const double fl = foot(kFootX, kFootY), fr = foot(kFootX, -kFootY);
  const double rl = foot(-kFootX, kFootY), rr = foot(-kFootX, -kFootY);
  const double ground = 0.25 * (fl + fr + rl + rr);
  const double nominal = robot_.nominal_base_height -
                         dynamics_.payload_sag * std::max(dr_.payload_mass, 0.0);
  const double h = robot_.nominal_base_height;
  double target_z = ground + nominal;
  // Terrain attitude plus the static lean from the centre-of-mass offset.
  double target_pitch = std::atan2(0.5 * (rl + rr) - 0.5 * (fl + fr), 2.0 * kFootX) +
                        std::atan(dr_.com_offset.x() / h);
  double target_roll = std::atan2(0.5 * (fl + rl) - 0.5 * (fr + rr), 2.0 * kFootY) -
                       std::atan(dr_.com_offset.y() / h);
  if (dynamics_.ideal) target_pitch = target_roll = 0.0;
  const double dt = config_.physics_dt();
  if (filter) {
    const double k = filter_gain(dt, dynamics_.height_time_constant);
    state_.base_position.z() += k * (target_z - state_.base_position.z());
    pitch_ += k * (target_pitch - pitch_);
    roll_ += k * (target_roll - roll_);
  } else {
    state_.base_position.z() = target_z;
    pitch_ = target_pitch;
    roll_ = target_roll;
  }
}

RobotState ReferenceSim::reset(const Heightfield& terrain, const DomainRandomization& dr,
                               std::uint64_t seed) {
  validate(dr);
  terrain_copy_.emplace(terrain);
  dr_ = dr;
  gains_ = PdGains{config_.kp, config_.kd, dr.kp_scale, dr.kd_scale,
                   dr.actuator_strength_scale, dr.actuator_offset};
  latency_.emplace(dr.control_latency, config_.physics_hz);
  command_ = Command{};

  const auto& spec = terrain.spec();
  const TerrainKind kind = spec ? spec->kind : TerrainKind::kFlat;
  difficulty_ = (spec && kind != TerrainKind::kFlat) ? spec->difficulty : 0.0;
  efficiency_ = std::clamp(1.0 - dynamics_.difficulty_slip * difficulty_ -
                               dynamics_.friction_slip * std::max(0.0, 1.0 - dr.friction) -
                               dynamics_.payload_slip * std::max(0.0, dr.payload_mass),
                           0.05, 1.0);
  if (dynamics_.ideal) efficiency_ = 1.0;

  const int level = terrain_level(terrain);
  const double traction = std::min(1.0, dr.friction / dynamics_.full_traction_friction);
  const double pass = dynamics_.capability[static_cast<int>(kind)].pass_fraction[level - 1] * traction;
  doomed_ = capability_draw(seed) >= pass;

  falling_ = fallen_ = false;
  tilt_steps_ = 0;
  collision_steps_ = 0;
  time_ = 0.0;
  yaw_ = roll_ = pitch_ = 0.0;
  fall_roll_ = fall_sink_ = 0.0;
  planar_vel_.setZero();
  yaw_rate_ = 0.0;

  state_ = RobotState{};
  spawn_ = terrain.spawn_point();
  state_.base_position << spawn_.x(), spawn_.y(), 0.0;
  state_.q = robot_.default_pose;
  state_.foot_contact.fill(true);
  update_pose_from_terrain(false);

  // Reject spawns where terrain pokes into the body.
  const double body_bottom = state_.base_position.z() - kBodyHalfHeight;
  for (double lx = -0.3; lx <= 0.3 + 1e-9; lx += 0.1) {
    for (double ly = -0.15; ly <= 0.15 + 1e-9; ly += 0.05) {
      const double hgt = terrain.height_clamped(spawn_.x() + lx, spawn_.y() + ly);
      if (hgt > body_bottom + kSpawnTolerance) {
        throw Error(fmt::format("reference sim: spawn collides with terrain ({:.3f} m above body)",
                                hgt - body_bottom));
      }
    }
  }

  const Eigen::Matrix3d r = roll_pitch_matrix(roll_, pitch_);
  state_.base_orientation = Eigen::Quaterniond(
      Eigen::AngleAxisd(yaw_, Eigen::Vector3d::UnitZ()) * Eigen::Quaterniond(r));
  state_.base_orientation.normalize();
  state_.projected_gravity = r.transpose() * Eigen::Vector3d(0.0, 0.0, -1.0);
  reset_called_ = true;
  return state_;
}

void ReferenceSim::physics_step(const JointVector& applied) {
  const double dt = config_.physics_dt();
  const auto& d = dynamics_;

  // Joints.
  if (d.ideal) {
    state_.q = robot_.default_pose;
    state_.dq.setZero();
    state_.tau.setZero();
  } else {
    const JointVector tau = pd_torque(applied, state_.q, state_.dq, robot_, gains_);
    state_.dq += dt * tau / d.joint_inertia;
    state_.q += dt * state_.dq;
    for (int i = 0; i < kNumJoints; ++i) {
      if (state_.q[i] < robot_.hard_lower[i] || state_.q[i] > robot_.hard_upper[i]) {
        state_.q[i] = std::clamp(state_.q[i], robot_.hard_lower[i], robot_.hard_upper[i]);
        state_.dq[i] = 0.0;
      }
    }
    state_.tau = tau;
  }

  // Base planar motion.
  const double engagement =
      d.ideal ? 1.0 : std::min(1.0, TrotGait::pattern_amplitude(applied) / d.engage_amplitude);
  const double drive = falling_ ? 0.0 : engagement * efficiency_;
  Eigen::Vector2d target_vel(drive * command_.vx, drive * command_.vy);
  if (target_vel.norm() > d.max_speed) target_vel *= d.max_speed / target_vel.norm();
  const double target_yaw_rate = std::clamp(drive * command_.wz, -d.max_yaw_rate, d.max_yaw_rate);
  if (d.ideal) {
    planar_vel_ = target_vel;
    yaw_rate_ = target_yaw_rate;
  } else {
    planar_vel_ += filter_gain(dt, d.velocity_time_constant) * (target_vel - planar_vel_);
    yaw_rate_ += filter_gain(dt, d.yaw_time_constant) * (target_yaw_rate - yaw_rate_);
  }
  const double c = std::cos(yaw_), s = std::sin(yaw_);
  state_.base_position.x() += dt * (c * planar_vel_.x() - s * planar_vel_.y());
  state_.base_position.y() += dt * (s * planar_vel_.x() + c * planar_vel_.y());
  yaw_ = std::remainder(yaw_ + dt * yaw_rate_, 2.0 * std::numbers::pi);

  const double prev_z = state_.base_position.z();
  const double prev_roll = roll_ + fall_roll_;
  const double prev_pitch = pitch_;
  update_pose_from_terrain(true);

  time_ += dt;
  if (doomed_ && !falling_) {
    const double travelled = (state_.base_position.head<2>() - spawn_).norm();
    if (travelled >= d.fall_trigger_distance || time_ >= d.fall_trigger_time) falling_ = true;
  }
  if (falling_) {
    fall_roll_ += dt * d.fall_roll_rate;
    fall_sink_ += dt * d.fall_sink_rate;
  }
  state_.base_position.z() -= falling_ ? dt * d.fall_sink_rate : 0.0;

  const double roll = roll_ + fall_roll_;
  const Eigen::Matrix3d r = roll_pitch_matrix(roll, pitch_);
  const Eigen::Vector3d heading_vel(planar_vel_.x(), planar_vel_.y(),
                                    (state_.base_position.z() - prev_z) / dt);
  state_.lin_vel = r.transpose() * heading_vel;
  state_.ang_vel = r.transpose() * Eigen::Vector3d((roll - prev_roll) / dt,
                                                   (pitch_ - prev_pitch) / dt, yaw_rate_);
  state_.base_orientation = Eigen::Quaterniond(
      Eigen::AngleAxisd(yaw_, Eigen::Vector3d::UnitZ()) * Eigen::Quaterniond(r));
  state_.base_orientation.normalize();
  state_.projected_gravity = r.transpose() * Eigen::Vector3d(0.0, 0.0, -1.0);

  for (int leg = 0; leg < 4; ++leg) {
    const double lift = TrotGait::leg_sign(leg) * applied[joint_index(leg, kCalf)];
    state_.foot_contact[leg] = d.ideal || lift <= 0.5 * d.engage_amplitude;
  }

  const double ground = ground_height_under_base();
  if (state_.base_position.z() - kBodyHalfHeight < ground) ++collision_steps_;

  const bool low = state_.base_position.z() - ground < config_.fall.min_height;
  const bool tilted = std::abs(roll) > config_.fall.max_tilt ||
                      std::abs(pitch_) > config_.fall.max_tilt;
  tilt_steps_ = (low || tilted) ? tilt_steps_ + 1 : 0;
  const int hold = static_cast<int>(std::lround(config_.fall.hold_time * config_.physics_hz));
  if (tilt_steps_ >= std::max(hold, 1)) fallen_ = true;
}

RobotState ReferenceSim::step(const JointVector& action) {
  if (!reset_called_) throw Error("reference sim: step called before reset");
  if (!action.allFinite()) throw InvalidArgument("reference sim: non-finite action");
  const JointVector clipped =
      action.cwiseMax(-config_.action_clip).cwiseMin(config_.action_clip);
  collision_steps_ = 0;
  for (int i = 0; i < config_.substeps(); ++i) physics_step(latency_->push(clipped));
  state_.collisions = collision_steps_ > 0 ? 1 : 0;
  return state_;
}

SimulatorFactory reference_sim_factory(SimConfig config, RobotDescription robot,
                                       ReferenceDynamics dynamics) {
  return [config = std::move(config), robot = std::move(robot),
          dynamics = std::move(dynamics)]() -> std::unique_ptr<Simulator> {
    return std::make_unique<ReferenceSim>(config, robot, dynamics);
  };
}

ReferenceGaitRun run_reference_gait(ReferenceSim& sim, const Heightfield& terrain,
                                    const DomainRandomization& dr, std::uint64_t seed,
                                    const Command& cmd, double duration_s) {
  ReferenceGaitRun run;
  sim.reset(terrain, dr, seed);
  sim.set_command(cmd);
  TrotGait gait;
  const double dt = sim.config().control_dt();
  const int steps = static_cast<int>(std::lround(duration_s / dt));
  for (int i = 0; i < steps; ++i) {
    run.states.push_back(sim.step(gait.next(cmd, dt)));
    if (sim.fallen()) {
      run.fallen = true;
      break;
    }
  }
  return run;
}

}  // namespace locogauge
