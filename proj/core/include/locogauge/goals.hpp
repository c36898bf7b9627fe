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
 * goals.hpp
 *
 * Evaluation command schedules and the command-side training math: per
 * terrain command limits, the staged command curriculum, extreme and
 * dynamic command sampling, and the velocity-dependent tracking precision.
 */

#ifndef LOCOGAUGE_GOALS_HPP_
#define LOCOGAUGE_GOALS_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "locogauge/sim.hpp"
#include "locogauge/terrain.hpp"
#include "locogauge/util.hpp"

namespace locogauge {

struct CommandLimits {
  double vx = 2.0;
  double vy = 1.0;
  double wz = 2.0;

  bool operator==(const CommandLimits&) const = default;
};

/// Training command limits of a terrain (rough slope uses the slope row).
CommandLimits command_limits(TerrainKind kind);
/// Maximum tracking coefficient of a terrain.
double sigma_max(TerrainKind kind);

enum class GoalKind { kMaxVelocity, kDiagonalVelocity, kTargetPosition };
inline constexpr int kNumGoalKinds = 3;
std::string_view to_string(GoalKind kind);
GoalKind goal_kind_from_string(std::string_view name);
/// 6, 8 and 1.
int max_trials(GoalKind kind);

struct GoalOptions {
  double command_duration = 3.0;  // s
  double stop_duration = 1.0;     // s
  double target_distance = 4.5;   // m ahead of spawn along +x
  double kp = 1.0;
  double timeout = 20.0;          // s
  double reach_tolerance = 0.3;   // m
  double success_distance = 4.0;  // m, half the tile length
  /// Optional cap on linear command magnitude for every goal.
  std::optional<double> linear_cap;

  bool operator==(const GoalOptions&) const = default;
};

nlohmann::json to_json(const GoalOptions& o);
GoalOptions goal_options_from_json(const nlohmann::json& j);

struct GoalSegment {
  int trial = 0;
  Command command;        // ignored for position-control segments
  double duration = 0.0;  // s; upper bound for position-control segments
  bool stop = false;      // braking segment after a directional command
  bool position_control = false;
};

struct GoalSchedule {
  GoalKind kind = GoalKind::kMaxVelocity;
  int max_trials = 0;
  std::vector<GoalSegment> segments;
  Eigen::Vector2d target_offset = Eigen::Vector2d::Zero();  // from spawn
  double kp = 1.0;
  double reach_tolerance = 0.3;
  CommandLimits limits;

  /// Segments of one trial, in order.
  std::vector<GoalSegment> trial(int index) const;
};

/// max_velocity: +-vx, +-vy, +-wz at the limit, each followed by a stop.
/// diagonal_velocity: (+-vx, +-wz) and (+-vx, +-vy), one segment each.
/// target_position: one position-control segment bounded by the timeout.
GoalSchedule build_goal(GoalKind kind, const CommandLimits& limits,
                        const GoalOptions& options = {});

nlohmann::json to_json(const GoalSchedule& s);
GoalSchedule goal_schedule_from_json(const nlohmann::json& j);

/// Proportional waypoint controller. The body-frame position error scaled by
/// kp drives the linear command (attenuated by max(0, cos(heading error))),
/// the heading error scaled by kp drives the yaw rate; all clipped to limits.
Command target_position_controller(const Pose2& current, const Eigen::Vector2d& target,
                                   double kp, const CommandLimits& limits);

struct GoalOutcome {
  double displacement = 0.0;  // m, final horizontal distance from the start
  bool fallen = false;
  bool timed_out = false;
};

/// Passes iff displacement >= success_distance without a fall or timeout.
bool success_check(const GoalOutcome& outcome, double success_distance);

enum class SigmaMode {
  kInterpolated,  // sigma at v_min rising linearly to sigma_max at v_max
  kVerbatim,      // sigma (v - v_min) + sigma_max (v_max - v)
};

struct VelocityBand {
  double v_min = 0.5;
  double v_max = 1.5;
};

inline constexpr double kBaseSigma = 0.25;
inline constexpr VelocityBand kLinearSigmaBand{0.5, 1.5};
inline constexpr VelocityBand kAngularSigmaBand{1.0, 2.0};

/// Velocity-dependent coefficient before level blending.
double sigma_vel(double sigma, double sigma_max, double v, const VelocityBand& band,
                 SigmaMode mode = SigmaMode::kInterpolated);
/// sigma + min(e^(L/10) - 1, 1) (sigma_vel - sigma).
double dynamic_sigma(double sigma, double sigma_max, double v, const VelocityBand& band,
                     double level, SigmaMode mode = SigmaMode::kInterpolated);

enum class CurriculumStage { kInitial, kIntermediate, kAdvanced };
std::string_view to_string(CurriculumStage stage);
CurriculumStage stage_for_step(long long training_step);
CommandLimits stage_limits(CurriculumStage stage);

struct SamplingContext {
  CurriculumStage stage = CurriculumStage::kInitial;
  TerrainKind terrain = TerrainKind::kFlat;
  std::vector<Command> prior;  // commands already issued this episode
  double resample_interval = 10.0;  // T_r, s
  double episode_length = 20.0;     // T_ep, s
};

/// Stage limits clipped by the terrain limits.
CommandLimits effective_limits(const SamplingContext& ctx);

/// Width of the excluded band (-v*, v*) for the next linear command.
double exclusion_speed(const std::vector<Command>& prior, double resample_interval,
                       double episode_length, const CommandLimits& limits);
/// Duration of a stationary command.
double zero_duration(const std::vector<Command>& prior, double resample_interval,
                     double episode_length, const CommandLimits& limits);

enum class SampleKind { kStationary, kExtreme, kPivot, kUniform };

struct SampledCommand {
  Command command;
  SampleKind kind = SampleKind::kUniform;
  double v_star = 0.0;
  std::optional<double> duration;  // set for stationary commands
};

/// Linear commands below this magnitude are zeroed when no band is excluded.
inline constexpr double kSmallCommand = 0.2;

/// 10% stationary, 20% one of the eight extreme sign combinations; otherwise
/// v_x is uniform outside (-v*, v*) with v_y and w_z uniform. When v* = 0 and
/// the linear part is below kSmallCommand it is zeroed, and then with 20%
/// probability the yaw rate goes to its limit. Throws InvalidArgument once
/// the episode has no time left for another command.
SampledCommand sample_training_command(Rng& rng, const SamplingContext& ctx);

}  // namespace locogauge

#endif  // LOCOGAUGE_GOALS_HPP_
