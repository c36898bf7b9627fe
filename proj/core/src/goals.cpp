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

#include "locogauge/goals.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace locogauge {
namespace {

Command capped(Command c, const std::optional<double>& cap) {
  if (cap) {
    c.vx = std::clamp(c.vx, -*cap, *cap);
    c.vy = std::clamp(c.vy, -*cap, *cap);
  }
  return c;
}

nlohmann::json command_json(const Command& c) { return {c.vx, c.vy, c.wz}; }

Command command_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("goal: command must be [vx, vy, wz]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

double signed_pick(Rng& rng, double magnitude) { return rng.bernoulli(0.5) ? magnitude : -magnitude; }

}  // namespace

CommandLimits command_limits(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::kFlat: return {2.0, 1.0, 2.0};
    case TerrainKind::kWave:
    case TerrainKind::kSlopeUp:
    case TerrainKind::kSlopeDown:
    case TerrainKind::kRoughSlope: return {1.5, 1.0, 1.5};
    case TerrainKind::kStairsUp:
    case TerrainKind::kStairsDown:
    case TerrainKind::kObstacle: return {1.0, 1.0, 1.5};
  }
  throw InvalidArgument("command limits: unknown terrain");
}

double sigma_max(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::kFlat:
    case TerrainKind::kSlopeUp:
    case TerrainKind::kSlopeDown:
    case TerrainKind::kRoughSlope: return 1.0 / 4.0;
    case TerrainKind::kWave: return 5.0 / 12.0;
    case TerrainKind::kStairsUp:
    case TerrainKind::kStairsDown: return 1.0 / 2.0;
    case TerrainKind::kObstacle: return 3.0 / 4.0;
  }
  throw InvalidArgument("sigma_max: unknown terrain");
}

std::string_view to_string(GoalKind kind) {
  switch (kind) {
    case GoalKind::kMaxVelocity: return "max_velocity";
    case GoalKind::kDiagonalVelocity: return "diagonal_velocity";
    case GoalKind::kTargetPosition: return "target_position";
  }
  return "?";
}

GoalKind goal_kind_from_string(std::string_view name) {
  if (name == "max_velocity") return GoalKind::kMaxVelocity;
  if (name == "diagonal_velocity") return GoalKind::kDiagonalVelocity;
  if (name == "target_position") return GoalKind::kTargetPosition;
  throw InvalidArgument(fmt::format("unknown goal '{}'", name));
}

int max_trials(GoalKind kind) {
  switch (kind) {
    case GoalKind::kMaxVelocity: return 6;
    case GoalKind::kDiagonalVelocity: return 8;
    case GoalKind::kTargetPosition: return 1;
  }
  return 0;
}

nlohmann::json to_json(const GoalOptions& o) {
  nlohmann::json j{{"command_duration", o.command_duration},
                   {"stop_duration", o.stop_duration},
                   {"target_distance", o.target_distance},
                   {"kp", o.kp},
                   {"timeout", o.timeout},
                   {"reach_tolerance", o.reach_tolerance},
                   {"success_distance", o.success_distance},
                   {"linear_cap", nullptr}};
  if (o.linear_cap) j["linear_cap"] = *o.linear_cap;
  return j;
}

GoalOptions goal_options_from_json(const nlohmann::json& j) {
  GoalOptions o;
  const nlohmann::json defaults = to_json(o);
  if (!j.is_object()) throw InvalidArgument("goals: must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw InvalidArgument(fmt::format("goals: unknown key '{}'", key));
  }
  auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
    if (!(field > 0.0)) throw InvalidArgument(fmt::format("goals: {} must be positive", key));
  };
  num("command_duration", o.command_duration);
  num("stop_duration", o.stop_duration);
  num("target_distance", o.target_distance);
  num("kp", o.kp);
  num("timeout", o.timeout);
  num("reach_tolerance", o.reach_tolerance);
  num("success_distance", o.success_distance);
  if (j.contains("linear_cap") && !j.at("linear_cap").is_null()) {
    o.linear_cap = j.at("linear_cap").get<double>();
    if (!(*o.linear_cap > 0.0)) throw InvalidArgument("goals: linear_cap must be positive");
  }
  return o;
}

std::vector<GoalSegment> GoalSchedule::trial(int index) const {
  std::vector<GoalSegment> out;
  for (const auto& s : segments) {
    if (s.trial == index) out.push_back(s);
  }
  return out;
}

GoalSchedule build_goal(GoalKind kind, const CommandLimits& limits, const GoalOptions& options) {
  GoalSchedule s;
  s.kind = kind;
  s.max_trials = max_trials(kind);
  s.kp = options.kp;
  s.reach_tolerance = options.reach_tolerance;
  s.limits = limits;
  if (options.linear_cap) {
    s.limits.vx = std::min(s.limits.vx, *options.linear_cap);
    s.limits.vy = std::min(s.limits.vy, *options.linear_cap);
  }
  const auto& l = s.limits;
  switch (kind) {
    case GoalKind::kMaxVelocity: {
      const Command directions[] = {{l.vx, 0, 0}, {-l.vx, 0, 0}, {0, l.vy, 0},
                                    {0, -l.vy, 0}, {0, 0, l.wz}, {0, 0, -l.wz}};
      int trial = 0;
      for (const auto& c : directions) {
        s.segments.push_back({trial, capped(c, options.linear_cap), options.command_duration, false, false});
        s.segments.push_back({trial, Command{}, options.stop_duration, true, false});
        ++trial;
      }
      break;
    }
    case GoalKind::kDiagonalVelocity: {
      int trial = 0;
      for (double sx : {1.0, -1.0}) {
        for (double sw : {1.0, -1.0}) {
          s.segments.push_back({trial++, {sx * l.vx, 0.0, sw * l.wz}, options.command_duration, false, false});
        }
      }
      for (double sx : {1.0, -1.0}) {
        for (double sy : {1.0, -1.0}) {
          s.segments.push_back({trial++, {sx * l.vx, sy * l.vy, 0.0}, options.command_duration, false, false});
        }
      }
      break;
    }
    case GoalKind::kTargetPosition:
      s.target_offset = Eigen::Vector2d(options.target_distance, 0.0);
      s.segments.push_back({0, Command{}, options.timeout, false, true});
      break;
  }
  return s;
}

nlohmann::json to_json(const GoalSchedule& s) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& g : s.segments) {
    segs.push_back({{"trial", g.trial},
                    {"command", command_json(g.command)},
                    {"duration", g.duration},
                    {"stop", g.stop},
                    {"position_control", g.position_control}});
  }
  return {{"kind", to_string(s.kind)},
          {"max_trials", s.max_trials},
          {"segments", segs},
          {"target_offset", {s.target_offset.x(), s.target_offset.y()}},
          {"kp", s.kp},
          {"reach_tolerance", s.reach_tolerance},
          {"limits", command_json({s.limits.vx, s.limits.vy, s.limits.wz})}};
}

GoalSchedule goal_schedule_from_json(const nlohmann::json& j) {
  try {
    GoalSchedule s;
    s.kind = goal_kind_from_string(j.at("kind").get<std::string>());
    s.max_trials = j.at("max_trials").get<int>();
    for (const auto& g : j.at("segments")) {
      s.segments.push_back({g.at("trial").get<int>(), command_from(g.at("command")),
                            g.at("duration").get<double>(), g.at("stop").get<bool>(),
                            g.at("position_control").get<bool>()});
    }
    const auto& t = j.at("target_offset");
    s.target_offset = Eigen::Vector2d(t.at(0).get<double>(), t.at(1).get<double>());
    s.kp = j.at("kp").get<double>();
    s.reach_tolerance = j.at("reach_tolerance").get<double>();
    const Command lim = command_from(j.at("limits"));
    s.limits = {lim.vx, lim.vy, lim.wz};
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("goal schedule: {}", e.what()));
  }
}

Command target_position_controller(const Pose2& current, const Eigen::Vector2d& target,
                                   double kp, const CommandLimits& limits) {
  const double dx = target.x() - current.x;
  const double dy = target.y() - current.y;
  const double c = std::cos(current.yaw), s = std::sin(current.yaw);
  const double ex = c * dx + s * dy;
  const double ey = -s * dx + c * dy;
  const double heading_error = (ex == 0.0 && ey == 0.0) ? 0.0 : std::atan2(ey, ex);
  const double align = std::max(0.0, std::cos(heading_error));
  return {std::clamp(kp * ex * align, -limits.vx, limits.vx),
          std::clamp(kp * ey * align, -limits.vy, limits.vy),
          std::clamp(kp * heading_error, -limits.wz, limits.wz)};
}

bool success_check(const GoalOutcome& outcome, double success_distance) {
  return !outcome.fallen && !outcome.timed_out && outcome.displacement >= success_distance;
}

double sigma_vel(double sigma, double sigma_max, double v, const VelocityBand& band,
                 SigmaMode mode) {
  if (!(band.v_max > band.v_min)) throw InvalidArgument("sigma: degenerate velocity band");
  if (v < band.v_min) return sigma;
  if (v >= band.v_max) return sigma_max;
  if (mode == SigmaMode::kVerbatim) return sigma * (v - band.v_min) + sigma_max * (band.v_max - v);
  return (sigma * (band.v_max - v) + sigma_max * (v - band.v_min)) / (band.v_max - band.v_min);
}

double dynamic_sigma(double sigma, double sigma_max, double v, const VelocityBand& band,
                     double level, SigmaMode mode) {
  if (v < 0.0) throw InvalidArgument("sigma: negative speed");
  const double blend = std::min(std::exp(level / 10.0) - 1.0, 1.0);
  return sigma + blend * (sigma_vel(sigma, sigma_max, v, band, mode) - sigma);
}

std::string_view to_string(CurriculumStage stage) {
  switch (stage) {
    case CurriculumStage::kInitial: return "initial";
    case CurriculumStage::kIntermediate: return "intermediate";
    case CurriculumStage::kAdvanced: return "advanced";
  }
  return "?";
}

CurriculumStage stage_for_step(long long training_step) {
  if (training_step < 0) throw InvalidArgument("curriculum: negative step");
  if (training_step <= 20000) return CurriculumStage::kInitial;
  if (training_step <= 50000) return CurriculumStage::kIntermediate;
  return CurriculumStage::kAdvanced;
}

CommandLimits stage_limits(CurriculumStage stage) {
  switch (stage) {
    case CurriculumStage::kInitial: return {0.5, 0.5, 1.0};
    case CurriculumStage::kIntermediate: return {1.0, 1.0, 1.5};
    case CurriculumStage::kAdvanced: return {2.0, 1.0, 2.0};
  }
  throw InvalidArgument("curriculum: unknown stage");
}

CommandLimits effective_limits(const SamplingContext& ctx) {
  const CommandLimits a = stage_limits(ctx.stage);
  const CommandLimits b = command_limits(ctx.terrain);
  return {std::min(a.vx, b.vx), std::min(a.vy, b.vy), std::min(a.wz, b.wz)};
}

namespace {

double covered(const std::vector<Command>& prior, double resample_interval) {
  double sx = 0.0, sy = 0.0;
  for (const auto& c : prior) {
    sx += c.vx;
    sy += c.vy;
  }
  return std::hypot(sx, sy) * resample_interval;
}

constexpr double kLevelUpDistance = 5.0;  // m of commanded travel per episode

}  // namespace

double exclusion_speed(const std::vector<Command>& prior, double resample_interval,
                       double episode_length, const CommandLimits& limits) {
  const double remaining = episode_length - static_cast<double>(prior.size()) * resample_interval;
  if (!(remaining > 0.0)) throw InvalidArgument("command sampling: episode time exhausted");
  const double v = (kLevelUpDistance - covered(prior, resample_interval)) / remaining;
  // The band is symmetric, so min(|v_min|, |v_max|) is the limit itself.
  return std::clamp(v, 0.0, limits.vx);
}

double zero_duration(const std::vector<Command>& prior, double resample_interval,
                     double episode_length, const CommandLimits& limits) {
  const double remaining = episode_length - static_cast<double>(prior.size()) * resample_interval;
  if (!(remaining > 0.0)) throw InvalidArgument("command sampling: episode time exhausted");
  const double needed = (kLevelUpDistance - covered(prior, resample_interval)) /
                        (0.8 * std::max(limits.vx, limits.vy));
  return std::clamp(remaining - needed, 0.0, resample_interval);
}

SampledCommand sample_training_command(Rng& rng, const SamplingContext& ctx) {
  const CommandLimits l = effective_limits(ctx);
  SampledCommand out;
  out.v_star = exclusion_speed(ctx.prior, ctx.resample_interval, ctx.episode_length, l);

  const double u = rng.uniform();
  if (u < 0.10) {
    out.kind = SampleKind::kStationary;
    out.duration = zero_duration(ctx.prior, ctx.resample_interval, ctx.episode_length, l);
    return out;
  }
  if (u < 0.30) {
    out.kind = SampleKind::kExtreme;
    const std::uint64_t combo = rng.below(8);
    out.command = {(combo & 1) ? -l.vx : l.vx, (combo & 2) ? -l.vy : l.vy,
                   (combo & 4) ? -l.wz : l.wz};
    return out;
  }

  out.kind = SampleKind::kUniform;
  // v_x uniform over (-v_max, -v*) U (v*, v_max).
  const double span = l.vx - out.v_star;
  const double r = rng.uniform(-span, span);
  out.command.vx = r < 0.0 ? r - out.v_star : r + out.v_star;
  out.command.vy = rng.uniform(-l.vy, l.vy);
  out.command.wz = rng.uniform(-l.wz, l.wz);
  if (out.v_star == 0.0 && out.command.linear_norm() < kSmallCommand) {
    out.command.vx = out.command.vy = 0.0;
    if (rng.bernoulli(0.20)) {
      out.kind = SampleKind::kPivot;
      out.command.wz = signed_pick(rng, l.wz);
    }
  }
  return out;
}

}  // namespace locogauge
