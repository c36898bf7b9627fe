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

#include "locogauge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "locogauge/goals.hpp"

namespace locogauge {
namespace {

constexpr std::array<std::string_view, kNumMetrics> kNames{
    "lin_tracking", "ang_tracking", "dof_power", "dof_limits", "orientation", "smoothness"};

double score(double raw, double scale) { return 1.0 - std::clamp(raw / scale, 0.0, 1.0); }

}  // namespace

std::string_view metric_name(int index) {
  if (index < 0 || index >= kNumMetrics) throw InvalidArgument("metric index out of range");
  return kNames[index];
}

MetricVector MetricVector::constant(double v) {
  MetricVector m;
  m.values.fill(v);
  return m;
}

nlohmann::json to_json(const MetricVector& m) {
  nlohmann::json j = nlohmann::json::object();
  for (int i = 0; i < kNumMetrics; ++i) j[std::string(kNames[i])] = m[i];
  return j;
}

MetricVector metric_vector_from_json(const nlohmann::json& j) {
  MetricVector m;
  if (!j.is_object() || j.size() != kNumMetrics) throw FormatError("metrics: expected six named values");
  for (int i = 0; i < kNumMetrics; ++i) m[i] = j.at(std::string(kNames[i])).get<double>();
  return m;
}

NormalizationConfig NormalizationConfig::for_terrain(TerrainKind kind) {
  const CommandLimits l = command_limits(kind);
  NormalizationConfig n;
  n.c_lin = l.vx;
  n.c_ang = l.wz;
  return n;
}

void validate(const NormalizationConfig& n) {
  if (!(n.c_lin > 0.0) || !(n.c_ang > 0.0) || !(n.c_power > 0.0) || !(n.c_smooth > 0.0)) {
    throw InvalidArgument("normalization: scales must be positive");
  }
}

nlohmann::json to_json(const NormalizationConfig& n) {
  return {{"c_lin", n.c_lin}, {"c_ang", n.c_ang}, {"c_power", n.c_power}, {"c_smooth", n.c_smooth}};
}

NormalizationConfig normalization_from_json(const nlohmann::json& j) {
  NormalizationConfig n;
  if (!j.is_object()) throw InvalidArgument("normalization: must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "c_lin") n.c_lin = value.get<double>();
    else if (key == "c_ang") n.c_ang = value.get<double>();
    else if (key == "c_power") n.c_power = value.get<double>();
    else if (key == "c_smooth") n.c_smooth = value.get<double>();
    else throw InvalidArgument(fmt::format("normalization: unknown key '{}'", key));
  }
  validate(n);
  return n;
}

RawMetrics compute_raw_metrics(std::span<const TraceRecord> records, const RobotDescription& robot) {
  if (records.empty()) throw InvalidArgument("metrics: empty trace");
  RawMetrics raw;
  std::size_t outside = 0;
  double smooth_sum = 0.0;
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& r = records[t];
    const auto& s = r.state;
    if (!s.lin_vel.allFinite() || !s.ang_vel.allFinite() || !s.q.allFinite() ||
        !s.dq.allFinite() || !s.tau.allFinite() || !s.projected_gravity.allFinite()) {
      throw InvalidArgument(fmt::format("metrics: non-finite sample at record {}", t));
    }
    raw.lin += std::hypot(r.command.vx - s.lin_vel.x(), r.command.vy - s.lin_vel.y());
    raw.ang += std::abs(r.command.wz - s.ang_vel.z());
    raw.power += (s.tau.array() * s.dq.array()).abs().sum();
    for (int i = 0; i < kNumJoints; ++i) {
      if (s.q[i] < robot.soft_lower[i] || s.q[i] > robot.soft_upper[i]) ++outside;
    }
    raw.orient += std::abs(s.projected_gravity.y());
    if (t > 0) smooth_sum += (s.tau - records[t - 1].state.tau).norm();
  }
  const double n = static_cast<double>(records.size());
  raw.lin /= n;
  raw.ang /= n;
  raw.power /= n;
  raw.orient /= n;
  raw.limits = static_cast<double>(outside) / (n * kNumJoints);
  raw.smooth = records.size() > 1 ? smooth_sum / (n - 1.0) : 0.0;
  return raw;
}

MetricVector normalize(const RawMetrics& raw, const NormalizationConfig& norm) {
  validate(norm);
  MetricVector m;
  m[kLinTracking] = score(raw.lin, norm.c_lin);
  m[kAngTracking] = score(raw.ang, norm.c_ang);
  m[kDofPower] = score(raw.power, norm.c_power);
  m[kDofLimits] = score(raw.limits, 1.0);
  m[kOrientation] = score(raw.orient, 1.0);
  m[kSmoothness] = score(raw.smooth, norm.c_smooth);
  return m;
}

MetricVector compute_metrics(std::span<const TraceRecord> records, const RobotDescription& robot,
                             const NormalizationConfig& norm) {
  return normalize(compute_raw_metrics(records, robot), norm);
}

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kWorst50: return "worst50";
    case Aggregation::kMean: return "mean";
    case Aggregation::kTop25: return "top25";
  }
  return "?";
}

MetricVector aggregate_goal_scores(std::span<const MetricVector> trials, Aggregation mode) {
  if (trials.empty()) throw InvalidArgument("aggregate: no trials");
  const std::size_t n = trials.size();
  MetricVector out;
  std::vector<double> column(n);
  for (int k = 0; k < kNumMetrics; ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = trials[i][k];
    std::sort(column.begin(), column.end());
    std::size_t first = 0, count = n;
    if (mode == Aggregation::kWorst50) {
      count = (n + 1) / 2;
    } else if (mode == Aggregation::kTop25) {
      count = (n + 3) / 4;
      first = n - count;
    }
    double sum = 0.0;
    for (std::size_t i = first; i < first + count; ++i) sum += column[i];
    out[k] = sum / static_cast<double>(count);
  }
  return out;
}

MetricVector mean_of(std::span<const MetricVector> vectors) {
  if (vectors.empty()) throw InvalidArgument("mean: no inputs");
  MetricVector out;
  for (int k = 0; k < kNumMetrics; ++k) {
    double sum = 0.0;
    for (const auto& v : vectors) sum += v[k];
    out[k] = sum / static_cast<double>(vectors.size());
  }
  return out;
}

MetricVector average_over_seeds(std::span<const MetricVector> per_seed, int expected) {
  if (static_cast<int>(per_seed.size()) != expected) {
    throw InvalidArgument(fmt::format("seed average: {} inputs, expected {}", per_seed.size(), expected));
  }
  return mean_of(per_seed);
}

}  // namespace locogauge
