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
 * metrics.hpp
 *
 * Six proprioceptive metrics per trial. Raw values:
 *
 *   lin     mean_t || v_xy^cmd - v_xy ||
 *   ang     mean_t | w_z^cmd - w_z |
 *   power   mean_t sum_i | tau_i dq_i |
 *   limits  fraction of (joint, step) samples outside the soft limits
 *   orient  mean_t | g_y |
 *   smooth  mean_t || tau_t - tau_{t-1} ||   (t >= 1 within a trial)
 *
 * Each raw value x is divided by its scale (limits and orient are unscaled),
 * clipped to [0, 1] and reported as 1 - x, so higher is better.
 */

#ifndef LOCOGAUGE_METRICS_HPP_
#define LOCOGAUGE_METRICS_HPP_

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "locogauge/robot.hpp"
#include "locogauge/terrain.hpp"
#include "locogauge/trace.hpp"

namespace locogauge {

enum MetricIndex : int {
  kLinTracking = 0,
  kAngTracking,
  kDofPower,
  kDofLimits,
  kOrientation,
  kSmoothness,
};
inline constexpr int kNumMetrics = 6;
std::string_view metric_name(int index);

struct MetricVector {
  std::array<double, kNumMetrics> values{};

  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
  bool operator==(const MetricVector&) const = default;
  static MetricVector constant(double v);
};

nlohmann::json to_json(const MetricVector& m);
MetricVector metric_vector_from_json(const nlohmann::json& j);

struct RawMetrics {
  double lin = 0.0;
  double ang = 0.0;
  double power = 0.0;
  double limits = 0.0;
  double orient = 0.0;
  double smooth = 0.0;
};

struct NormalizationConfig {
  double c_lin = 2.0;      // m/s
  double c_ang = 2.0;      // rad/s
  double c_power = 400.0;  // W
  double c_smooth = 20.0;  // N m

  /// Tracking scales from the terrain's command limits.
  static NormalizationConfig for_terrain(TerrainKind kind);
  bool operator==(const NormalizationConfig&) const = default;
};

void validate(const NormalizationConfig& n);
nlohmann::json to_json(const NormalizationConfig& n);
NormalizationConfig normalization_from_json(const nlohmann::json& j);

/// Throws InvalidArgument for an empty span or non-finite samples.
RawMetrics compute_raw_metrics(std::span<const TraceRecord> records, const RobotDescription& robot);
MetricVector normalize(const RawMetrics& raw, const NormalizationConfig& norm);
MetricVector compute_metrics(std::span<const TraceRecord> records, const RobotDescription& robot,
                             const NormalizationConfig& norm);

enum class Aggregation { kWorst50, kMean, kTop25 };
std::string_view to_string(Aggregation a);

/// Componentwise. worst50 averages the lowest ceil(n/2) values, top25 the
/// highest ceil(n/4). Throws InvalidArgument on an empty input.
MetricVector aggregate_goal_scores(std::span<const MetricVector> trials, Aggregation mode);

/// Componentwise mean; throws InvalidArgument unless exactly `expected` inputs.
MetricVector average_over_seeds(std::span<const MetricVector> per_seed, int expected);

/// Componentwise mean of any non-empty set.
MetricVector mean_of(std::span<const MetricVector> vectors);

}  // namespace locogauge

#endif  // LOCOGAUGE_METRICS_HPP_
