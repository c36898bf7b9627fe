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
 * scoring.hpp
 *
 *   Q      = (prod_k m_k^w_k)^(1 / sum_k w_k)
 *   S_ij   = alpha (L*_ij - 1) + beta Q_ij(L*_ij)       (beta Q_ij(1) if L* = 0)
 *   S_i    = mean_j S_ij
 *   S      = mean_i S_i
 *
 * A cell's metric vector is built from its leaves: trials of each goal are
 * reduced with the selected aggregation, goals are averaged per seed, and
 * seeds are averaged.
 */

#ifndef LOCOGAUGE_SCORING_HPP_
#define LOCOGAUGE_SCORING_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locogauge/metrics.hpp"

namespace locogauge {

struct ScoreWeights {
  std::array<double, kNumMetrics> exponents{2.0, 2.0, 1.0, 1.0, 1.0, 1.0};
  double alpha = 0.09;
  double beta = 0.19;

  bool operator==(const ScoreWeights&) const = default;
};

/// Throws InvalidArgument unless w_k > 0, 0 < alpha < beta and
/// 9 alpha + beta <= 1.
void validate(const ScoreWeights& w);
nlohmann::json to_json(const ScoreWeights& w);
ScoreWeights score_weights_from_json(const nlohmann::json& j);

/// Weighted geometric mean, evaluated in the log domain. Any zero metric
/// gives 0. Throws InvalidArgument for metrics outside [0, 1].
double quality_score(const MetricVector& m, const std::array<double, kNumMetrics>& exponents);
/// L* in 0..10; 0 marks a cell where no level passed.
double terrain_score(int level_star, double quality, double alpha, double beta);

struct ScoreLeaf {
  int level = 0;
  std::string goal;
  int seed_index = 0;
  std::uint64_t seed = 0;
  std::vector<MetricVector> trials;
  std::vector<bool> fallen;
};

struct LevelProbe {
  int level = 0;
  int successes = 0;
  int attempts = 0;
  bool passed = false;
};

struct CellScore {
  std::string terrain;
  std::string dr;
  std::vector<LevelProbe> search;  // probes in the order they ran
  std::vector<ScoreLeaf> leaves;   // quality evaluation at the scored level
  int metric_seeds = 3;
  bool errored = false;
  std::string error;

  // Derived from search and leaves.
  int level_star = 0;
  MetricVector metrics;            // worst50 reduction
  MetricVector metrics_mean;
  MetricVector metrics_top25;
  double quality = 0.0;
  double quality_mean = 0.0;
  double quality_top25 = 0.0;
  double score = 0.0;
};

struct TerrainScore {
  std::string terrain;
  double score = 0.0;
  int cells = 0;
};

struct ScoreTree {
  nlohmann::json provenance = nlohmann::json::object();
  ScoreWeights weights;
  Aggregation aggregation = Aggregation::kWorst50;
  std::vector<std::string> terrains;  // expected, canonical order
  std::vector<std::string> drs;       // expected, canonical order
  std::vector<CellScore> cells;       // terrain-major canonical order
  std::vector<TerrainScore> terrain_scores;
  double score = 0.0;
};

/// Cell metrics from leaves under one trial reduction.
MetricVector cell_metrics(const CellScore& cell, Aggregation mode);
/// Fills the derived fields of a cell. Errored cells score 0.
void score_cell(CellScore& cell, const ScoreWeights& weights, Aggregation mode);

struct AggregateResult {
  std::vector<TerrainScore> terrains;
  double score = 0.0;
};

/// Means exactly as printed. Throws InvalidArgument naming every expected
/// (terrain, dr) pair without a cell, and any unexpected or duplicate cell.
AggregateResult aggregate(const std::vector<CellScore>& cells,
                          const std::vector<std::string>& terrains,
                          const std::vector<std::string>& drs);

/// Recomputes every derived value from leaves and search logs.
void recompute(ScoreTree& tree);

nlohmann::json to_json(const ScoreTree& tree);
ScoreTree score_tree_from_json(const nlohmann::json& j);

struct CategoryStat {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct GroupSummary {
  std::string label;  // terrain name, or "overall"
  double score = 0.0;
  CategoryStat tracking;  // lin + ang tracking
  CategoryStat safety;    // dof power + dof limits
  CategoryStat quality;   // orientation + smoothness
  double level = 0.0;     // mean L*
  int cells = 0;
};

/// One row per terrain plus an "overall" row (last).
std::vector<GroupSummary> grouped_reports(const ScoreTree& tree);

}  // namespace locogauge

#endif  // LOCOGAUGE_SCORING_HPP_
