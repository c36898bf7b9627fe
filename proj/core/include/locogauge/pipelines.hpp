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
 * pipelines.hpp
 *
 * base:   one (terrain, DR, level, seed) environment running a goal set.
 * level:  binary search over levels 1..10 for the highest level whose pass
 *         seeds reach the position target often enough, then quality
 *         evaluation at that level on the metric seeds.
 * multi:  (terrain, DR) cells on a worker pool, merged in canonical order.
 * stress: the full terrain x DR matrix folded into a ScoreTree.
 *
 * Seeds are derived from one root. Pass and metric seeds depend on
 * (terrain, DR, index) only, so a given seed meets every level; observation
 * noise streams additionally depend on level, goal and trial.
 */

#ifndef LOCOGAUGE_PIPELINES_HPP_
#define LOCOGAUGE_PIPELINES_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locogauge/goals.hpp"
#include "locogauge/metrics.hpp"
#include "locogauge/policy.hpp"
#include "locogauge/scoring.hpp"
#include "locogauge/sim.hpp"
#include "locogauge/terrain.hpp"
#include "locogauge/trace.hpp"

namespace locogauge {

/// The seven evaluation terrains in canonical order.
std::vector<TerrainKind> default_terrains();

struct SeedPlan {
  std::uint64_t root = 0;
  int pass_seeds = 5;
  double pass_threshold = 0.8;  // fraction of pass seeds that must succeed
  int metric_seeds = 3;

  /// Three pass seeds that must all succeed.
  static SeedPlan three_of_three(std::uint64_t root = 0);
  int required_successes() const;
  bool operator==(const SeedPlan&) const = default;
};

struct EvalConfig {
  SimConfig sim;
  RobotDescription robot = default_quadruped();
  GoalOptions goals;
  std::vector<GoalKind> goal_set{GoalKind::kMaxVelocity, GoalKind::kDiagonalVelocity,
                                 GoalKind::kTargetPosition};
  /// Per-terrain tracking scales when unset.
  std::optional<NormalizationConfig> normalization;
  ScoreWeights weights;
  Aggregation aggregation = Aggregation::kWorst50;
  SeedPlan seeds;
  std::vector<TerrainKind> terrains = default_terrains();
  std::vector<NamedDr> drs = default_dr_set();
  double tile_length = 8.0;
  double tile_width = 8.0;
  double resolution = 0.05;
  int workers = 1;

  NormalizationConfig normalization_for(TerrainKind kind) const;
};

std::uint64_t pass_seed(const SeedPlan& plan, TerrainKind terrain, const std::string& dr, int index);
std::uint64_t metric_seed(const SeedPlan& plan, TerrainKind terrain, const std::string& dr, int index);
TerrainSpec level_terrain_spec(const EvalConfig& cfg, TerrainKind kind, int level);

/// Generated heightfields shared read-only between workers.
class TerrainCache {
 public:
  explicit TerrainCache(const EvalConfig& cfg) : cfg_(cfg) {}
  std::shared_ptr<const Heightfield> get(TerrainKind kind, int level);

 private:
  const EvalConfig& cfg_;
  std::mutex mutex_;
  std::map<std::pair<int, int>, std::shared_ptr<const Heightfield>> cache_;
};

struct BaseRequest {
  TerrainKind terrain = TerrainKind::kFlat;
  NamedDr dr;
  int level = 1;
  std::uint64_t seed = 0;
  std::vector<GoalKind> goals;
  bool keep_traces = false;
  bool record_latents = false;
};

struct GoalRun {
  GoalKind goal = GoalKind::kMaxVelocity;
  std::vector<MetricVector> trials;
  std::vector<bool> fallen;
  GoalOutcome outcome;   // target_position only
  bool success = false;  // target_position only
  std::optional<EpisodeTrace> trace;
  std::vector<LatentRow> latents;
};

struct BaseResult {
  std::vector<GoalRun> goals;
  bool pass = false;  // target_position success, false when not run
  bool errored = false;
  std::string error;
};

/// Never throws for failures inside the episode: they mark the result
/// errored with the message.
BaseResult base_pipeline(const BaseRequest& req, const Heightfield& terrain, Simulator& sim,
                         const ControllerFactory& policy, const EvalConfig& cfg);

/// Runs one goal on a prepared simulator. Throws on backend failure.
GoalRun run_goal(GoalKind goal, const BaseRequest& req, const Heightfield& terrain, Simulator& sim,
                 const ControllerFactory& policy, const EvalConfig& cfg);

using ProgressFn = std::function<void(const nlohmann::json&)>;

struct LevelOptions {
  bool evaluate_quality = true;
};

/// Throws when a base run errors, so the caller can retry the cell.
CellScore level_pipeline(TerrainKind terrain, const NamedDr& dr, Simulator& sim,
                         const ControllerFactory& policy, const EvalConfig& cfg,
                         TerrainCache& terrains, const LevelOptions& options = {});

/// Pass predicate for one level, as used by the search.
LevelProbe probe_level(TerrainKind terrain, const NamedDr& dr, int level, Simulator& sim,
                       const ControllerFactory& policy, const EvalConfig& cfg,
                       TerrainCache& terrains);

/// Binary search over 1..10 on an arbitrary predicate. Returns 0 when level
/// 1 fails. `probes` receives the visited levels in order.
int search_level(const std::function<bool(int)>& passes, std::vector<int>* probes = nullptr);

struct CellRequest {
  TerrainKind terrain = TerrainKind::kFlat;
  NamedDr dr;
};

/// Terrain-major canonical order.
std::vector<CellRequest> canonical_cells(const EvalConfig& cfg);

/// Each worker owns one simulator. A cell that throws is retried once on
/// the same worker and then recorded as errored.
std::vector<CellScore> multi_pipeline(const std::vector<CellRequest>& cells,
                                      const SimulatorFactory& sims, const ControllerFactory& policy,
                                      const EvalConfig& cfg, int workers,
                                      const ProgressFn& progress = {},
                                      const LevelOptions& options = {});

/// Full matrix to a recomputed ScoreTree. `provenance` is stored verbatim.
ScoreTree stress_pipeline(const SimulatorFactory& sims, const ControllerFactory& policy,
                          const EvalConfig& cfg, const nlohmann::json& provenance = nlohmann::json::object(),
                          const ProgressFn& progress = {});

}  // namespace locogauge

#endif  // LOCOGAUGE_PIPELINES_HPP_
