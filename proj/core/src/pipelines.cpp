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

#include "locogauge/pipelines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>

namespace locogauge {
namespace {

Pose2 planar_pose(const RobotState& s) {
  return {s.base_position.x(), s.base_position.y(), roll_pitch_yaw(s.base_orientation).z()};
}

std::string dr_key(TerrainKind terrain, const std::string& dr) {
  return fmt::format("{}/{}", to_string(terrain), dr);
}

}  // namespace

std::vector<TerrainKind> default_terrains() {
  return {TerrainKind::kFlat,      TerrainKind::kWave,       TerrainKind::kSlopeUp,
          TerrainKind::kSlopeDown, TerrainKind::kStairsUp,   TerrainKind::kStairsDown,
          TerrainKind::kObstacle};
}

SeedPlan SeedPlan::three_of_three(std::uint64_t root) {
  SeedPlan p;
  p.root = root;
  p.pass_seeds = 3;
  p.pass_threshold = 1.0;
  return p;
}

int SeedPlan::required_successes() const {
  // Small slack so 0.8 * 5 lands on 4 rather than 4.000000000000001.
  return static_cast<int>(std::ceil(pass_threshold * pass_seeds - 1e-9));
}

NormalizationConfig EvalConfig::normalization_for(TerrainKind kind) const {
  return normalization ? *normalization : NormalizationConfig::for_terrain(kind);
}

std::uint64_t pass_seed(const SeedPlan& plan, TerrainKind terrain, const std::string& dr, int index) {
  return derive_seed(plan.root, fmt::format("pass/{}/{}", dr_key(terrain, dr), index));
}

std::uint64_t metric_seed(const SeedPlan& plan, TerrainKind terrain, const std::string& dr, int index) {
  return derive_seed(plan.root, fmt::format("metric/{}/{}", dr_key(terrain, dr), index));
}

TerrainSpec level_terrain_spec(const EvalConfig& cfg, TerrainKind kind, int level) {
  TerrainSpec spec;
  spec.kind = kind;
  spec.difficulty = difficulty_for_level(level);
  spec.length_m = cfg.tile_length;
  spec.width_m = cfg.tile_width;
  spec.resolution_m = cfg.resolution;
  spec.seed = derive_seed(cfg.seeds.root, fmt::format("terrain/{}/{}", to_string(kind), level));
  return spec;
}

std::shared_ptr<const Heightfield> TerrainCache::get(TerrainKind kind, int level) {
  std::lock_guard lock(mutex_);
  auto& slot = cache_[{static_cast<int>(kind), level}];
  if (!slot) slot = std::make_shared<const Heightfield>(generate(level_terrain_spec(cfg_, kind, level)));
  return slot;
}

GoalRun run_goal(GoalKind kind, const BaseRequest& req, const Heightfield& terrain, Simulator& sim,
                 const ControllerFactory& policy, const EvalConfig& cfg) {
  const GoalSchedule schedule = build_goal(kind, command_limits(req.terrain), cfg.goals);
  const NormalizationConfig norm = cfg.normalization_for(req.terrain);
  const double dt = sim.config().control_dt();
  const RobotDescription& robot = sim.robot();

  GoalRun run;
  run.goal = kind;
  EpisodeTrace trace;
  trace.terrain = std::string(to_string(req.terrain));
  trace.dr = req.dr.label;
  trace.level = req.level;
  trace.goal = std::string(to_string(kind));
  trace.seed = req.seed;
  trace.control_dt = dt;

  long long step_index = 0;
  for (int trial = 0; trial < schedule.max_trials; ++trial) {
    RobotState state = sim.reset(terrain, req.dr.dr, req.seed);
    Rng noise(derive_seed(req.seed, fmt::format("noise/{}/{}/{}", req.level, to_string(kind), trial)));
    auto controller = policy();
    JointVector prev_action = JointVector::Zero();
    const Eigen::Vector2d start = state.base_position.head<2>();
    const Eigen::Vector2d target = start + schedule.target_offset;
    const std::size_t first = trace.records.size();
    bool started = false, fallen = false, reached = false;

    for (std::size_t seg = 0; seg < schedule.segments.size() && !fallen && !reached; ++seg) {
      const GoalSegment& segment = schedule.segments[seg];
      if (segment.trial != trial) continue;
      const long steps = std::lround(segment.duration / dt);
      for (long s = 0; s < steps; ++s) {
        const Command cmd = segment.position_control
                                ? target_position_controller(planar_pose(state), target, schedule.kp,
                                                             schedule.limits)
                                : segment.command;
        sim.set_command(cmd);
        const Observation obs = observe(state, cmd, prev_action, robot, sim.config().noise, &noise);
        if (!started) {
          controller->reset(obs);
          started = true;
        }
        const JointVector action = controller->act(obs);
        state = sim.step(action);
        ++step_index;

        TraceRecord rec;
        rec.time = static_cast<double>(step_index) * dt;
        rec.trial = trial;
        rec.segment = static_cast<int>(seg);
        rec.stop = segment.stop;
        rec.command = cmd;
        rec.state = state;
        rec.action = action;
        rec.terrain_height = terrain.height_clamped(state.base_position.x(), state.base_position.y());
        rec.fallen = sim.fallen();
        trace.records.push_back(rec);

        if (req.record_latents) {
          if (const MoeOutput* out = controller->last_output()) {
            run.latents.push_back({rec.time, trace.terrain, trial, out->gate, out->latent});
          }
        }
        prev_action = action;
        if (sim.fallen()) {
          fallen = true;
          break;
        }
        if (segment.position_control &&
            (state.base_position.head<2>() - target).norm() <= schedule.reach_tolerance) {
          reached = true;
          break;
        }
      }
    }

    const std::span<const TraceRecord> records(trace.records.begin() + static_cast<long>(first),
                                               trace.records.end());
    if (records.empty()) throw Error(fmt::format("goal {} trial {} produced no steps", to_string(kind), trial));
    run.trials.push_back(compute_metrics(records, robot, norm));
    run.fallen.push_back(fallen);
    if (kind == GoalKind::kTargetPosition) {
      run.outcome.displacement = (records.back().state.base_position.head<2>() - start).norm();
      run.outcome.fallen = fallen;
      run.outcome.timed_out = !fallen && !reached;
      run.success = success_check(run.outcome, cfg.goals.success_distance);
    }
  }
  if (req.keep_traces) run.trace = std::move(trace);
  return run;
}

BaseResult base_pipeline(const BaseRequest& req, const Heightfield& terrain, Simulator& sim,
                         const ControllerFactory& policy, const EvalConfig& cfg) {
  BaseResult result;
  try {
    for (GoalKind g : req.goals) {
      result.goals.push_back(run_goal(g, req, terrain, sim, policy, cfg));
      if (g == GoalKind::kTargetPosition) result.pass = result.goals.back().success;
    }
  } catch (const std::exception& e) {
    result.errored = true;
    result.error = e.what();
  }
  return result;
}

int search_level(const std::function<bool(int)>& passes, std::vector<int>* probes) {
  // Invariant: lo passes (0 is the virtual floor), hi fails (11 the ceiling).
  int lo = 0, hi = kNumLevels + 1;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (probes) probes->push_back(mid);
    if (passes(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

LevelProbe probe_level(TerrainKind terrain, const NamedDr& dr, int level, Simulator& sim,
                       const ControllerFactory& policy, const EvalConfig& cfg,
                       TerrainCache& terrains) {
  const auto hf = terrains.get(terrain, level);
  LevelProbe probe;
  probe.level = level;
  for (int k = 0; k < cfg.seeds.pass_seeds; ++k) {
    BaseRequest req;
    req.terrain = terrain;
    req.dr = dr;
    req.level = level;
    req.seed = pass_seed(cfg.seeds, terrain, dr.label, k);
    req.goals = {GoalKind::kTargetPosition};
    const BaseResult r = base_pipeline(req, *hf, sim, policy, cfg);
    if (r.errored) {
      throw Error(fmt::format("{} level {} pass seed {}: {}", dr_key(terrain, dr.label), level, k, r.error));
    }
    ++probe.attempts;
    if (r.pass) ++probe.successes;
  }
  probe.passed = probe.successes >= cfg.seeds.required_successes();
  return probe;
}

CellScore level_pipeline(TerrainKind terrain, const NamedDr& dr, Simulator& sim,
                         const ControllerFactory& policy, const EvalConfig& cfg,
                         TerrainCache& terrains, const LevelOptions& options) {
  CellScore cell;
  cell.terrain = std::string(to_string(terrain));
  cell.dr = dr.label;
  cell.metric_seeds = cfg.seeds.metric_seeds;
  search_level([&](int level) {
    cell.search.push_back(probe_level(terrain, dr, level, sim, policy, cfg, terrains));
    return cell.search.back().passed;
  });
  if (!options.evaluate_quality) {
    for (const auto& p : cell.search) {
      if (p.passed) cell.level_star = std::max(cell.level_star, p.level);
    }
    return cell;
  }

  int scored = 0;
  for (const auto& p : cell.search) {
    if (p.passed) scored = std::max(scored, p.level);
  }
  scored = std::max(scored, 1);
  const auto hf = terrains.get(terrain, scored);
  for (int k = 0; k < cfg.seeds.metric_seeds; ++k) {
    BaseRequest req;
    req.terrain = terrain;
    req.dr = dr;
    req.level = scored;
    req.seed = metric_seed(cfg.seeds, terrain, dr.label, k);
    req.goals = cfg.goal_set;
    const BaseResult r = base_pipeline(req, *hf, sim, policy, cfg);
    if (r.errored) {
      throw Error(fmt::format("{} level {} metric seed {}: {}", dr_key(terrain, dr.label), scored, k, r.error));
    }
    for (const auto& g : r.goals) {
      ScoreLeaf leaf;
      leaf.level = scored;
      leaf.goal = std::string(to_string(g.goal));
      leaf.seed_index = k;
      leaf.seed = req.seed;
      leaf.trials = g.trials;
      leaf.fallen = g.fallen;
      cell.leaves.push_back(std::move(leaf));
    }
  }
  score_cell(cell, cfg.weights, cfg.aggregation);
  return cell;
}

std::vector<CellRequest> canonical_cells(const EvalConfig& cfg) {
  std::vector<CellRequest> cells;
  for (TerrainKind t : cfg.terrains) {
    for (const auto& dr : cfg.drs) cells.push_back({t, dr});
  }
  return cells;
}

std::vector<CellScore> multi_pipeline(const std::vector<CellRequest>& cells,
                                      const SimulatorFactory& sims, const ControllerFactory& policy,
                                      const EvalConfig& cfg, int workers,
                                      const ProgressFn& progress, const LevelOptions& options) {
  if (workers < 1) throw InvalidArgument("multi pipeline: need at least one worker");
  std::vector<CellScore> results(cells.size());
  TerrainCache terrains(cfg);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto emit = [&](nlohmann::json event) {
    if (!progress) return;
    std::lock_guard lock(progress_mutex);
    progress(event);
  };

  auto worker = [&](int id) {
    std::unique_ptr<Simulator> sim;
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const CellRequest& c = cells[i];
      const std::string key = dr_key(c.terrain, c.dr.label);
      CellScore result;
      std::string failure;
      bool ok = false;
      for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
        try {
          if (!sim || attempt > 0) sim = sims();
          result = level_pipeline(c.terrain, c.dr, *sim, policy, cfg, terrains, options);
          ok = true;
        } catch (const std::exception& e) {
          failure = e.what();
          emit({{"event", "cell_error"}, {"cell", key}, {"attempt", attempt + 1},
                {"worker", id}, {"message", failure}});
        }
      }
      if (!ok) {
        sim.reset();  // do not carry a broken backend into the next cell
        result = CellScore{};
        result.terrain = std::string(to_string(c.terrain));
        result.dr = c.dr.label;
        result.metric_seeds = cfg.seeds.metric_seeds;
        result.errored = true;
        result.error = failure;
        if (options.evaluate_quality) score_cell(result, cfg.weights, cfg.aggregation);
      }
      results[i] = std::move(result);
      const std::size_t finished = ++done;
      emit({{"event", "cell_done"}, {"cell", key}, {"index", i}, {"worker", id},
            {"level_star", results[i].level_star}, {"errored", results[i].errored},
            {"done", finished}, {"total", cells.size()}});
    }
  };

  const int n = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  if (n == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  return results;
}

ScoreTree stress_pipeline(const SimulatorFactory& sims, const ControllerFactory& policy,
                          const EvalConfig& cfg, const nlohmann::json& provenance,
                          const ProgressFn& progress) {
  validate(cfg.weights);
  ScoreTree tree;
  tree.provenance = provenance;
  tree.weights = cfg.weights;
  tree.aggregation = cfg.aggregation;
  for (TerrainKind t : cfg.terrains) tree.terrains.emplace_back(to_string(t));
  for (const auto& d : cfg.drs) tree.drs.push_back(d.label);
  tree.cells = multi_pipeline(canonical_cells(cfg), sims, policy, cfg, cfg.workers, progress);
  recompute(tree);
  return tree;
}

}  // namespace locogauge
