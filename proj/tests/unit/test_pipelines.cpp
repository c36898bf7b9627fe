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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <set>

#include "locogauge/pipelines.hpp"
#include "locogauge/reference_sim.hpp"
#include "locogauge/util.hpp"

namespace locogauge {
namespace {

EvalConfig small_config() {
  EvalConfig cfg;
  cfg.terrains = {TerrainKind::kFlat, TerrainKind::kStairsUp};
  cfg.drs = {default_dr_set()[0], default_dr_set().back()};
  return cfg;
}

NamedDr full_friction() { return default_dr_set().back(); }

TEST(SearchLevel, MatchesLinearScanOnEveryThreshold) {
  for (int t = 0; t <= kNumLevels; ++t) {
    std::vector<int> probes;
    const int got = search_level([t](int level) { return level <= t; }, &probes);
    EXPECT_EQ(got, t);
    EXPECT_LE(probes.size(), 4u);
    EXPECT_EQ(std::set<int>(probes.begin(), probes.end()).size(), probes.size());
    for (int p : probes) {
      EXPECT_GE(p, 1);
      EXPECT_LE(p, kNumLevels);
    }
  }
}

TEST(SearchLevel, StartsInTheMiddle) {
  std::vector<int> probes;
  search_level([](int) { return true; }, &probes);
  EXPECT_EQ(probes, (std::vector<int>{5, 8, 9, 10}));
  probes.clear();
  EXPECT_EQ(search_level([](int) { return false; }, &probes), 0);
  EXPECT_EQ(probes, (std::vector<int>{5, 2, 1}));
}

TEST(SeedPlan, RequiredSuccesses) {
  EXPECT_EQ(SeedPlan{}.required_successes(), 4);
  EXPECT_EQ(SeedPlan::three_of_three().required_successes(), 3);
  SeedPlan p;
  p.pass_threshold = 0.5;
  EXPECT_EQ(p.required_successes(), 3);
}

TEST(Seeds, DependOnCellAndIndexOnly) {
  SeedPlan plan;
  std::set<std::uint64_t> seen;
  for (TerrainKind t : default_terrains()) {
    for (const auto& d : default_dr_set()) {
      for (int k = 0; k < 5; ++k) {
        EXPECT_TRUE(seen.insert(pass_seed(plan, t, d.label, k)).second);
        EXPECT_TRUE(seen.insert(metric_seed(plan, t, d.label, k)).second);
      }
    }
  }
  EXPECT_EQ(pass_seed(plan, TerrainKind::kWave, "friction_0.5", 2),
            pass_seed(plan, TerrainKind::kWave, "friction_0.5", 2));
  SeedPlan other = plan;
  other.root = 1;
  EXPECT_NE(pass_seed(plan, TerrainKind::kWave, "friction_0.5", 2),
            pass_seed(other, TerrainKind::kWave, "friction_0.5", 2));
}

TEST(CanonicalCells, TerrainMajor) {
  EvalConfig cfg;
  const auto cells = canonical_cells(cfg);
  ASSERT_EQ(cells.size(), 63u);
  EXPECT_EQ(cells[0].terrain, TerrainKind::kFlat);
  EXPECT_EQ(cells[0].dr.label, "friction_0.2");
  EXPECT_EQ(cells[8].dr.label, "friction_1.0");
  EXPECT_EQ(cells[9].terrain, cfg.terrains[1]);
  EXPECT_EQ(default_terrains().size(), 7u);
}

TEST(TerrainCache, SharesInstances) {
  EvalConfig cfg;
  TerrainCache cache(cfg);
  auto a = cache.get(TerrainKind::kStairsUp, 3);
  auto b = cache.get(TerrainKind::kStairsUp, 3);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_NE(a.get(), cache.get(TerrainKind::kStairsUp, 4).get());
}

TEST(BasePipeline, TrotTrackerOnFlat) {
  EvalConfig cfg;
  ReferenceSim sim(cfg.sim, cfg.robot);
  TerrainCache cache(cfg);
  BaseRequest req;
  req.dr = full_friction();
  req.seed = 7;
  req.goals = cfg.goal_set;
  req.keep_traces = true;
  const BaseResult r = base_pipeline(req, *cache.get(TerrainKind::kFlat, 1), sim,
                                     scripted_policy(ScriptedKind::kTrotTracker), cfg);
  ASSERT_FALSE(r.errored) << r.error;
  ASSERT_EQ(r.goals.size(), 3u);
  EXPECT_EQ(r.goals[0].trials.size(), 6u);
  EXPECT_EQ(r.goals[1].trials.size(), 8u);
  EXPECT_EQ(r.goals[2].trials.size(), 1u);
  EXPECT_TRUE(r.pass);
  for (const auto& g : r.goals) {
    ASSERT_TRUE(g.trace.has_value());
    EXPECT_NO_THROW(validate(*g.trace));
    for (const auto& m : g.trials) {
      for (double v : m.values) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
  EXPECT_GT(r.goals[0].trials[0][kLinTracking], 0.5);
}

TEST(BasePipeline, StandingPolicyFailsTarget) {
  EvalConfig cfg;
  ReferenceSim sim(cfg.sim, cfg.robot);
  TerrainCache cache(cfg);
  BaseRequest req;
  req.dr = full_friction();
  req.goals = {GoalKind::kTargetPosition};
  const BaseResult r = base_pipeline(req, *cache.get(TerrainKind::kFlat, 1), sim,
                                     scripted_policy(ScriptedKind::kStand), cfg);
  ASSERT_FALSE(r.errored);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.goals[0].outcome.timed_out);
}

TEST(LevelPipeline, StandScoresZeroLevel) {
  EvalConfig cfg;
  ReferenceSim sim(cfg.sim, cfg.robot);
  TerrainCache cache(cfg);
  const CellScore c = level_pipeline(TerrainKind::kFlat, full_friction(), sim,
                                     scripted_policy(ScriptedKind::kStand), cfg, cache);
  EXPECT_EQ(c.level_star, 0);
  ASSERT_FALSE(c.leaves.empty());
  EXPECT_EQ(c.leaves[0].level, 1);
  EXPECT_NEAR(c.score, cfg.weights.beta * c.quality, 1e-12);
}

TEST(LevelPipeline, CapabilityCapBoundsLevel) {
  EvalConfig cfg;
  ReferenceDynamics dyn;
  dyn.capability[static_cast<int>(TerrainKind::kSlopeUp)] = CapabilityProfile::up_to(6);
  ReferenceSim sim(cfg.sim, cfg.robot, dyn);
  TerrainCache cache(cfg);
  const CellScore c = level_pipeline(TerrainKind::kSlopeUp, full_friction(), sim,
                                     scripted_policy(ScriptedKind::kTrotTracker), cfg, cache,
                                     {.evaluate_quality = false});
  EXPECT_EQ(c.level_star, 6);
  EXPECT_TRUE(c.leaves.empty());
}

// Pass fraction at `level` placed between the 3rd and 4th smallest draw of
// the pass seeds: exactly three seeds succeed, one short of the threshold.
TEST(ProbeLevel, ThreeOfFiveFails) {
  EvalConfig cfg;
  const TerrainKind terrain = TerrainKind::kSlopeUp;
  std::vector<double> draws;
  for (int k = 0; k < 5; ++k) {
    draws.push_back(ReferenceSim::capability_draw(pass_seed(cfg.seeds, terrain, full_friction().label, k)));
  }
  std::sort(draws.begin(), draws.end());
  auto probe_with = [&](double fraction) {
    ReferenceDynamics dyn;
    auto& prof = dyn.capability[static_cast<int>(terrain)];
    prof.pass_fraction.fill(fraction);
    ReferenceSim sim(cfg.sim, cfg.robot, dyn);
    TerrainCache cache(cfg);
    return probe_level(terrain, full_friction(), 4, sim, scripted_policy(ScriptedKind::kTrotTracker),
                       cfg, cache);
  };
  const LevelProbe three = probe_with(0.5 * (draws[2] + draws[3]));
  EXPECT_EQ(three.attempts, 5);
  EXPECT_EQ(three.successes, 3);
  EXPECT_FALSE(three.passed);
  const LevelProbe four = probe_with(0.5 * (draws[3] + draws[4]));
  EXPECT_EQ(four.successes, 4);
  EXPECT_TRUE(four.passed);
}

TEST(LevelPipeline, MatchesLinearScanOnRandomProfiles) {
  EvalConfig cfg;
  const TerrainKind terrain = TerrainKind::kSlopeUp;
  Rng rng(2026);
  for (int trial = 0; trial < 8; ++trial) {
    ReferenceDynamics dyn;
    auto& prof = dyn.capability[static_cast<int>(terrain)].pass_fraction;
    for (auto& p : prof) p = rng.uniform();
    std::sort(prof.begin(), prof.end(), std::greater<>());
    ReferenceSim sim(cfg.sim, cfg.robot, dyn);
    TerrainCache cache(cfg);
    const auto policy = scripted_policy(ScriptedKind::kTrotTracker);
    int oracle = 0;
    for (int level = 1; level <= kNumLevels; ++level) {
      if (!probe_level(terrain, full_friction(), level, sim, policy, cfg, cache).passed) break;
      oracle = level;
    }
    const CellScore c = level_pipeline(terrain, full_friction(), sim, policy, cfg, cache,
                                       {.evaluate_quality = false});
    EXPECT_EQ(c.level_star, oracle) << "profile " << trial;
  }
}

class ThrowingSim final : public Simulator {
 public:
  explicit ThrowingSim(const EvalConfig& cfg) : cfg_(cfg.sim), robot_(cfg.robot) {}
  RobotState reset(const Heightfield&, const DomainRandomization&, std::uint64_t) override {
    throw Error("backend closed");
  }
  RobotState step(const JointVector&) override { throw Error("backend closed"); }
  bool fallen() const override { return false; }
  const SimConfig& config() const override { return cfg_; }
  const RobotDescription& robot() const override { return robot_; }

 private:
  SimConfig cfg_;
  RobotDescription robot_;
};

TEST(MultiPipeline, ErroredCellsAreRetriedOnceAndKept) {
  EvalConfig cfg = small_config();
  std::atomic<int> created{0};
  SimulatorFactory sims = [&]() -> std::unique_ptr<Simulator> {
    ++created;
    return std::make_unique<ThrowingSim>(cfg);
  };
  std::vector<std::string> events;
  const auto cells = multi_pipeline(canonical_cells(cfg), sims, scripted_policy(ScriptedKind::kStand),
                                    cfg, 1, [&](const nlohmann::json& e) { events.push_back(e["event"]); });
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells) {
    EXPECT_TRUE(c.errored);
    EXPECT_NE(c.error.find("backend closed"), std::string::npos);
    EXPECT_EQ(c.score, 0.0);
  }
  EXPECT_EQ(std::count(events.begin(), events.end(), "cell_error"), 8);
  EXPECT_EQ(std::count(events.begin(), events.end(), "cell_done"), 4);
  EXPECT_EQ(created.load(), 8);
}

TEST(MultiPipeline, WorkerCountDoesNotChangeResults) {
  EvalConfig cfg = small_config();
  const auto sims = reference_sim_factory(cfg.sim, cfg.robot);
  const auto policy = scripted_policy(ScriptedKind::kTrotTracker);
  cfg.workers = 1;
  const ScoreTree one = stress_pipeline(sims, policy, cfg);
  cfg.workers = 3;
  const ScoreTree three = stress_pipeline(sims, policy, cfg);
  EXPECT_EQ(to_json(one).dump(), to_json(three).dump());
  EXPECT_GT(one.score, 0.0);
  EXPECT_LE(one.score, 1.0);
  ASSERT_EQ(one.cells.size(), 4u);
  EXPECT_EQ(one.cells[0].terrain, "flat");
  EXPECT_EQ(one.cells[3].terrain, "stairs_up");
}

TEST(StressPipeline, IdealDynamicsScoresOne) {
  EvalConfig cfg = small_config();
  const ScoreTree t = stress_pipeline(reference_sim_factory(cfg.sim, cfg.robot, ReferenceDynamics::all_capable()),
                                      scripted_policy(ScriptedKind::kTrotTracker), cfg);
  EXPECT_NEAR(t.score, 1.0, 1e-12);
}

}  // namespace
}  // namespace locogauge
