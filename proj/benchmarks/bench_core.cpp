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

#include <benchmark/benchmark.h>

#include "locogauge/goals.hpp"
#include "locogauge/metrics.hpp"
#include "locogauge/pipelines.hpp"
#include "locogauge/policy.hpp"
#include "locogauge/reference_sim.hpp"
#include "locogauge/scoring.hpp"
#include "locogauge/terrain.hpp"

namespace locogauge {
namespace {

void BM_GenerateTerrain(benchmark::State& state) {
  TerrainSpec spec;
  spec.kind = static_cast<TerrainKind>(state.range(0));
  spec.difficulty = 0.7;
  spec.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(generate(spec));
  state.SetLabel(std::string(to_string(spec.kind)));
}
BENCHMARK(BM_GenerateTerrain)->DenseRange(0, kNumTerrainKinds - 1);

void BM_MoeForward(benchmark::State& state) {
  MoeArchitecture arch;
  arch.num_experts = static_cast<int>(state.range(0));
  const MoeNetwork net = MoeNetwork::random(arch, 1);
  Rng rng(2);
  Eigen::VectorXd x(arch.input_dim());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MoeForward)->Arg(1)->Arg(4)->Arg(8);

void BM_ReferenceSimStep(benchmark::State& state) {
  TerrainSpec spec;
  spec.kind = TerrainKind::kStairsUp;
  spec.difficulty = 0.3;
  const Heightfield hf = generate(spec);
  ReferenceSim sim(SimConfig{}, default_quadruped());
  auto controller = scripted_policy(ScriptedKind::kTrotTracker)();
  RobotState s = sim.reset(hf, DomainRandomization{}, 1);
  const Command cmd{1.0, 0.0, 0.0};
  sim.set_command(cmd);
  const Observation first = observe(s, cmd, JointVector::Zero(), sim.robot(), SimConfig{}.noise, nullptr);
  controller->reset(first);
  JointVector prev = JointVector::Zero();
  int steps = 0;
  for (auto _ : state) {
    const Observation obs = observe(s, cmd, prev, sim.robot(), SimConfig{}.noise, nullptr);
    prev = controller->act(obs);
    s = sim.step(prev);
    if (++steps == 500 || sim.fallen()) {
      state.PauseTiming();
      s = sim.reset(hf, DomainRandomization{}, 1);
      steps = 0;
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_ReferenceSimStep);

void BM_BasePipelineFlat(benchmark::State& state) {
  EvalConfig cfg;
  TerrainCache cache(cfg);
  const auto hf = cache.get(TerrainKind::kFlat, 1);
  ReferenceSim sim(cfg.sim, cfg.robot);
  const auto policy = scripted_policy(ScriptedKind::kTrotTracker);
  BaseRequest req;
  req.dr = default_dr_set().back();
  req.goals = cfg.goal_set;
  for (auto _ : state) benchmark::DoNotOptimize(base_pipeline(req, *hf, sim, policy, cfg));
}
BENCHMARK(BM_BasePipelineFlat)->Unit(benchmark::kMillisecond);

void BM_QualityScore(benchmark::State& state) {
  const MetricVector m{{0.9, 0.9, 0.8, 0.8, 0.8, 0.8}};
  const ScoreWeights w;
  for (auto _ : state) benchmark::DoNotOptimize(quality_score(m, w.exponents));
}
BENCHMARK(BM_QualityScore);

}  // namespace
}  // namespace locogauge

BENCHMARK_MAIN();
