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

#include "locogauge/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

namespace locogauge {
namespace {

Aggregation aggregation_from_string(const std::string& name) {
  if (name == "worst50") return Aggregation::kWorst50;
  if (name == "mean") return Aggregation::kMean;
  if (name == "top25") return Aggregation::kTop25;
  throw FormatError(fmt::format("unknown aggregation '{}'", name));
}

CategoryStat stat(const std::vector<double>& values) {
  CategoryStat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

GroupSummary summarize(const std::string& label, double score,
                       const std::vector<const CellScore*>& cells) {
  GroupSummary g;
  g.label = label;
  g.score = score;
  g.cells = static_cast<int>(cells.size());
  std::vector<double> tracking, safety, quality;
  double level = 0.0;
  for (const CellScore* c : cells) {
    tracking.push_back(c->metrics[kLinTracking]);
    tracking.push_back(c->metrics[kAngTracking]);
    safety.push_back(c->metrics[kDofPower]);
    safety.push_back(c->metrics[kDofLimits]);
    quality.push_back(c->metrics[kOrientation]);
    quality.push_back(c->metrics[kSmoothness]);
    level += c->level_star;
  }
  g.tracking = stat(tracking);
  g.safety = stat(safety);
  g.quality = stat(quality);
  g.level = cells.empty() ? 0.0 : level / static_cast<double>(cells.size());
  return g;
}

}  // namespace

void validate(const ScoreWeights& w) {
  for (double e : w.exponents) {
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgument("score weights: exponents must be positive");
  }
  if (!(w.alpha > 0.0) || !(w.beta > 0.0)) throw InvalidArgument("score weights: alpha and beta must be positive");
  if (!(w.beta > w.alpha)) throw InvalidArgument("score weights: beta must exceed alpha");
  if (w.alpha * (kNumLevels - 1) + w.beta > 1.0 + 1e-12) {
    throw InvalidArgument("score weights: 9 alpha + beta must not exceed 1");
  }
}

nlohmann::json to_json(const ScoreWeights& w) {
  return {{"exponents", w.exponents}, {"alpha", w.alpha}, {"beta", w.beta}};
}

ScoreWeights score_weights_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("score weights: must be an object");
  ScoreWeights w;
  for (const auto& [key, value] : j.items()) {
    if (key == "alpha") {
      w.alpha = value.get<double>();
    } else if (key == "beta") {
      w.beta = value.get<double>();
    } else if (key == "exponents") {
      if (!value.is_array() || value.size() != kNumMetrics) {
        throw InvalidArgument("score weights: exponents must have six entries");
      }
      for (int i = 0; i < kNumMetrics; ++i) w.exponents[i] = value[i].get<double>();
    } else {
      throw InvalidArgument(fmt::format("score weights: unknown key '{}'", key));
    }
  }
  validate(w);
  return w;
}

double quality_score(const MetricVector& m, const std::array<double, kNumMetrics>& exponents) {
  double log_sum = 0.0, total = 0.0;
  for (double e : exponents) total += e;
  double lo = 1.0, hi = 0.0;
  bool zero = false;
  for (int k = 0; k < kNumMetrics; ++k) {
    if (!(m[k] >= 0.0 && m[k] <= 1.0)) {
      throw InvalidArgument(fmt::format("quality: {} = {} outside [0, 1]", metric_name(k), m[k]));
    }
    if (!(exponents[k] > 0.0)) throw InvalidArgument("quality: exponents must be positive");
    lo = std::min(lo, m[k]);
    hi = std::max(hi, m[k]);
    if (m[k] == 0.0) {
      zero = true;
      continue;
    }
    log_sum += exponents[k] * std::log(m[k]);
  }
  if (zero) return 0.0;
  // exp/log round trips can leave the range by an ulp.
  return std::clamp(std::exp(log_sum / total), lo, hi);
}

double terrain_score(int level_star, double quality, double alpha, double beta) {
  if (level_star < 0 || level_star > kNumLevels) {
    throw InvalidArgument(fmt::format("terrain score: level {} outside 0..10", level_star));
  }
  if (level_star == 0) return beta * quality;
  return alpha * (level_star - 1) + beta * quality;
}

MetricVector cell_metrics(const CellScore& cell, Aggregation mode) {
  if (cell.leaves.empty()) throw InvalidArgument(fmt::format("cell {}/{}: no leaves", cell.terrain, cell.dr));
  std::map<int, std::vector<MetricVector>> per_seed;
  for (const auto& leaf : cell.leaves) {
    if (leaf.trials.empty()) {
      throw InvalidArgument(fmt::format("cell {}/{}: goal {} seed {} has no trials", cell.terrain,
                                        cell.dr, leaf.goal, leaf.seed_index));
    }
    per_seed[leaf.seed_index].push_back(aggregate_goal_scores(leaf.trials, mode));
  }
  std::vector<MetricVector> seeds;
  for (const auto& [index, goals] : per_seed) seeds.push_back(mean_of(goals));
  return average_over_seeds(seeds, cell.metric_seeds);
}

void score_cell(CellScore& cell, const ScoreWeights& weights, Aggregation mode) {
  cell.level_star = 0;
  for (const auto& p : cell.search) {
    if (p.passed) cell.level_star = std::max(cell.level_star, p.level);
  }
  if (cell.errored) {
    cell.metrics = cell.metrics_mean = cell.metrics_top25 = MetricVector::constant(0.0);
    cell.quality = cell.quality_mean = cell.quality_top25 = 0.0;
    cell.score = 0.0;
    return;
  }
  const int scored_level = std::max(cell.level_star, 1);
  for (const auto& leaf : cell.leaves) {
    if (leaf.level != scored_level) {
      throw InvalidArgument(fmt::format("cell {}/{}: leaf at level {}, scored level is {}",
                                        cell.terrain, cell.dr, leaf.level, scored_level));
    }
  }
  cell.metrics = cell_metrics(cell, mode);
  cell.metrics_mean = cell_metrics(cell, Aggregation::kMean);
  cell.metrics_top25 = cell_metrics(cell, Aggregation::kTop25);
  cell.quality = quality_score(cell.metrics, weights.exponents);
  cell.quality_mean = quality_score(cell.metrics_mean, weights.exponents);
  cell.quality_top25 = quality_score(cell.metrics_top25, weights.exponents);
  cell.score = terrain_score(cell.level_star, cell.quality, weights.alpha, weights.beta);
}

AggregateResult aggregate(const std::vector<CellScore>& cells,
                          const std::vector<std::string>& terrains,
                          const std::vector<std::string>& drs) {
  std::map<std::pair<std::string, std::string>, const CellScore*> index;
  std::vector<std::string> problems;
  for (const auto& c : cells) {
    const bool known = std::find(terrains.begin(), terrains.end(), c.terrain) != terrains.end() &&
                       std::find(drs.begin(), drs.end(), c.dr) != drs.end();
    if (!known) problems.push_back(fmt::format("unexpected cell {}/{}", c.terrain, c.dr));
    if (!index.emplace(std::make_pair(c.terrain, c.dr), &c).second) {
      problems.push_back(fmt::format("duplicate cell {}/{}", c.terrain, c.dr));
    }
  }
  for (const auto& t : terrains) {
    for (const auto& d : drs) {
      if (!index.contains({t, d})) problems.push_back(fmt::format("missing cell {}/{}", t, d));
    }
  }
  if (!problems.empty()) {
    std::string msg = "aggregate:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw InvalidArgument(msg);
  }
  if (terrains.empty() || drs.empty()) throw InvalidArgument("aggregate: no terrains or no DR presets");

  AggregateResult out;
  double total = 0.0;
  for (const auto& t : terrains) {
    double sum = 0.0;
    for (const auto& d : drs) sum += index.at({t, d})->score;
    const double mean = sum / static_cast<double>(drs.size());
    out.terrains.push_back({t, mean, static_cast<int>(drs.size())});
    total += mean;
  }
  out.score = total / static_cast<double>(terrains.size());
  return out;
}

void recompute(ScoreTree& tree) {
  validate(tree.weights);
  for (auto& c : tree.cells) score_cell(c, tree.weights, tree.aggregation);
  const AggregateResult agg = aggregate(tree.cells, tree.terrains, tree.drs);
  tree.terrain_scores = agg.terrains;
  tree.score = agg.score;
}

nlohmann::json to_json(const ScoreTree& tree) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : tree.cells) {
    nlohmann::json search = nlohmann::json::array();
    for (const auto& p : c.search) {
      search.push_back({{"level", p.level}, {"successes", p.successes},
                        {"attempts", p.attempts}, {"passed", p.passed}});
    }
    nlohmann::json leaves = nlohmann::json::array();
    for (const auto& l : c.leaves) {
      nlohmann::json trials = nlohmann::json::array();
      for (const auto& m : l.trials) trials.push_back(to_json(m));
      leaves.push_back({{"level", l.level}, {"goal", l.goal}, {"seed_index", l.seed_index},
                        {"seed", l.seed}, {"trials", trials}, {"fallen", l.fallen}});
    }
    cells.push_back({{"terrain", c.terrain},
                     {"dr", c.dr},
                     {"search", search},
                     {"leaves", leaves},
                     {"metric_seeds", c.metric_seeds},
                     {"errored", c.errored},
                     {"error", c.error},
                     {"level_star", c.level_star},
                     {"metrics", to_json(c.metrics)},
                     {"metrics_mean", to_json(c.metrics_mean)},
                     {"metrics_top25", to_json(c.metrics_top25)},
                     {"quality", c.quality},
                     {"quality_mean", c.quality_mean},
                     {"quality_top25", c.quality_top25},
                     {"score", c.score}});
  }
  nlohmann::json terrains = nlohmann::json::array();
  for (const auto& t : tree.terrain_scores) {
    terrains.push_back({{"terrain", t.terrain}, {"score", t.score}, {"cells", t.cells}});
  }
  return {{"provenance", tree.provenance},
          {"weights", to_json(tree.weights)},
          {"aggregation", to_string(tree.aggregation)},
          {"terrains", tree.terrains},
          {"drs", tree.drs},
          {"cells", cells},
          {"terrain_scores", terrains},
          {"score", tree.score}};
}

ScoreTree score_tree_from_json(const nlohmann::json& j) {
  try {
    ScoreTree t;
    t.provenance = j.at("provenance");
    t.weights = score_weights_from_json(j.at("weights"));
    t.aggregation = aggregation_from_string(j.at("aggregation").get<std::string>());
    t.terrains = j.at("terrains").get<std::vector<std::string>>();
    t.drs = j.at("drs").get<std::vector<std::string>>();
    for (const auto& cj : j.at("cells")) {
      CellScore c;
      c.terrain = cj.at("terrain").get<std::string>();
      c.dr = cj.at("dr").get<std::string>();
      for (const auto& p : cj.at("search")) {
        c.search.push_back({p.at("level").get<int>(), p.at("successes").get<int>(),
                            p.at("attempts").get<int>(), p.at("passed").get<bool>()});
      }
      for (const auto& lj : cj.at("leaves")) {
        ScoreLeaf l;
        l.level = lj.at("level").get<int>();
        l.goal = lj.at("goal").get<std::string>();
        l.seed_index = lj.at("seed_index").get<int>();
        l.seed = lj.at("seed").get<std::uint64_t>();
        for (const auto& m : lj.at("trials")) l.trials.push_back(metric_vector_from_json(m));
        l.fallen = lj.at("fallen").get<std::vector<bool>>();
        c.leaves.push_back(std::move(l));
      }
      c.metric_seeds = cj.at("metric_seeds").get<int>();
      c.errored = cj.at("errored").get<bool>();
      c.error = cj.at("error").get<std::string>();
      c.level_star = cj.at("level_star").get<int>();
      c.metrics = metric_vector_from_json(cj.at("metrics"));
      c.metrics_mean = metric_vector_from_json(cj.at("metrics_mean"));
      c.metrics_top25 = metric_vector_from_json(cj.at("metrics_top25"));
      c.quality = cj.at("quality").get<double>();
      c.quality_mean = cj.at("quality_mean").get<double>();
      c.quality_top25 = cj.at("quality_top25").get<double>();
      c.score = cj.at("score").get<double>();
      t.cells.push_back(std::move(c));
    }
    for (const auto& tj : j.at("terrain_scores")) {
      t.terrain_scores.push_back({tj.at("terrain").get<std::string>(), tj.at("score").get<double>(),
                                  tj.at("cells").get<int>()});
    }
    t.score = j.at("score").get<double>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("score tree: {}", e.what()));
  }
}

std::vector<GroupSummary> grouped_reports(const ScoreTree& tree) {
  std::vector<GroupSummary> out;
  std::vector<const CellScore*> all;
  for (const auto& ts : tree.terrain_scores) {
    std::vector<const CellScore*> members;
    for (const auto& c : tree.cells) {
      if (c.terrain == ts.terrain) members.push_back(&c);
    }
    out.push_back(summarize(ts.terrain, ts.score, members));
  }
  for (const auto& c : tree.cells) all.push_back(&c);
  out.push_back(summarize("overall", tree.score, all));
  return out;
}

}  // namespace locogauge
