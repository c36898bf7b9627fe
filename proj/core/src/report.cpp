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

#include "locogauge/report.hpp"

#include <ostream>

#include <fmt/format.h>

namespace locogauge {
namespace {

std::string row_key(const GroupSummary& g) {
  return g.label == "overall" ? "score" : "terrain_scores/" + g.label;
}

std::string pm(const CategoryStat& s) {
  return format_number(s.mean) + "+-" + format_number(s.std);
}

}  // namespace

std::string format_number(double v) { return fmt::format("{:.4f}", v); }

std::string render_summary(const ScoreTree& tree, std::vector<std::string>* warnings) {
  std::string out = fmt::format("{:<12} {:>8} {:>16} {:>16} {:>16} {:>8}\n", "Terrain", "Score",
                                "Tracking", "Safety", "Quality", "Level");
  if (tree.cells.empty()) {
    if (warnings) warnings->push_back("score tree has no cells");
    return out;
  }
  for (const auto& g : grouped_reports(tree)) {
    out += fmt::format("{:<12} {:>8} {:>16} {:>16} {:>16} {:>8}\n", g.label, format_number(g.score),
                       pm(g.tracking), pm(g.safety), pm(g.quality), format_number(g.level));
  }
  bool header = false;
  for (const auto& c : tree.cells) {
    if (!c.errored) continue;
    if (!header) {
      out += "\nerrored cells:\n";
      header = true;
    }
    out += fmt::format("  {}/{}: {}\n", c.terrain, c.dr, c.error);
    if (warnings) warnings->push_back(fmt::format("cell {}/{} errored", c.terrain, c.dr));
  }
  return out;
}

void write_summary_csv(const ScoreTree& tree, std::ostream& out) {
  out << "key,label,score,tracking_mean,tracking_std,safety_mean,safety_std,quality_mean,quality_std,"
         "level,cells\n";
  if (tree.cells.empty()) return;
  for (const auto& g : grouped_reports(tree)) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", row_key(g), g.label,
                       format_number(g.score), format_number(g.tracking.mean),
                       format_number(g.tracking.std), format_number(g.safety.mean),
                       format_number(g.safety.std), format_number(g.quality.mean),
                       format_number(g.quality.std), format_number(g.level), g.cells);
  }
}

void write_radar_csv(const ScoreTree& tree, std::ostream& out) {
  out << "terrain,score\n";
  for (const auto& t : tree.terrain_scores) {
    out << fmt::format("{},{}\n", t.terrain, format_number(t.score));
  }
}

void write_cells_csv(const ScoreTree& tree, std::ostream& out) {
  out << "terrain,dr,level_star,quality,score,errored\n";
  for (const auto& c : tree.cells) {
    out << fmt::format("{},{},{},{},{},{}\n", c.terrain, c.dr, c.level_star, format_number(c.quality),
                       format_number(c.score), c.errored ? 1 : 0);
  }
}

}  // namespace locogauge
