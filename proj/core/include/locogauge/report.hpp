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
 * report.hpp
 *
 * Human and machine summaries of a ScoreTree. The table and the CSV format
 * every number through the same routine, so they agree digit for digit.
 * The `key` column names the tree node a row comes from:
 * "terrain_scores/<terrain>" or "score".
 */

#ifndef LOCOGAUGE_REPORT_HPP_
#define LOCOGAUGE_REPORT_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "locogauge/scoring.hpp"

namespace locogauge {

/// Fixed precision used by every report.
std::string format_number(double v);

/// Fixed-width table: Terrain, Score, Tracking, Safety, Quality, Level.
/// Category columns print mean and population std. An empty tree prints
/// the header only and appends a warning. Errored cells are listed below
/// the table.
std::string render_summary(const ScoreTree& tree, std::vector<std::string>* warnings = nullptr);

void write_summary_csv(const ScoreTree& tree, std::ostream& out);
/// terrain,score per terrain, for radar plots.
void write_radar_csv(const ScoreTree& tree, std::ostream& out);
/// One row per cell with level, quality and score.
void write_cells_csv(const ScoreTree& tree, std::ostream& out);

}  // namespace locogauge

#endif  // LOCOGAUGE_REPORT_HPP_
