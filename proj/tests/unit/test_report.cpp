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

#include <sstream>

#include "locogauge/report.hpp"
#include "test_support.hpp"

namespace locogauge {
namespace {

using testing::constant_cell;
using testing::synthetic_tree;

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, sep);) out.push_back(f);
  return out;
}

ScoreTree two_terrain_tree() {
  const std::vector<std::string> terrains{"flat", "stairs_up"};
  const std::vector<std::string> drs{"friction_0.2", "friction_1.0"};
  return synthetic_tree(terrains, drs, [&](std::size_t i, std::size_t j) {
    MetricVector m = MetricVector::constant(0.6 + 0.1 * static_cast<double>(i + j));
    return constant_cell(terrains[i], drs[j], static_cast<int>(3 + 2 * i + j), m);
  });
}

TEST(FormatNumber, FourDecimals) {
  EXPECT_EQ(format_number(0.5), "0.5000");
  EXPECT_EQ(format_number(1.0 / 7.0), "0.1429");
  EXPECT_EQ(format_number(0.0), "0.0000");
}

TEST(Summary, EmptyTreeHasHeaderAndWarning) {
  ScoreTree t;
  std::vector<std::string> warnings;
  const auto text = lines(render_summary(t, &warnings));
  ASSERT_EQ(text.size(), 1u);
  EXPECT_NE(text[0].find("Terrain"), std::string::npos);
  ASSERT_EQ(warnings.size(), 1u);
  std::ostringstream csv;
  write_summary_csv(t, csv);
  EXPECT_EQ(lines(csv.str()).size(), 1u);
}

TEST(Summary, SingleCell) {
  auto t = synthetic_tree({"wave"}, {"a"}, [](std::size_t, std::size_t) {
    return constant_cell("wave", "a", 5, MetricVector::constant(0.8));
  });
  const auto text = lines(render_summary(t));
  ASSERT_EQ(text.size(), 3u);
  EXPECT_EQ(text[1].rfind("wave", 0), 0u);
  EXPECT_NE(text[1].find("0.5120"), std::string::npos);
  EXPECT_EQ(text[2].rfind("overall", 0), 0u);
}

TEST(Summary, TableAndCsvAgree) {
  const ScoreTree t = two_terrain_tree();
  std::ostringstream csv;
  write_summary_csv(t, csv);
  const auto rows = lines(csv.str());
  const auto table = lines(render_summary(t));
  ASSERT_EQ(rows.size(), 4u);
  ASSERT_EQ(table.size(), 4u);
  EXPECT_EQ(split(rows[1], ',')[0], "terrain_scores/flat");
  EXPECT_EQ(split(rows[3], ',')[0], "score");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto f = split(rows[r], ',');
    ASSERT_EQ(f.size(), 11u);
    EXPECT_EQ(table[r].rfind(f[1], 0), 0u);
    for (int k : {2, 3, 4, 9}) EXPECT_NE(table[r].find(f[k]), std::string::npos) << rows[r];
  }
  EXPECT_EQ(split(rows[3], ',')[2], format_number(t.score));
}

TEST(Summary, ErroredCellsAreListed) {
  ScoreTree t = two_terrain_tree();
  t.cells[1].errored = true;
  t.cells[1].error = "backend closed";
  recompute(t);
  std::vector<std::string> warnings;
  const std::string text = render_summary(t, &warnings);
  EXPECT_NE(text.find("flat/friction_1.0: backend closed"), std::string::npos);
  ASSERT_EQ(warnings.size(), 1u);
  std::ostringstream cells;
  write_cells_csv(t, cells);
  const auto rows = lines(cells.str());
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(split(rows[2], ',').back(), "1");
  EXPECT_EQ(split(rows[1], ',').back(), "0");
}

TEST(Radar, OneRowPerTerrain) {
  const ScoreTree t = two_terrain_tree();
  std::ostringstream out;
  write_radar_csv(t, out);
  const auto rows = lines(out.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "terrain,score");
  EXPECT_EQ(rows[2], "stairs_up," + format_number(t.terrain_scores[1].score));
}

}  // namespace
}  // namespace locogauge
