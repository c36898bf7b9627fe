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

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "locogauge/trace.hpp"
#include "test_support.hpp"

namespace locogauge {
namespace {

EpisodeTrace random_trace(std::uint64_t seed) {
  Rng rng(seed);
  EpisodeTrace t;
  t.terrain = "wave";
  t.dr = "friction_0.6";
  t.level = 4;
  t.goal = "max_velocity";
  t.seed = 123456789012345ull;
  const auto robot = default_quadruped();
  for (int i = 0; i < 30; ++i) {
    TraceRecord r;
    r.time = (i + 1) * t.control_dt;
    r.trial = i / 10;
    r.segment = i / 5;
    r.stop = (i / 5) % 2 == 1;
    r.command = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    r.state = testing::standing_state(robot);
    r.state.base_position.x() += rng.uniform(0, 1);
    r.state.lin_vel = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    r.state.q = testing::random_joints(rng, -1, 1);
    r.state.dq = testing::random_joints(rng, -5, 5);
    r.state.tau = testing::random_joints(rng, -20, 20);
    r.state.foot_contact = {true, i % 2 == 0, false, true};
    r.state.collisions = i % 3;
    r.action = testing::random_joints(rng, -0.5, 0.5);
    r.terrain_height = rng.uniform(-0.1, 0.1);
    r.fallen = i == 29;
    t.records.push_back(r);
  }
  return t;
}

void expect_same(const EpisodeTrace& a, const EpisodeTrace& b) {
  EXPECT_EQ(a.terrain, b.terrain);
  EXPECT_EQ(a.dr, b.dr);
  EXPECT_EQ(a.level, b.level);
  EXPECT_EQ(a.goal, b.goal);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.control_dt, b.control_dt);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    ASSERT_EQ(x.time, y.time);
    ASSERT_EQ(x.trial, y.trial);
    ASSERT_EQ(x.segment, y.segment);
    ASSERT_EQ(x.stop, y.stop);
    ASSERT_EQ(x.fallen, y.fallen);
    ASSERT_EQ(x.command, y.command);
    ASSERT_EQ(x.action, y.action);
    ASSERT_EQ(x.terrain_height, y.terrain_height);
    ASSERT_EQ(to_json(x.state).dump(), to_json(y.state).dump());
  }
}

TEST(Trace, NdjsonRoundTripIsExact) {
  const auto t = random_trace(1);
  std::stringstream ss;
  write_ndjson(t, ss);
  expect_same(t, read_ndjson(ss));
}

TEST(Trace, BinaryRoundTripIsExact) {
  const auto t = random_trace(2);
  std::stringstream ss;
  write_trace_binary(t, ss);
  EXPECT_EQ(ss.str().substr(0, 4), "RGTR");
  expect_same(t, read_trace_binary(ss));
}

TEST(Trace, FormatsAgreeThroughFiles) {
  const auto t = random_trace(3);
  const auto dir = std::filesystem::temp_directory_path() / "locogauge_trace_test";
  std::filesystem::create_directories(dir);
  save_trace(t, dir / "t.ndjson");
  save_trace(t, dir / "t.rgtr");
  expect_same(load_trace(dir / "t.ndjson"), load_trace(dir / "t.rgtr"));
  std::filesystem::remove_all(dir);
}

TEST(Trace, TrialViews) {
  const auto t = random_trace(4);
  EXPECT_EQ(t.trials(), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(t.trial(1).size(), 10u);
  EXPECT_EQ(t.trial(1).front().trial, 1);
  EXPECT_TRUE(t.trial(7).empty());
}

TEST(Trace, ValidateRejectsBadTiming) {
  auto t = random_trace(5);
  EXPECT_NO_THROW(validate(t));
  t.records[10].time += 0.001;
  EXPECT_THROW(validate(t), InvalidArgument);
  t = random_trace(5);
  t.records[3].state.tau[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(t), InvalidArgument);
}

TEST(Trace, ReadersRejectGarbage) {
  std::istringstream no_header("{\"time\": 0.02}\n");
  EXPECT_THROW(read_ndjson(no_header), FormatError);
  std::istringstream bad_magic("XXXX");
  EXPECT_THROW(read_trace_binary(bad_magic), FormatError);
  const auto t = random_trace(6);
  std::stringstream ss;
  write_trace_binary(t, ss);
  std::istringstream cut(ss.str().substr(0, ss.str().size() - 5));
  EXPECT_THROW(read_trace_binary(cut), FormatError);
}

}  // namespace
}  // namespace locogauge
