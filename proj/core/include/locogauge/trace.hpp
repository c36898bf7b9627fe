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
 * trace.hpp
 *
 * Per-control-step episode record consumed by metrics and reward replay.
 * Trials of a goal share one trace; the simulator is reset at every trial
 * boundary while time keeps advancing by one control period per record.
 */

#ifndef LOCOGAUGE_TRACE_HPP_
#define LOCOGAUGE_TRACE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "locogauge/sim.hpp"

namespace locogauge {

struct TraceRecord {
  double time = 0.0;  // s, end of the control step
  int trial = 0;
  int segment = 0;    // index into the goal schedule
  bool stop = false;  // braking segment
  Command command;
  RobotState state;   // after the step
  JointVector action = JointVector::Zero();
  double terrain_height = 0.0;  // ground under the base
  bool fallen = false;
};

struct EpisodeTrace {
  std::string terrain;
  std::string dr;
  int level = 0;
  std::string goal;
  std::uint64_t seed = 0;
  double control_dt = 0.02;
  std::vector<TraceRecord> records;

  /// Records of one trial, in order.
  std::span<const TraceRecord> trial(int index) const;
  std::vector<int> trials() const;
};

/// Throws InvalidArgument unless times advance by exactly control_dt (1e-9)
/// and every record is finite.
void validate(const EpisodeTrace& trace);

/// NDJSON: one header object, then one object per record.
void write_ndjson(const EpisodeTrace& trace, std::ostream& out);
EpisodeTrace read_ndjson(std::istream& in);

/// "RGTR", u16 version, u32 header length, JSON header, then fixed-width
/// little-endian records (layout in docs/formats.md).
void write_trace_binary(const EpisodeTrace& trace, std::ostream& out);
EpisodeTrace read_trace_binary(std::istream& in);

/// Picks the format from the extension: .ndjson/.jsonl or .rgtr.
void save_trace(const EpisodeTrace& trace, const std::filesystem::path& path);
EpisodeTrace load_trace(const std::filesystem::path& path);

}  // namespace locogauge

#endif  // LOCOGAUGE_TRACE_HPP_
