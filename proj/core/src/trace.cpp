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

#include "locogauge/trace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

namespace locogauge {
namespace {

constexpr char kMagic[4] = {'R', 'G', 'T', 'R'};
constexpr std::uint16_t kTraceVersion = 1;
constexpr int kRecordDoubles = 69;

static_assert(std::endian::native == std::endian::little,
              "trace binary assumes a little-endian host");

nlohmann::json header_json(const EpisodeTrace& t) {
  return {{"type", "header"}, {"terrain", t.terrain}, {"dr", t.dr},
          {"level", t.level}, {"goal", t.goal},       {"seed", t.seed},
          {"control_dt", t.control_dt}};
}

void apply_header(const nlohmann::json& h, EpisodeTrace& t) {
  t.terrain = h.at("terrain").get<std::string>();
  t.dr = h.at("dr").get<std::string>();
  t.level = h.at("level").get<int>();
  t.goal = h.at("goal").get<std::string>();
  t.seed = h.at("seed").get<std::uint64_t>();
  t.control_dt = h.at("control_dt").get<double>();
}

JointVector joints_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != kNumJoints) throw FormatError("trace: joint vector must have 12 entries");
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = j[i].get<double>();
  return v;
}

// Binary record: i32 trial, i32 segment, i32 collisions, u8 flags
// (bit0 stop, bit1 fallen, bits 2..5 foot contact), then 69 f64 values.
void pack(const TraceRecord& r, std::string& out) {
  auto put = [&out](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
  const std::int32_t ints[3] = {r.trial, r.segment, r.state.collisions};
  put(ints, sizeof(ints));
  std::uint8_t flags = (r.stop ? 1 : 0) | (r.fallen ? 2 : 0);
  for (int f = 0; f < kNumFeet; ++f) flags |= r.state.foot_contact[f] ? (4 << f) : 0;
  put(&flags, 1);
  double d[kRecordDoubles];
  int k = 0;
  auto add = [&](const auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) d[k++] = v[i];
  };
  d[k++] = r.time;
  d[k++] = r.command.vx;
  d[k++] = r.command.vy;
  d[k++] = r.command.wz;
  add(r.state.base_position);
  const auto& q = r.state.base_orientation;
  d[k++] = q.w();
  d[k++] = q.x();
  d[k++] = q.y();
  d[k++] = q.z();
  add(r.state.lin_vel);
  add(r.state.ang_vel);
  add(r.state.q);
  add(r.state.dq);
  add(r.state.tau);
  add(r.state.projected_gravity);
  add(r.action);
  d[k++] = r.terrain_height;
  put(d, sizeof(d));
}

TraceRecord unpack(const char* p) {
  TraceRecord r;
  std::int32_t ints[3];
  std::memcpy(ints, p, sizeof(ints));
  p += sizeof(ints);
  r.trial = ints[0];
  r.segment = ints[1];
  r.state.collisions = ints[2];
  const auto flags = static_cast<std::uint8_t>(*p++);
  r.stop = flags & 1;
  r.fallen = flags & 2;
  for (int f = 0; f < kNumFeet; ++f) r.state.foot_contact[f] = flags & (4 << f);
  double d[kRecordDoubles];
  std::memcpy(d, p, sizeof(d));
  int k = 0;
  auto take = [&](auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = d[k++];
  };
  r.time = d[k++];
  r.command = {d[k], d[k + 1], d[k + 2]};
  k += 3;
  take(r.state.base_position);
  r.state.base_orientation = Eigen::Quaterniond(d[k], d[k + 1], d[k + 2], d[k + 3]);
  k += 4;
  take(r.state.lin_vel);
  take(r.state.ang_vel);
  take(r.state.q);
  take(r.state.dq);
  take(r.state.tau);
  take(r.state.projected_gravity);
  take(r.action);
  r.terrain_height = d[k++];
  return r;
}

constexpr std::size_t kRecordBytes = 3 * sizeof(std::int32_t) + 1 + kRecordDoubles * sizeof(double);

}  // namespace

std::span<const TraceRecord> EpisodeTrace::trial(int index) const {
  auto first = std::find_if(records.begin(), records.end(),
                            [index](const TraceRecord& r) { return r.trial == index; });
  auto last = std::find_if(first, records.end(),
                           [index](const TraceRecord& r) { return r.trial != index; });
  return {first, last};
}

std::vector<int> EpisodeTrace::trials() const {
  std::vector<int> out;
  for (const auto& r : records) {
    if (out.empty() || out.back() != r.trial) out.push_back(r.trial);
  }
  return out;
}

void validate(const EpisodeTrace& trace) {
  if (!(trace.control_dt > 0.0)) throw InvalidArgument("trace: control_dt must be positive");
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (i > 0) {
      const double dt = r.time - trace.records[i - 1].time;
      if (std::abs(dt - trace.control_dt) > 1e-9) {
        throw InvalidArgument(fmt::format("trace: record {} is {} s after its predecessor", i, dt));
      }
    }
    const auto& s = r.state;
    const bool finite = std::isfinite(r.time) && s.base_position.allFinite() &&
                        s.lin_vel.allFinite() && s.ang_vel.allFinite() && s.q.allFinite() &&
                        s.dq.allFinite() && s.tau.allFinite() && s.projected_gravity.allFinite() &&
                        r.action.allFinite() && std::isfinite(r.command.vx) &&
                        std::isfinite(r.command.vy) && std::isfinite(r.command.wz) &&
                        std::isfinite(r.terrain_height);
    if (!finite) throw InvalidArgument(fmt::format("trace: record {} is not finite", i));
  }
}

void write_ndjson(const EpisodeTrace& trace, std::ostream& out) {
  out << header_json(trace).dump() << '\n';
  for (const auto& r : trace.records) {
    nlohmann::json action = nlohmann::json::array();
    for (double a : r.action) action.push_back(a);
    const nlohmann::json j{{"t", r.time},
                           {"trial", r.trial},
                           {"segment", r.segment},
                           {"stop", r.stop},
                           {"cmd", {r.command.vx, r.command.vy, r.command.wz}},
                           {"state", to_json(r.state)},
                           {"action", action},
                           {"terrain_height", r.terrain_height},
                           {"fallen", r.fallen}};
    out << j.dump() << '\n';
  }
  if (!out) throw Error("trace: write failed");
}

EpisodeTrace read_ndjson(std::istream& in) {
  EpisodeTrace t;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        if (j.value("type", "") != "header") throw FormatError("first line must be the header");
        apply_header(j, t);
        have_header = true;
        continue;
      }
      TraceRecord r;
      r.time = j.at("t").get<double>();
      r.trial = j.at("trial").get<int>();
      r.segment = j.at("segment").get<int>();
      r.stop = j.at("stop").get<bool>();
      const auto& c = j.at("cmd");
      r.command = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
      r.state = state_from_json(j.at("state"));
      r.action = joints_from(j.at("action"));
      r.terrain_height = j.at("terrain_height").get<double>();
      r.fallen = j.at("fallen").get<bool>();
      t.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(fmt::format("trace line {}: {}", line_no, e.what()));
    } catch (const InvalidArgument& e) {
      throw FormatError(fmt::format("trace line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw FormatError("trace: missing header");
  return t;
}

void write_trace_binary(const EpisodeTrace& trace, std::ostream& out) {
  const std::string header = header_json(trace).dump();
  const auto length = static_cast<std::uint32_t>(header.size());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kTraceVersion), sizeof(kTraceVersion));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::string body;
  body.reserve(trace.records.size() * kRecordBytes);
  for (const auto& r : trace.records) pack(r, body);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error("trace: write failed");
}

EpisodeTrace read_trace_binary(std::istream& in) {
  char magic[4];
  std::uint16_t version = 0;
  std::uint32_t length = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("trace: bad magic");
  if (!in.read(reinterpret_cast<char*>(&version), sizeof(version)) ||
      !in.read(reinterpret_cast<char*>(&length), sizeof(length))) {
    throw FormatError("trace: truncated preamble");
  }
  if (version != kTraceVersion) throw FormatError(fmt::format("trace: unsupported version {}", version));
  std::string header(length, '\0');
  if (!in.read(header.data(), length)) throw FormatError("trace: truncated header");
  EpisodeTrace t;
  try {
    apply_header(nlohmann::json::parse(header), t);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("trace: bad header ({})", e.what()));
  }
  const std::string body{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (body.size() % kRecordBytes != 0) throw FormatError("trace: truncated record");
  for (std::size_t pos = 0; pos < body.size(); pos += kRecordBytes) {
    t.records.push_back(unpack(body.data() + pos));
  }
  return t;
}

void save_trace(const EpisodeTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("trace: cannot open {}", path.string()));
  if (path.extension() == ".rgtr") {
    write_trace_binary(trace, out);
  } else {
    write_ndjson(trace, out);
  }
}

EpisodeTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("trace: cannot open {}", path.string()));
  return path.extension() == ".rgtr" ? read_trace_binary(in) : read_ndjson(in);
}

}  // namespace locogauge
