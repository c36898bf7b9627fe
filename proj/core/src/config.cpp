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

#include "locogauge/config.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <initializer_list>

#include <fmt/format.h>

extern char** environ;

namespace locogauge {
namespace {

using nlohmann::json;

constexpr std::string_view kEnvPrefix = "LOCOGAUGE_";

/// Runs `f`, turning any non-config error into a ConfigError at `ptr`.
template <class F>
auto at(const std::string& ptr, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(ptr.empty() ? "/" : ptr, e.what());
  }
}

void expect_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& ptr) {
  expect_object(j, ptr);
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(ptr + "/" + key, "unknown key");
    }
  }
}

template <class T>
void read(const json& j, std::string_view key, T& out, const std::string& ptr) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  at(ptr + "/" + std::string(key), [&] { out = it->template get<T>(); });
}

NoiseModel noise_from_json(const json& j, const std::string& ptr) {
  reject_unknown(j, {"enabled", "ang_vel", "gravity", "joint_pos", "joint_vel"}, ptr);
  NoiseModel n;
  read(j, "enabled", n.enabled, ptr);
  read(j, "ang_vel", n.ang_vel, ptr);
  read(j, "gravity", n.gravity, ptr);
  read(j, "joint_pos", n.joint_pos, ptr);
  read(j, "joint_vel", n.joint_vel, ptr);
  return n;
}

FallDetection fall_from_json(const json& j, const std::string& ptr) {
  reject_unknown(j, {"min_height", "max_tilt", "hold_time"}, ptr);
  FallDetection f;
  read(j, "min_height", f.min_height, ptr);
  read(j, "max_tilt", f.max_tilt, ptr);
  read(j, "hold_time", f.hold_time, ptr);
  return f;
}

SimConfig sim_config_at(const json& j, const std::string& ptr) {
  reject_unknown(j, {"control_hz", "physics_hz", "kp", "kd", "action_clip", "episode_timeout",
                     "noise", "fall"},
                 ptr);
  SimConfig c;
  read(j, "control_hz", c.control_hz, ptr);
  read(j, "physics_hz", c.physics_hz, ptr);
  read(j, "kp", c.kp, ptr);
  read(j, "kd", c.kd, ptr);
  read(j, "action_clip", c.action_clip, ptr);
  read(j, "episode_timeout", c.episode_timeout, ptr);
  if (j.contains("noise")) c.noise = noise_from_json(j["noise"], ptr + "/noise");
  if (j.contains("fall")) c.fall = fall_from_json(j["fall"], ptr + "/fall");
  at(ptr, [&] { validate(c); });
  return c;
}

std::vector<NamedDr> dr_set_at(const json& j, const std::string& ptr) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "default9") return default_dr_set();
    if (name == "sweep10") return friction_sweep_dr_set();
    throw ConfigError(ptr, fmt::format("unknown DR set '{}'", name));
  }
  if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a preset name or a non-empty array");
  std::vector<NamedDr> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = fmt::format("{}/{}", ptr, i);
    reject_unknown(j[i], {"label", "fields"}, p);
    NamedDr d;
    if (!j[i].contains("label")) throw ConfigError(p + "/label", "missing");
    read(j[i], "label", d.label, p);
    if (d.label.empty() || d.label.find('/') != std::string::npos) {
      throw ConfigError(p + "/label", "must be non-empty and free of '/'");
    }
    if (j[i].contains("fields")) {
      d.dr = at(p + "/fields", [&] {
        auto dr = dr_from_json(j[i]["fields"]);
        validate(dr);
        return dr;
      });
    }
    for (const auto& prev : out) {
      if (prev.label == d.label) throw ConfigError(p + "/label", "duplicate label");
    }
    out.push_back(std::move(d));
  }
  return out;
}

json seeds_to_json(const SeedPlan& s) {
  return {{"root", s.root},
          {"pass_seeds", s.pass_seeds},
          {"pass_threshold", s.pass_threshold},
          {"metric_seeds", s.metric_seeds}};
}

SeedPlan seeds_at(const json& j, const std::string& ptr) {
  reject_unknown(j, {"root", "pass_seeds", "pass_threshold", "metric_seeds", "mode"}, ptr);
  SeedPlan s;
  if (j.contains("mode")) {
    const auto mode = at(ptr + "/mode", [&] { return j["mode"].get<std::string>(); });
    if (mode == "three_of_three") {
      s = SeedPlan::three_of_three();
    } else if (mode != "default") {
      throw ConfigError(ptr + "/mode", fmt::format("unknown seed mode '{}'", mode));
    }
  }
  read(j, "root", s.root, ptr);
  read(j, "pass_seeds", s.pass_seeds, ptr);
  read(j, "pass_threshold", s.pass_threshold, ptr);
  read(j, "metric_seeds", s.metric_seeds, ptr);
  if (s.pass_seeds < 1) throw ConfigError(ptr + "/pass_seeds", "must be >= 1");
  if (s.metric_seeds < 1) throw ConfigError(ptr + "/metric_seeds", "must be >= 1");
  if (!(s.pass_threshold > 0.0 && s.pass_threshold <= 1.0)) {
    throw ConfigError(ptr + "/pass_threshold", "must be in (0, 1]");
  }
  return s;
}

Aggregation aggregation_from_string(const std::string& name) {
  for (Aggregation a : {Aggregation::kWorst50, Aggregation::kMean, Aggregation::kTop25}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidArgument(fmt::format("unknown aggregation '{}'", name));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

json to_json(const SimConfig& c) {
  return {{"control_hz", c.control_hz},
          {"physics_hz", c.physics_hz},
          {"kp", c.kp},
          {"kd", c.kd},
          {"action_clip", c.action_clip},
          {"episode_timeout", c.episode_timeout},
          {"noise",
           {{"enabled", c.noise.enabled},
            {"ang_vel", c.noise.ang_vel},
            {"gravity", c.noise.gravity},
            {"joint_pos", c.noise.joint_pos},
            {"joint_vel", c.noise.joint_vel}}},
          {"fall",
           {{"min_height", c.fall.min_height},
            {"max_tilt", c.fall.max_tilt},
            {"hold_time", c.fall.hold_time}}}};
}

SimConfig sim_config_from_json(const json& j) { return sim_config_at(j, ""); }

std::vector<NamedDr> dr_set_from_json(const json& j) { return dr_set_at(j, ""); }

json to_json(const EvalConfig& c) {
  json drs = json::array();
  for (const auto& d : c.drs) drs.push_back({{"label", d.label}, {"fields", to_json(d.dr)}});
  json terrains = json::array();
  for (TerrainKind t : c.terrains) terrains.push_back(std::string(to_string(t)));
  json goals = json::array();
  for (GoalKind g : c.goal_set) goals.push_back(std::string(to_string(g)));
  json j = {{"sim", to_json(c.sim)},
            {"robot", to_json(c.robot)},
            {"goals", to_json(c.goals)},
            {"goal_set", goals},
            {"weights", to_json(c.weights)},
            {"aggregation", std::string(to_string(c.aggregation))},
            {"seeds", seeds_to_json(c.seeds)},
            {"terrains", terrains},
            {"drs", drs},
            {"tile", {{"length", c.tile_length}, {"width", c.tile_width}, {"resolution", c.resolution}}},
            {"workers", c.workers}};
  if (c.normalization) j["normalization"] = to_json(*c.normalization);
  return j;
}

EvalConfig eval_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string ptr;
  reject_unknown(j, {"sim", "robot", "goals", "goal_set", "normalization", "weights", "aggregation",
                     "seeds", "terrains", "drs", "tile", "workers"},
                 ptr);
  EvalConfig c;
  if (j.contains("sim")) c.sim = sim_config_at(j["sim"], "/sim");
  if (j.contains("robot")) {
    const json& r = j["robot"];
    c.robot = at("/robot", [&] {
      if (r.is_string()) {
        std::filesystem::path p = r.get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return load_robot_description(p);
      }
      return robot_from_json(r);
    });
  }
  if (j.contains("goals")) c.goals = at("/goals", [&] { return goal_options_from_json(j["goals"]); });
  if (j.contains("goal_set")) {
    const json& g = j["goal_set"];
    if (!g.is_array() || g.empty()) throw ConfigError("/goal_set", "expected a non-empty array");
    c.goal_set.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      c.goal_set.push_back(at(fmt::format("/goal_set/{}", i),
                              [&] { return goal_kind_from_string(g[i].get<std::string>()); }));
    }
  }
  if (j.contains("normalization") && !j["normalization"].is_null()) {
    c.normalization = at("/normalization", [&] { return normalization_from_json(j["normalization"]); });
  }
  if (j.contains("weights")) c.weights = at("/weights", [&] { return score_weights_from_json(j["weights"]); });
  if (j.contains("aggregation")) {
    c.aggregation = at("/aggregation", [&] { return aggregation_from_string(j["aggregation"].get<std::string>()); });
  }
  if (j.contains("seeds")) c.seeds = seeds_at(j["seeds"], "/seeds");
  if (j.contains("terrains")) {
    const json& t = j["terrains"];
    if (!t.is_array() || t.empty()) throw ConfigError("/terrains", "expected a non-empty array");
    c.terrains.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      c.terrains.push_back(at(fmt::format("/terrains/{}", i),
                              [&] { return terrain_kind_from_string(t[i].get<std::string>()); }));
    }
  }
  if (j.contains("drs")) c.drs = dr_set_at(j["drs"], "/drs");
  if (j.contains("tile")) {
    reject_unknown(j["tile"], {"length", "width", "resolution"}, "/tile");
    read(j["tile"], "length", c.tile_length, "/tile");
    read(j["tile"], "width", c.tile_width, "/tile");
    read(j["tile"], "resolution", c.resolution, "/tile");
    if (!(c.tile_length > 0 && c.tile_width > 0 && c.resolution > 0)) {
      throw ConfigError("/tile", "dimensions must be positive");
    }
  }
  read(j, "workers", c.workers, ptr);
  if (c.workers < 1) throw ConfigError("/workers", "must be >= 1");
  return c;
}

json to_json(const RunConfig& c) {
  json policy = json::object();
  if (!c.policy.weights.empty()) policy["weights"] = c.policy.weights;
  if (!c.policy.scripted.empty()) policy["scripted"] = c.policy.scripted;
  json backend = {{"kind", c.backend.kind}};
  if (c.backend.kind == "reference") backend["dynamics"] = to_json(c.backend.dynamics);
  if (!c.backend.address.empty()) backend["address"] = c.backend.address;
  return {{"eval", to_json(c.eval)},
          {"policy", policy},
          {"backend", backend},
          {"output_dir", c.output_dir}};
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, {"eval", "policy", "backend", "output_dir"}, "");
  RunConfig c;
  if (j.contains("eval")) {
    try {
      c.eval = eval_config_from_json(j["eval"], base_dir);
    } catch (const ConfigError& e) {
      const std::string inner = e.pointer() == "/" ? "" : e.pointer();
      const std::string what = e.what();
      throw ConfigError("/eval" + inner, what.substr(e.pointer().size() + 2));
    }
  }
  if (j.contains("policy")) {
    const json& p = j["policy"];
    reject_unknown(p, {"weights", "scripted"}, "/policy");
    c.policy = {};
    read(p, "weights", c.policy.weights, "/policy");
    read(p, "scripted", c.policy.scripted, "/policy");
    if (c.policy.weights.empty() == c.policy.scripted.empty()) {
      throw ConfigError("/policy", "set exactly one of 'weights' or 'scripted'");
    }
    if (!c.policy.scripted.empty()) {
      at("/policy/scripted", [&] { scripted_kind_from_string(c.policy.scripted); });
    } else {
      std::filesystem::path w = c.policy.weights;
      if (w.is_relative() && !base_dir.empty()) c.policy.weights = (base_dir / w).string();
    }
  }
  if (j.contains("backend")) {
    const json& b = j["backend"];
    reject_unknown(b, {"kind", "dynamics", "address"}, "/backend");
    read(b, "kind", c.backend.kind, "/backend");
    read(b, "address", c.backend.address, "/backend");
    if (c.backend.kind != "reference" && c.backend.kind != "bridge") {
      throw ConfigError("/backend/kind", fmt::format("unknown backend '{}'", c.backend.kind));
    }
    if (b.contains("dynamics")) {
      c.backend.dynamics = at("/backend/dynamics", [&] { return reference_dynamics_from_json(b["dynamics"]); });
    }
    if (c.backend.kind == "bridge" && c.backend.address.empty()) {
      throw ConfigError("/backend/address", "required for the bridge backend");
    }
  }
  read(j, "output_dir", c.output_dir, "");
  return c;
}

void apply_env_overrides(json& doc, const std::map<std::string, std::string>& env) {
  for (const auto& [name, value] : env) {
    if (name.rfind(kEnvPrefix, 0) != 0) continue;
    std::string rest = lower(name.substr(kEnvPrefix.size()));
    if (rest.empty()) continue;
    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
      const std::size_t sep = rest.find("__", pos);
      const std::string key = rest.substr(pos, sep == std::string::npos ? std::string::npos : sep - pos);
      if (key.empty()) throw ConfigError("/", fmt::format("malformed override variable {}", name));
      if (!node->is_object()) *node = json::object();
      if (sep == std::string::npos) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
        break;
      }
      node = &(*node)[key];
      pos = sep + 2;
    }
  }
}

std::map<std::string, std::string> process_env_overrides() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    if (entry.rfind(kEnvPrefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open config {}", path.string()));
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("/", fmt::format("{} is not valid JSON", path.string()));
  apply_env_overrides(doc, process_env_overrides());
  return run_config_from_json(doc, path.parent_path());
}

std::string config_hash(const RunConfig& cfg) {
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  json j = to_json(cfg);
  j.erase("output_dir");
  j["eval"].erase("workers");
  return sha256_hex(j.dump());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"config", m.config},
          {"config_hash", m.config_hash},
          {"policy_hash", m.policy_hash},
          {"seed_root", m.seed_root},
          {"cells", m.cells},
          {"arguments", m.arguments},
          {"started_at", m.started_at},
          {"finished_at", m.finished_at},
          {"engine_version", m.engine_version},
          {"errored_cells", m.errored_cells}};
}

RunManifest manifest_from_json(const json& j) {
  reject_unknown(j, {"command", "config", "config_hash", "policy_hash", "seed_root", "cells",
                     "arguments", "started_at", "finished_at", "engine_version", "errored_cells"},
                 "");
  RunManifest m;
  read(j, "command", m.command, "");
  if (j.contains("config")) m.config = j["config"];
  read(j, "config_hash", m.config_hash, "");
  read(j, "policy_hash", m.policy_hash, "");
  read(j, "seed_root", m.seed_root, "");
  read(j, "cells", m.cells, "");
  if (j.contains("arguments")) m.arguments = j["arguments"];
  read(j, "started_at", m.started_at, "");
  read(j, "finished_at", m.finished_at, "");
  read(j, "engine_version", m.engine_version, "");
  read(j, "errored_cells", m.errored_cells, "");
  return m;
}

}  // namespace locogauge
