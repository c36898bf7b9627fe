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
 * config.hpp
 *
 * Run configuration documents (JSON) and run manifests.
 *
 * Every parser rejects unknown keys. Errors are ConfigError carrying the
 * JSON pointer of the offending key, e.g. "/eval/seeds/pass_seeds".
 *
 * Environment overrides: LOCOGAUGE_<KEY>[__<KEY>...]=<value> sets the key
 * path lower-cased, with "__" separating levels. Values are parsed as JSON
 * and fall back to a plain string, so LOCOGAUGE_EVAL__WORKERS=8 and
 * LOCOGAUGE_POLICY__SCRIPTED=stand both work.
 */

#ifndef LOCOGAUGE_CONFIG_HPP_
#define LOCOGAUGE_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locogauge/pipelines.hpp"
#include "locogauge/policy.hpp"
#include "locogauge/reference_sim.hpp"
#include "locogauge/util.hpp"

namespace locogauge {

class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : InvalidArgument(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

nlohmann::json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const nlohmann::json& j);

/// Accepts "default9", "sweep10" or an array of {label, fields}.
std::vector<NamedDr> dr_set_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvalConfig& cfg);
/// "robot" may be an inline object or a path resolved against `base_dir`.
EvalConfig eval_config_from_json(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir = {});

struct PolicySpec {
  std::string weights;    // .rgpw path; empty when scripted
  std::string scripted;   // stand | trot_tracker | faulty
};

struct BackendSpec {
  std::string kind = "reference";  // reference | bridge
  ReferenceDynamics dynamics;
  std::string address;             // bridge: host:port
};

struct RunConfig {
  EvalConfig eval;
  PolicySpec policy{"", "trot_tracker"};
  BackendSpec backend;
  std::string output_dir = "runs";
};

nlohmann::json to_json(const RunConfig& cfg);
/// `base_dir` resolves a relative "robot" path.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});

/// Applies LOCOGAUGE_ variables from `env` to a config document.
void apply_env_overrides(nlohmann::json& doc, const std::map<std::string, std::string>& env);
/// LOCOGAUGE_ variables of the current process.
std::map<std::string, std::string> process_env_overrides();

/// Reads a JSON file, applies process environment overrides and parses it.
RunConfig load_run_config(const std::filesystem::path& path);

/// SHA-256 of the canonical (sorted-key, compact) serialization, leaving
/// out the output directory and worker count, which do not affect results.
std::string config_hash(const RunConfig& cfg);

struct RunManifest {
  std::string command;                  // CLI subcommand
  nlohmann::json config;                // full resolved RunConfig
  std::string config_hash;
  std::string policy_hash;              // sha256 of the weights file, or "scripted:<kind>"
  std::uint64_t seed_root = 0;
  std::vector<std::string> cells;       // "terrain/dr" in canonical order
  nlohmann::json arguments = nlohmann::json::object();
  std::string started_at;               // UTC ISO 8601
  std::string finished_at;
  std::string engine_version;
  std::vector<std::string> errored_cells;
};

/// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

}  // namespace locogauge

#endif  // LOCOGAUGE_CONFIG_HPP_
