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

#ifndef LOCOGAUGE_TOOLS_COMMANDS_HPP_
#define LOCOGAUGE_TOOLS_COMMANDS_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "locogauge/config.hpp"

namespace locogauge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitErroredCells = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 3;

/// Flags shared by every evaluation command. Unset values fall back to the
/// config file, then to LOCOGAUGE_ environment overrides, then defaults.
struct CommonOptions {
  std::string config;
  std::string weights;
  std::string scripted;
  std::string backend;
  std::string address;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

RunConfig resolve_config(const CommonOptions& opts);

/// Evaluation commands. `args` holds every command-specific flag, so that
/// the manifest can replay the run exactly.
int run_stress(const RunConfig& cfg, const nlohmann::json& args);
int run_level(const RunConfig& cfg, const nlohmann::json& args);
int run_base(const RunConfig& cfg, const nlohmann::json& args);
int run_terrain_export(const RunConfig& cfg, const nlohmann::json& args);
int run_metrics_replay(const RunConfig& cfg, const nlohmann::json& args);
int run_rewards_replay(const RunConfig& cfg, const nlohmann::json& args);
int run_latents_pca(const RunConfig& cfg, const nlohmann::json& args);

int run_manifest_rerun(const std::filesystem::path& manifest, const std::string& output_dir);

int run_policy_inspect(const std::filesystem::path& weights);
int run_policy_init(const nlohmann::json& args);

/// Serves the stub backend on stdio, or on a TCP port when `port` > 0.
int run_bridge_stub(int port);

}  // namespace locogauge::cli

#endif  // LOCOGAUGE_TOOLS_COMMANDS_HPP_
