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

#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"

namespace {

using locogauge::cli::CommonOptions;
using nlohmann::json;

constexpr const char* kEnvHelp =
    "Config keys can be overridden from the environment: LOCOGAUGE_<KEY>[__<KEY>...]=<json>,\n"
    "e.g. LOCOGAUGE_EVAL__WORKERS=4 or LOCOGAUGE_EVAL__SEEDS__ROOT=7. Command-line flags win\n"
    "over the environment, which wins over the config file.";

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  auto* weights = app->add_option("--policy", o.weights, "Policy weights (.rgpw)")->check(CLI::ExistingFile);
  app->add_option("--scripted", o.scripted, "Scripted policy: stand | trot_tracker | faulty")
      ->excludes(weights);
  app->add_option("--backend", o.backend, "Simulator backend: reference | bridge");
  app->add_option("--address", o.address, "Bridge backend address host:port");
  app->add_option("-j,--workers", o.workers, "Worker count");
  app->add_option("--seed", o.seed, "Root seed");
  app->add_option("-o,--output-dir", o.output_dir, "Parent directory for run outputs");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = locogauge::cli;
  CLI::App app{"locogauge: quadruped locomotion policy evaluation"};
  app.footer(kEnvHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(locogauge::engine_version()));

  CommonOptions common;
  json args = json::object();
  std::function<int()> action;

  auto* stress = app.add_subcommand("stress", "Full terrain x DR matrix to a score tree and reports");
  add_common(stress, common);
  stress->callback([&] { action = [&] { return cli::run_stress(cli::resolve_config(common), args); }; });

  std::string terrain = "flat", dr, goals_csv, trace_format = "ndjson";
  int level = 1;
  std::uint64_t base_seed = 0;

  auto* lvl = app.add_subcommand("level", "Level search and quality for one (terrain, DR) cell");
  add_common(lvl, common);
  lvl->add_option("--terrain", terrain, "Terrain kind")->required();
  lvl->add_option("--dr", dr, "DR label from the configured set")->required();
  lvl->callback([&] {
    args = {{"terrain", terrain}, {"dr", dr}};
    action = [&] { return cli::run_level(cli::resolve_config(common), args); };
  });

  auto* base = app.add_subcommand("base", "One environment: goals, metrics, traces and latents");
  add_common(base, common);
  base->add_option("--terrain", terrain, "Terrain kind")->required();
  base->add_option("--dr", dr, "DR label from the configured set")->required();
  base->add_option("--level", level, "Difficulty level 1..10")->check(CLI::Range(1, 10));
  base->add_option("--env-seed", base_seed, "Episode seed");
  base->add_option("--goals", goals_csv, "Comma-separated goals (default: configured goal set)");
  base->add_option("--trace-format", trace_format, "ndjson | rgtr");
  base->callback([&] {
    json goals = json::array();
    std::stringstream ss(goals_csv);
    for (std::string g; std::getline(ss, g, ',');) {
      if (!g.empty()) goals.push_back(g);
    }
    args = {{"terrain", terrain}, {"dr", dr}, {"level", level}, {"seed", base_seed},
            {"goals", goals}, {"trace_format", trace_format}};
    action = [&] { return cli::run_base(cli::resolve_config(common), args); };
  });

  auto* terrain_cmd = app.add_subcommand("terrain", "Terrain utilities");
  terrain_cmd->require_subcommand(1);
  auto* texport = terrain_cmd->add_subcommand("export", "Generate and export a heightfield");
  add_common(texport, common);
  std::string kind, format = "rghf";
  double d = 0.1;
  std::uint64_t terrain_seed = 0;
  texport->add_option("--kind", kind, "Terrain kind (stairs and slope mean the ascending variant)")
      ->required();
  texport->add_option("--d", d, "Difficulty parameter in [0.1, 1.0]")->check(CLI::Range(0.1, 1.0));
  texport->add_option("--terrain-seed", terrain_seed, "Obstacle layout seed");
  texport->add_option("--format", format, "rghf | csv");
  texport->callback([&] {
    args = {{"kind", kind}, {"d", d}, {"seed", terrain_seed}, {"format", format}};
    action = [&] { return cli::run_terrain_export(cli::resolve_config(common), args); };
  });

  std::string trace, preset = "multi_terrain", rewards_config;
  auto* metrics_cmd = app.add_subcommand("metrics", "Metric utilities");
  metrics_cmd->require_subcommand(1);
  auto* mreplay = metrics_cmd->add_subcommand("replay", "Recompute metrics from a saved trace");
  add_common(mreplay, common);
  mreplay->add_option("--trace", trace, "Trace file (.ndjson or .rgtr)")->required()->check(CLI::ExistingFile);
  mreplay->callback([&] {
    args = {{"trace", std::filesystem::absolute(trace).string()}};
    action = [&] { return cli::run_metrics_replay(cli::resolve_config(common), args); };
  });

  auto* rewards_cmd = app.add_subcommand("rewards", "Reward utilities");
  rewards_cmd->require_subcommand(1);
  auto* rreplay = rewards_cmd->add_subcommand("replay", "Evaluate the reward table on a saved trace");
  add_common(rreplay, common);
  rreplay->add_option("--trace", trace, "Trace file (.ndjson or .rgtr)")->required()->check(CLI::ExistingFile);
  rreplay->add_option("--preset", preset, "multi_terrain | flat_high_speed");
  rreplay->add_option("--rewards-config", rewards_config, "Reward config JSON")->check(CLI::ExistingFile);
  rreplay->callback([&] {
    args = {{"trace", std::filesystem::absolute(trace).string()}, {"preset", preset},
            {"rewards_config", rewards_config.empty() ? "" : std::filesystem::absolute(rewards_config).string()}};
    action = [&] { return cli::run_rewards_replay(cli::resolve_config(common), args); };
  });

  std::string latents_in;
  auto* latents_cmd = app.add_subcommand("latents", "Latent utilities");
  latents_cmd->require_subcommand(1);
  auto* pca = latents_cmd->add_subcommand("pca", "Project dumped latents onto two principal components");
  add_common(pca, common);
  pca->add_option("--input", latents_in, "Latent CSV from `base`")->required()->check(CLI::ExistingFile);
  pca->callback([&] {
    args = {{"input", std::filesystem::absolute(latents_in).string()}};
    action = [&] { return cli::run_latents_pca(cli::resolve_config(common), args); };
  });

  std::string weights_path, init_out;
  std::uint64_t init_seed = 0;
  int experts = 4, history = 5, latent = 32;
  std::vector<int> hidden{256, 256};
  auto* policy_cmd = app.add_subcommand("policy", "Policy file utilities");
  policy_cmd->require_subcommand(1);
  auto* inspect = policy_cmd->add_subcommand("inspect", "Print the header of a weights file");
  inspect->add_option("weights", weights_path, "Weights file (.rgpw)")->required()->check(CLI::ExistingFile);
  inspect->callback([&] { action = [&] { return cli::run_policy_inspect(weights_path); }; });
  auto* init = policy_cmd->add_subcommand("init", "Write a randomly initialised network");
  init->add_option("--out", init_out, "Output file")->required();
  init->add_option("--seed", init_seed, "Initialisation seed");
  init->add_option("--experts", experts, "Number of experts")->check(CLI::PositiveNumber);
  init->add_option("--history", history, "Observation history length")->check(CLI::PositiveNumber);
  init->add_option("--latent", latent, "Latent dimension")->check(CLI::PositiveNumber);
  init->add_option("--hidden", hidden, "Hidden layer widths");
  init->callback([&] {
    args = {{"out", init_out}, {"seed", init_seed}, {"experts", experts},
            {"history", history}, {"latent", latent}, {"hidden", hidden}};
    action = [&] { return cli::run_policy_init(args); };
  });

  std::string manifest_path, rerun_out;
  auto* manifest_cmd = app.add_subcommand("manifest", "Run manifest utilities");
  manifest_cmd->require_subcommand(1);
  auto* rerun = manifest_cmd->add_subcommand("rerun", "Repeat a recorded run into a new directory");
  rerun->add_option("manifest", manifest_path, "manifest.json of a previous run")
      ->required()
      ->check(CLI::ExistingFile);
  rerun->add_option("-o,--output-dir", rerun_out, "Parent directory for the new run");
  rerun->callback([&] { action = [&] { return cli::run_manifest_rerun(manifest_path, rerun_out); }; });

  int port = 0;
  auto* bridge_cmd = app.add_subcommand("bridge", "External backend protocol utilities");
  bridge_cmd->require_subcommand(1);
  auto* stub = bridge_cmd->add_subcommand("stub", "Serve the physics-free stub backend");
  stub->add_option("--port", port, "Listen on 127.0.0.1:<port>; stdio when omitted");
  stub->callback([&] { action = [&] { return cli::run_bridge_stub(port); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return action();
  } catch (const locogauge::ConfigError& e) {
    std::cerr << json{{"event", "config_error"}, {"pointer", e.pointer()}, {"message", e.what()}}.dump()
              << std::endl;
    return cli::kExitUsage;
  } catch (const locogauge::InvalidArgument& e) {
    std::cerr << json{{"event", "invalid_argument"}, {"message", e.what()}}.dump() << std::endl;
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << json{{"event", "error"}, {"message", e.what()}}.dump() << std::endl;
    return cli::kExitFailure;
  }
}
