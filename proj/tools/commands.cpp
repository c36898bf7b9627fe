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

#include "commands.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "locogauge/bridge.hpp"
#include "locogauge/metrics.hpp"
#include "locogauge/pipelines.hpp"
#include "locogauge/reference_sim.hpp"
#include "locogauge/report.hpp"
#include "locogauge/rewards.hpp"
#include "locogauge/terrain.hpp"

namespace locogauge::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
}

std::string policy_hash(const PolicySpec& p) {
  if (!p.weights.empty()) return sha256_hex(read_file(p.weights));
  return "scripted:" + p.scripted;
}

ControllerFactory make_policy(const RunConfig& cfg) {
  if (!cfg.policy.weights.empty()) {
    auto net = std::make_shared<const MoeNetwork>(load_policy_weights(cfg.policy.weights));
    if (net->architecture().obs_dim != kObsDim || net->architecture().action_dim != kNumJoints) {
      throw InvalidArgument("policy dimensions do not match the robot observation/action layout");
    }
    return moe_policy(std::move(net));
  }
  return scripted_policy(scripted_kind_from_string(cfg.policy.scripted), cfg.eval.sim.control_dt());
}

SimulatorFactory make_backend(const RunConfig& cfg) {
  if (cfg.backend.kind == "bridge") {
    return [address = cfg.backend.address, sim = cfg.eval.sim,
            robot = cfg.eval.robot]() -> std::unique_ptr<Simulator> {
      return std::make_unique<BridgeSimulator>(FrameChannel::connect_tcp(address), sim, robot);
    };
  }
  return reference_sim_factory(cfg.eval.sim, cfg.eval.robot, cfg.backend.dynamics);
}

ProgressFn stderr_progress() {
  return [](const json& event) { std::cerr << event.dump() << std::endl; };
}

/// Owns the output directory and manifest of one run.
class Run {
 public:
  Run(const RunConfig& cfg, std::string command, json args)
      : args_(std::move(args)) {
    manifest_.command = std::move(command);
    manifest_.config = to_json(cfg);
    manifest_.config_hash = config_hash(cfg);
    manifest_.policy_hash = policy_hash(cfg.policy);
    manifest_.seed_root = cfg.eval.seeds.root;
    manifest_.arguments = args_;
    manifest_.started_at = utc_timestamp();
    manifest_.engine_version = std::string(engine_version());

    std::string stamp = manifest_.started_at;
    std::erase(stamp, '-');
    std::erase(stamp, ':');
    std::string slug = manifest_.command;
    std::replace(slug.begin(), slug.end(), ' ', '-');
    const fs::path base = fs::path(cfg.output_dir) / fmt::format("{}-{}", slug, stamp);
    dir_ = base;
    for (int n = 1; fs::exists(dir_); ++n) dir_ = fmt::format("{}-{}", base.string(), n);
    fs::create_directories(dir_);
    std::cerr << json{{"event", "run_start"}, {"command", manifest_.command},
                      {"dir", dir_.string()}}.dump()
              << std::endl;
  }

  const fs::path& dir() const { return dir_; }
  RunManifest& manifest() { return manifest_; }
  json provenance() const {
    return {{"config_hash", manifest_.config_hash},
            {"policy_hash", manifest_.policy_hash},
            {"seed_root", manifest_.seed_root},
            {"engine_version", manifest_.engine_version}};
  }

  void finish() {
    manifest_.finished_at = utc_timestamp();
    write_file(dir_ / "manifest.json", to_json(manifest_).dump(2) + "\n");
    std::cerr << json{{"event", "run_done"}, {"dir", dir_.string()},
                      {"errored_cells", manifest_.errored_cells.size()}}.dump()
              << std::endl;
  }

 private:
  json args_;
  RunManifest manifest_;
  fs::path dir_;
};

void write_tree_outputs(const ScoreTree& tree, Run& run) {
  write_file(run.dir() / "score_tree.json", to_json(tree).dump(2) + "\n");
  std::ostringstream summary, radar, cells;
  write_summary_csv(tree, summary);
  write_radar_csv(tree, radar);
  write_cells_csv(tree, cells);
  write_file(run.dir() / "summary.csv", summary.str());
  write_file(run.dir() / "radar.csv", radar.str());
  write_file(run.dir() / "cells.csv", cells.str());
  std::vector<std::string> warnings;
  const std::string table = render_summary(tree, &warnings);
  write_file(run.dir() / "summary.txt", table);
  std::cout << table;
  for (const auto& w : warnings) std::cerr << json{{"event", "warning"}, {"message", w}}.dump() << std::endl;
  for (const auto& c : tree.cells) {
    run.manifest().cells.push_back(c.terrain + "/" + c.dr);
    if (c.errored) run.manifest().errored_cells.push_back(c.terrain + "/" + c.dr);
  }
}

TerrainKind terrain_arg(const std::string& name) {
  if (name == "stairs") return TerrainKind::kStairsUp;
  if (name == "slope") return TerrainKind::kSlopeUp;
  return terrain_kind_from_string(name);
}

NamedDr dr_arg(const EvalConfig& eval, const std::string& label) {
  for (const auto& d : eval.drs) {
    if (d.label == label) return d;
  }
  std::string known;
  for (const auto& d : eval.drs) known += (known.empty() ? "" : ", ") + d.label;
  throw InvalidArgument(fmt::format("unknown DR '{}' (configured: {})", label, known));
}

json goal_run_json(const GoalRun& g) {
  json trials = json::array();
  for (const auto& m : g.trials) trials.push_back(to_json(m));
  json j = {{"goal", std::string(to_string(g.goal))}, {"trials", trials}, {"fallen", g.fallen}};
  if (g.goal == GoalKind::kTargetPosition) {
    j["success"] = g.success;
    j["outcome"] = {{"displacement", g.outcome.displacement},
                    {"fallen", g.outcome.fallen},
                    {"timed_out", g.outcome.timed_out}};
  }
  return j;
}

NormalizationConfig replay_normalization(const EvalConfig& eval, const std::string& terrain) {
  if (eval.normalization) return *eval.normalization;
  try {
    return NormalizationConfig::for_terrain(terrain_kind_from_string(terrain));
  } catch (const InvalidArgument&) {
    return NormalizationConfig{};
  }
}

}  // namespace

RunConfig resolve_config(const CommonOptions& o) {
  json doc = json::object();
  fs::path base_dir;
  if (!o.config.empty()) {
    doc = json::parse(read_file(o.config), nullptr, false);
    if (doc.is_discarded()) throw ConfigError("/", fmt::format("{} is not valid JSON", o.config));
    base_dir = fs::path(o.config).parent_path();
  }
  apply_env_overrides(doc, process_env_overrides());
  RunConfig cfg = run_config_from_json(doc, base_dir);
  if (!o.weights.empty()) cfg.policy = {fs::absolute(o.weights).string(), ""};
  if (!o.scripted.empty()) {
    scripted_kind_from_string(o.scripted);
    cfg.policy = {"", o.scripted};
  }
  if (!cfg.policy.weights.empty()) cfg.policy.weights = fs::absolute(cfg.policy.weights).string();
  if (!o.backend.empty()) {
    if (o.backend != "reference" && o.backend != "bridge") {
      throw ConfigError("/backend/kind", fmt::format("unknown backend '{}'", o.backend));
    }
    cfg.backend.kind = o.backend;
  }
  if (!o.address.empty()) cfg.backend.address = o.address;
  if (cfg.backend.kind == "bridge" && cfg.backend.address.empty()) {
    throw ConfigError("/backend/address", "required for the bridge backend");
  }
  if (o.workers) {
    if (*o.workers < 1) throw ConfigError("/eval/workers", "must be >= 1");
    cfg.eval.workers = *o.workers;
  }
  if (o.seed) cfg.eval.seeds.root = *o.seed;
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  return cfg;
}

int run_stress(const RunConfig& cfg, const json& args) {
  Run run(cfg, "stress", args);
  const ScoreTree tree =
      stress_pipeline(make_backend(cfg), make_policy(cfg), cfg.eval, run.provenance(), stderr_progress());
  write_tree_outputs(tree, run);
  run.finish();
  return run.manifest().errored_cells.empty() ? kExitOk : kExitErroredCells;
}

int run_level(const RunConfig& cfg, const json& args) {
  const TerrainKind terrain = terrain_arg(args.at("terrain").get<std::string>());
  const NamedDr dr = dr_arg(cfg.eval, args.at("dr").get<std::string>());
  Run run(cfg, "level", args);
  ScoreTree tree;
  tree.provenance = run.provenance();
  tree.weights = cfg.eval.weights;
  tree.aggregation = cfg.eval.aggregation;
  tree.terrains = {std::string(to_string(terrain))};
  tree.drs = {dr.label};
  tree.cells = multi_pipeline({{terrain, dr}}, make_backend(cfg), make_policy(cfg), cfg.eval, 1,
                              stderr_progress());
  recompute(tree);
  write_tree_outputs(tree, run);
  const auto& cell = tree.cells.front();
  json probes = json::array();
  for (const auto& p : cell.search) {
    probes.push_back({{"level", p.level}, {"successes", p.successes}, {"attempts", p.attempts},
                      {"passed", p.passed}});
  }
  std::cout << json{{"level_star", cell.level_star}, {"quality", cell.quality},
                    {"score", cell.score}, {"probes", probes}}.dump()
            << "\n";
  run.finish();
  return run.manifest().errored_cells.empty() ? kExitOk : kExitErroredCells;
}

int run_base(const RunConfig& cfg, const json& args) {
  BaseRequest req;
  req.terrain = terrain_arg(args.at("terrain").get<std::string>());
  req.dr = dr_arg(cfg.eval, args.at("dr").get<std::string>());
  req.level = args.at("level").get<int>();
  if (req.level < 1 || req.level > kNumLevels) throw InvalidArgument("level must be in 1..10");
  req.seed = args.at("seed").get<std::uint64_t>();
  for (const auto& g : args.at("goals")) req.goals.push_back(goal_kind_from_string(g.get<std::string>()));
  if (req.goals.empty()) req.goals = cfg.eval.goal_set;
  req.keep_traces = true;
  req.record_latents = true;
  const std::string format = args.value("trace_format", "ndjson");
  if (format != "ndjson" && format != "rgtr") throw InvalidArgument("trace format must be ndjson or rgtr");

  Run run(cfg, "base", args);
  const Heightfield terrain = generate(level_terrain_spec(cfg.eval, req.terrain, req.level));
  auto sim = make_backend(cfg)();
  const BaseResult result = base_pipeline(req, terrain, *sim, make_policy(cfg), cfg.eval);

  json goals = json::array();
  std::vector<LatentRow> latents;
  fs::create_directories(run.dir() / "traces");
  for (const auto& g : result.goals) {
    goals.push_back(goal_run_json(g));
    if (g.trace) save_trace(*g.trace, run.dir() / "traces" / fmt::format("{}.{}", to_string(g.goal), format));
    latents.insert(latents.end(), g.latents.begin(), g.latents.end());
  }
  const json out = {{"terrain", std::string(to_string(req.terrain))},
                    {"dr", req.dr.label},
                    {"level", req.level},
                    {"seed", req.seed},
                    {"pass", result.pass},
                    {"errored", result.errored},
                    {"error", result.error},
                    {"goals", goals}};
  write_file(run.dir() / "base.json", out.dump(2) + "\n");
  if (!latents.empty()) {
    std::ofstream lat(run.dir() / "latents.csv");
    dump_latents(latents, static_cast<int>(latents.front().gate.size()),
                 static_cast<int>(latents.front().latent.size()), lat);
  }
  std::cout << out.dump(2) << "\n";
  const std::string key = fmt::format("{}/{}", to_string(req.terrain), req.dr.label);
  run.manifest().cells = {key};
  if (result.errored) run.manifest().errored_cells = {key};
  run.finish();
  return result.errored ? kExitErroredCells : kExitOk;
}

int run_terrain_export(const RunConfig& cfg, const json& args) {
  Run run(cfg, "terrain export", args);
  TerrainSpec spec;
  spec.kind = terrain_arg(args.at("kind").get<std::string>());
  spec.difficulty = args.at("d").get<double>();
  spec.seed = args.at("seed").get<std::uint64_t>();
  spec.length_m = cfg.eval.tile_length;
  spec.width_m = cfg.eval.tile_width;
  spec.resolution_m = cfg.eval.resolution;
  const std::string format = args.value("format", "rghf");
  const Heightfield hf = generate(spec);

  json params = {{"kind", std::string(to_string(spec.kind))}, {"d", spec.difficulty}};
  switch (spec.kind) {
    case TerrainKind::kWave: params["amplitude"] = wave_amplitude(spec.difficulty); break;
    case TerrainKind::kSlopeUp:
    case TerrainKind::kSlopeDown:
    case TerrainKind::kRoughSlope: params["gradient"] = slope_gradient(spec.difficulty); break;
    case TerrainKind::kStairsUp:
    case TerrainKind::kStairsDown: params["step_height"] = stair_step_height(spec.difficulty); break;
    case TerrainKind::kObstacle: params["obstacle_height"] = obstacle_height(spec.difficulty); break;
    case TerrainKind::kFlat: break;
  }
  params["rows"] = hf.rows();
  params["cols"] = hf.cols();
  params["resolution"] = hf.resolution();
  params["seed"] = spec.seed;

  if (format == "csv") {
    std::ofstream out(run.dir() / "terrain.csv");
    write_csv(hf, out);
  } else if (format == "rghf") {
    std::ofstream out(run.dir() / "terrain.rghf", std::ios::binary);
    write_binary(hf, out);
  } else {
    throw InvalidArgument("terrain format must be rghf or csv");
  }
  write_file(run.dir() / "terrain.json", params.dump(2) + "\n");
  std::cout << params.dump() << "\n";
  run.finish();
  return kExitOk;
}

int run_metrics_replay(const RunConfig& cfg, const json& args) {
  Run run(cfg, "metrics replay", args);
  const EpisodeTrace trace = load_trace(args.at("trace").get<std::string>());
  validate(trace);
  const NormalizationConfig norm = replay_normalization(cfg.eval, trace.terrain);
  std::vector<MetricVector> per_trial;
  json trials = json::array();
  for (int t : trace.trials()) {
    per_trial.push_back(compute_metrics(trace.trial(t), cfg.eval.robot, norm));
    trials.push_back({{"trial", t}, {"metrics", to_json(per_trial.back())}});
  }
  const json out = {{"terrain", trace.terrain},
                    {"goal", trace.goal},
                    {"normalization", to_json(norm)},
                    {"trials", trials},
                    {"worst50", to_json(aggregate_goal_scores(per_trial, Aggregation::kWorst50))},
                    {"mean", to_json(aggregate_goal_scores(per_trial, Aggregation::kMean))},
                    {"top25", to_json(aggregate_goal_scores(per_trial, Aggregation::kTop25))}};
  write_file(run.dir() / "metrics.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  run.finish();
  return kExitOk;
}

int run_rewards_replay(const RunConfig& cfg, const json& args) {
  Run run(cfg, "rewards replay", args);
  const EpisodeTrace trace = load_trace(args.at("trace").get<std::string>());
  validate(trace);
  json rc = {{"preset", args.value("preset", "multi_terrain")}};
  if (args.contains("rewards_config") && !args["rewards_config"].get<std::string>().empty()) {
    rc = json::parse(read_file(args["rewards_config"].get<std::string>()));
  }
  RewardConfig rewards = reward_config_from_json(rc);
  rewards.control_dt = trace.control_dt;
  const RewardReport report = episode_reward_report(trace, cfg.eval.robot, rewards);
  std::ostringstream csv;
  write_reward_csv(report, rewards, csv);
  write_file(run.dir() / "rewards.csv", csv.str());
  std::cout << csv.str();
  run.finish();
  return kExitOk;
}

int run_latents_pca(const RunConfig& cfg, const json& args) {
  Run run(cfg, "latents pca", args);
  std::ifstream in(args.at("input").get<std::string>());
  if (!in) throw Error("cannot open latent CSV");
  const Eigen::MatrixXd z = read_latent_matrix(in);
  const Eigen::MatrixXd p = pca_project(z);
  std::ostringstream out;
  out << "pc1,pc2\n";
  for (Eigen::Index r = 0; r < p.rows(); ++r) out << fmt::format("{:.17g},{:.17g}\n", p(r, 0), p(r, 1));
  write_file(run.dir() / "pca.csv", out.str());
  std::cout << fmt::format("{} rows projected to {}\n", p.rows(), (run.dir() / "pca.csv").string());
  run.finish();
  return kExitOk;
}

int run_manifest_rerun(const fs::path& path, const std::string& output_dir) {
  const RunManifest old = manifest_from_json(json::parse(read_file(path)));
  RunConfig cfg = run_config_from_json(old.config);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (config_hash(run_config_from_json(old.config)) != old.config_hash) {
    throw Error("manifest config hash does not match its config");
  }
  if (policy_hash(cfg.policy) != old.policy_hash) {
    throw Error("policy file changed since the manifest was written");
  }
  const json& args = old.arguments;
  if (old.command == "stress") return run_stress(cfg, args);
  if (old.command == "level") return run_level(cfg, args);
  if (old.command == "base") return run_base(cfg, args);
  if (old.command == "terrain export") return run_terrain_export(cfg, args);
  if (old.command == "metrics replay") return run_metrics_replay(cfg, args);
  if (old.command == "rewards replay") return run_rewards_replay(cfg, args);
  if (old.command == "latents pca") return run_latents_pca(cfg, args);
  throw InvalidArgument(fmt::format("manifest command '{}' cannot be rerun", old.command));
}

int run_policy_inspect(const fs::path& weights) {
  std::ifstream in(weights, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", weights.string()));
  json header = read_policy_header(in);
  std::size_t params = 0;
  for (const auto& t : header.at("tensors")) {
    std::size_t n = 1;
    for (const auto& d : t.at("shape")) n *= d.get<std::size_t>();
    params += n;
  }
  const MoeNetwork net = load_policy_weights(weights);  // verifies the checksum
  header["parameters"] = params;
  header["file_sha256"] = sha256_hex(read_file(weights));
  header["input_dim"] = net.architecture().input_dim();
  std::cout << header.dump(2) << "\n";
  return kExitOk;
}

int run_policy_init(const json& args) {
  MoeArchitecture arch;
  arch.num_experts = args.value("experts", arch.num_experts);
  arch.history = args.value("history", arch.history);
  arch.latent_dim = args.value("latent", arch.latent_dim);
  if (args.contains("hidden")) {
    const auto hidden = args["hidden"].get<std::vector<int>>();
    arch.gate_hidden = arch.expert_hidden = arch.head_hidden = hidden;
  }
  const MoeNetwork net = MoeNetwork::random(arch, args.at("seed").get<std::uint64_t>());
  const fs::path out = args.at("out").get<std::string>();
  save_policy_weights(net, out);
  std::cout << json{{"out", out.string()}, {"sha256", sha256_hex(read_file(out))}}.dump() << "\n";
  return kExitOk;
}

int run_bridge_stub(int port) {
  if (port <= 0) {
    FrameChannel channel(STDIN_FILENO, STDOUT_FILENO, false);
    StubBackend backend;
    backend.serve(channel);
    return kExitOk;
  }
  const int server = ::socket(AF_INET, SOCK_STREAM, 0);
  if (server < 0) throw Error("cannot create socket");
  const int yes = 1;
  ::setsockopt(server, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(server, 8) != 0) {
    ::close(server);
    throw Error(fmt::format("cannot listen on 127.0.0.1:{}", port));
  }
  std::cerr << json{{"event", "listening"}, {"address", fmt::format("127.0.0.1:{}", port)}}.dump()
            << std::endl;
  while (true) {
    const int fd = ::accept(server, nullptr, nullptr);
    if (fd < 0) continue;
    // One session per connection, served sequentially.
    FrameChannel channel(fd, fd, true);
    StubBackend backend;
    try {
      backend.serve(channel);
    } catch (const std::exception& e) {
      std::cerr << json{{"event", "session_error"}, {"message", e.what()}}.dump() << std::endl;
    }
  }
}

}  // namespace locogauge::cli
