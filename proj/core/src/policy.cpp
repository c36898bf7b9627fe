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

#include "locogauge/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "locogauge/reference_sim.hpp"

namespace locogauge {
namespace {

constexpr char kMagic[4] = {'R', 'G', 'P', 'W'};
constexpr std::uint16_t kWeightsVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "weights container assumes a little-endian host");

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kElu: return x > 0.0 ? x : std::expm1(x);
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

std::vector<int> layer_dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

Mlp random_mlp(const std::vector<int>& dims, Activation act, Rng& rng) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
    DenseLayer layer{Eigen::MatrixXd(dims[i + 1], dims[i]), Eigen::VectorXd::Zero(dims[i + 1])};
    for (int c = 0; c < layer.weight.cols(); ++c) {
      for (int r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers), act);
}

void check_mlp(const Mlp& mlp, const std::vector<int>& dims, const std::string& name) {
  const auto& layers = mlp.layers();
  if (layers.size() + 1 != dims.size()) {
    throw InvalidArgument(fmt::format("{}: expected {} layers, got {}", name, dims.size() - 1,
                                      layers.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weight.cols() != dims[i] || l.weight.rows() != dims[i + 1] ||
        l.bias.size() != dims[i + 1]) {
      throw InvalidArgument(fmt::format("{}.{}: shape {}x{} does not match {}x{}", name, i,
                                        l.weight.rows(), l.weight.cols(), dims[i + 1], dims[i]));
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw InvalidArgument(fmt::format("{}.{}: non-finite weights", name, i));
    }
  }
}

struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  const Eigen::MatrixXd* matrix = nullptr;
  const Eigen::VectorXd* vector = nullptr;
};

void collect(const Mlp& mlp, const std::string& prefix, std::vector<NamedTensor>& out) {
  for (std::size_t i = 0; i < mlp.layers().size(); ++i) {
    const auto& l = mlp.layers()[i];
    out.push_back({fmt::format("{}.{}.weight", prefix, i),
                   {static_cast<int>(l.weight.rows()), static_cast<int>(l.weight.cols())},
                   &l.weight, nullptr});
    out.push_back({fmt::format("{}.{}.bias", prefix, i),
                   {static_cast<int>(l.bias.size())}, nullptr, &l.bias});
  }
}

std::vector<std::string> tensor_names(const std::string& prefix, std::size_t layers) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < layers; ++i) {
    names.push_back(fmt::format("{}.{}.weight", prefix, i));
    names.push_back(fmt::format("{}.{}.bias", prefix, i));
  }
  return names;
}

std::vector<int> int_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  auto v = j.at(key).get<std::vector<int>>();
  for (int n : v) {
    if (n <= 0) throw FormatError(fmt::format("architecture: {} must be positive", key));
  }
  return v;
}

// Tensors are stored row-major.
void put_f32(std::string& payload, double v) {
  const auto f = static_cast<float>(v);
  char b[4];
  std::memcpy(b, &f, 4);
  payload.append(b, 4);
}

class StandController final : public Controller {
 public:
  void reset(const Observation&) override {}
  JointVector act(const Observation&) override { return JointVector::Zero(); }
};

Command command_of(const Observation& obs) {
  return {obs[obs_layout::kCommand], obs[obs_layout::kCommand + 1],
          obs[obs_layout::kCommand + 2]};
}

class TrotTrackerController final : public Controller {
 public:
  explicit TrotTrackerController(double dt) : dt_(dt) {}
  void reset(const Observation&) override { gait_.reset(); }
  JointVector act(const Observation& obs) override { return gait_.next(command_of(obs), dt_); }

 private:
  double dt_;
  TrotGait gait_;
};

// Trot plus alternating full-body chatter and calves driven past their upper
// limits. The chatter and offset cancel in the trot pattern, so the robot
// still walks.
class FaultyController final : public Controller {
 public:
  explicit FaultyController(double dt) : dt_(dt) {}
  void reset(const Observation&) override {
    gait_.reset();
    sign_ = 1.0;
  }
  JointVector act(const Observation& obs) override {
    JointVector a = gait_.next(command_of(obs), dt_);
    a.array() += sign_ * kChatter;
    for (int leg = 0; leg < kNumFeet; ++leg) a[joint_index(leg, kCalf)] += kCalfOffset;
    sign_ = -sign_;
    return a;
  }

 private:
  static constexpr double kChatter = 0.6;
  static constexpr double kCalfOffset = 0.8;
  double dt_;
  double sign_ = 1.0;
  TrotGait gait_;
};

}  // namespace

Activation activation_from_string(std::string_view name) {
  if (name == "elu") return Activation::kElu;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  throw InvalidArgument(fmt::format("unknown activation '{}'", name));
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kElu: return "elu";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Mlp::Mlp(std::vector<DenseLayer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  if (layers_.empty()) throw InvalidArgument("mlp: no layers");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].weight.cols() != layers_[i - 1].weight.rows()) {
      throw InvalidArgument(fmt::format("mlp: layer {} input does not match layer {} output", i,
                                        i - 1));
    }
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw InvalidArgument(fmt::format("mlp: input size {} != {}", x.size(), input_dim()));
  }
  Eigen::VectorXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::VectorXd next = layers_[i].weight * h + layers_[i].bias;
    if (i + 1 < layers_.size()) {
      next = next.unaryExpr([a = activation_](double v) { return activate(a, v); });
    }
    h = std::move(next);
  }
  return h;
}

int Mlp::input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }

nlohmann::json to_json(const MoeArchitecture& arch) {
  return {{"num_experts", arch.num_experts},   {"history", arch.history},
          {"obs_dim", arch.obs_dim},           {"action_dim", arch.action_dim},
          {"latent_dim", arch.latent_dim},     {"activation", to_string(arch.activation)},
          {"gate_hidden", arch.gate_hidden},   {"expert_hidden", arch.expert_hidden},
          {"head_hidden", arch.head_hidden}};
}

MoeArchitecture architecture_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> kKeys{"num_experts", "history",     "obs_dim",
                                              "action_dim",  "latent_dim",  "activation",
                                              "gate_hidden", "expert_hidden", "head_hidden"};
  if (!j.is_object()) throw FormatError("architecture: must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw FormatError(fmt::format("architecture: unknown key '{}'", key));
    }
  }
  MoeArchitecture a;
  auto get_int = [&](const char* key, int& field) {
    if (j.contains(key)) field = j.at(key).get<int>();
    if (field <= 0) throw FormatError(fmt::format("architecture: {} must be positive", key));
  };
  get_int("num_experts", a.num_experts);
  get_int("history", a.history);
  get_int("obs_dim", a.obs_dim);
  get_int("action_dim", a.action_dim);
  get_int("latent_dim", a.latent_dim);
  if (j.contains("activation")) a.activation = activation_from_string(j.at("activation").get<std::string>());
  if (j.contains("gate_hidden")) a.gate_hidden = int_list(j, "gate_hidden");
  if (j.contains("expert_hidden")) a.expert_hidden = int_list(j, "expert_hidden");
  if (j.contains("head_hidden")) a.head_hidden = int_list(j, "head_hidden");
  if (a.obs_dim != kObsDim) {
    throw FormatError(fmt::format("architecture: obs_dim {} != {}", a.obs_dim, kObsDim));
  }
  if (a.action_dim != kNumJoints) {
    throw FormatError(fmt::format("architecture: action_dim {} != {}", a.action_dim, kNumJoints));
  }
  return a;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

MoeNetwork::MoeNetwork(MoeArchitecture arch, Mlp gate, std::vector<Mlp> experts, Mlp head)
    : arch_(std::move(arch)), gate_(std::move(gate)), experts_(std::move(experts)),
      head_(std::move(head)) {
  if (static_cast<int>(experts_.size()) != arch_.num_experts) {
    throw InvalidArgument(fmt::format("moe: {} experts, header says {}", experts_.size(),
                                      arch_.num_experts));
  }
  check_mlp(gate_, layer_dims(arch_.input_dim(), arch_.gate_hidden, arch_.num_experts), "gate");
  for (std::size_t k = 0; k < experts_.size(); ++k) {
    check_mlp(experts_[k], layer_dims(arch_.input_dim(), arch_.expert_hidden, arch_.latent_dim),
              fmt::format("expert{}", k));
  }
  check_mlp(head_, layer_dims(arch_.latent_dim + arch_.obs_dim, arch_.head_hidden, arch_.action_dim),
            "head");
}

MoeNetwork MoeNetwork::random(const MoeArchitecture& arch, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "policy-init"));
  Mlp gate = random_mlp(layer_dims(arch.input_dim(), arch.gate_hidden, arch.num_experts),
                        arch.activation, rng);
  std::vector<Mlp> experts;
  for (int k = 0; k < arch.num_experts; ++k) {
    experts.push_back(random_mlp(layer_dims(arch.input_dim(), arch.expert_hidden, arch.latent_dim),
                                 arch.activation, rng));
  }
  Mlp head = random_mlp(layer_dims(arch.latent_dim + arch.obs_dim, arch.head_hidden, arch.action_dim),
                        arch.activation, rng);
  return MoeNetwork(arch, std::move(gate), std::move(experts), std::move(head));
}

MoeOutput MoeNetwork::forward(const Eigen::VectorXd& window) const {
  if (window.size() != arch_.input_dim()) {
    throw InvalidArgument(fmt::format("moe: window size {} != {}", window.size(), arch_.input_dim()));
  }
  MoeOutput out;
  out.gate = softmax(gate_.forward(window));
  out.latent = Eigen::VectorXd::Zero(arch_.latent_dim);
  for (int k = 0; k < arch_.num_experts; ++k) {
    out.latent += out.gate[k] * experts_[k].forward(window);
  }
  Eigen::VectorXd head_in(arch_.latent_dim + arch_.obs_dim);
  head_in << out.latent, window.tail(arch_.obs_dim);
  out.action = head_.forward(head_in);
  return out;
}

// --- weights container ------------------------------------------------------

void write_policy_weights(const MoeNetwork& net, std::ostream& out) {
  std::vector<NamedTensor> tensors;
  collect(net.gate(), "gate", tensors);
  for (std::size_t k = 0; k < net.experts().size(); ++k) {
    collect(net.experts()[k], fmt::format("expert{}", k), tensors);
  }
  collect(net.head(), "head", tensors);

  std::string payload;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& t : tensors) {
    entries.push_back({{"name", t.name}, {"shape", t.shape}});
    if (t.matrix) {
      for (int r = 0; r < t.matrix->rows(); ++r) {
        for (int c = 0; c < t.matrix->cols(); ++c) put_f32(payload, (*t.matrix)(r, c));
      }
    } else {
      for (int i = 0; i < t.vector->size(); ++i) put_f32(payload, (*t.vector)[i]);
    }
  }
  const nlohmann::json header{{"architecture", to_json(net.architecture())},
                              {"tensors", entries},
                              {"checksum", sha256_hex(payload)}};
  const std::string text = header.dump();
  const auto length = static_cast<std::uint32_t>(text.size());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kWeightsVersion), sizeof(kWeightsVersion));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error("policy weights: write failed");
}

void save_policy_weights(const MoeNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("policy weights: cannot open {}", path.string()));
  write_policy_weights(net, out);
}

nlohmann::json read_policy_header(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("policy weights: bad magic");
  }
  std::uint16_t version = 0;
  std::uint32_t length = 0;
  if (!in.read(reinterpret_cast<char*>(&version), sizeof(version)) ||
      !in.read(reinterpret_cast<char*>(&length), sizeof(length))) {
    throw FormatError("policy weights: truncated preamble");
  }
  if (version != kWeightsVersion) {
    throw FormatError(fmt::format("policy weights: unsupported version {}", version));
  }
  std::string text(length, '\0');
  if (!in.read(text.data(), length)) throw FormatError("policy weights: truncated header");
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("policy weights: header is not JSON ({})", e.what()));
  }
}

MoeNetwork read_policy_weights(std::istream& in) {
  const nlohmann::json header = read_policy_header(in);
  if (!header.contains("architecture") || !header.contains("tensors") ||
      !header.contains("checksum")) {
    throw FormatError("policy weights: header lacks architecture, tensors or checksum");
  }
  const MoeArchitecture arch = architecture_from_json(header.at("architecture"));
  const std::string payload{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (sha256_hex(payload) != header.at("checksum").get<std::string>()) {
    throw FormatError("policy weights: checksum mismatch");
  }

  std::size_t pos = 0;
  auto next_f32 = [&]() {
    if (pos + 4 > payload.size()) throw FormatError("policy weights: truncated tensor data");
    float f;
    std::memcpy(&f, payload.data() + pos, 4);
    pos += 4;
    if (!std::isfinite(f)) throw FormatError("policy weights: non-finite value");
    return static_cast<double>(f);
  };

  // Expected tensor order follows the architecture.
  std::vector<std::string> expected;
  auto append = [&](std::vector<std::string> v) { expected.insert(expected.end(), v.begin(), v.end()); };
  append(tensor_names("gate", arch.gate_hidden.size() + 1));
  for (int k = 0; k < arch.num_experts; ++k) {
    append(tensor_names(fmt::format("expert{}", k), arch.expert_hidden.size() + 1));
  }
  append(tensor_names("head", arch.head_hidden.size() + 1));

  const auto& entries = header.at("tensors");
  if (entries.size() != expected.size()) {
    throw FormatError(fmt::format("policy weights: {} tensors, architecture needs {}",
                                  entries.size(), expected.size()));
  }

  std::vector<std::vector<DenseLayer>> groups;
  std::vector<DenseLayer> current;
  std::string current_prefix;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string name = entries[i].at("name").get<std::string>();
    if (name != expected[i]) {
      throw FormatError(fmt::format("policy weights: tensor {} is '{}', expected '{}'", i, name,
                                    expected[i]));
    }
    const auto shape = entries[i].at("shape").get<std::vector<int>>();
    const std::string prefix = name.substr(0, name.find('.'));
    if (prefix != current_prefix && !current.empty()) {
      groups.push_back(std::move(current));
      current.clear();
    }
    current_prefix = prefix;
    if (name.ends_with(".weight")) {
      if (shape.size() != 2) throw FormatError(fmt::format("policy weights: {} must be 2-D", name));
      DenseLayer layer{Eigen::MatrixXd(shape[0], shape[1]), Eigen::VectorXd()};
      for (int r = 0; r < shape[0]; ++r) {
        for (int c = 0; c < shape[1]; ++c) layer.weight(r, c) = next_f32();
      }
      current.push_back(std::move(layer));
    } else {
      if (shape.size() != 1 || shape[0] != current.back().weight.rows()) {
        throw FormatError(fmt::format("policy weights: {} has inconsistent shape", name));
      }
      current.back().bias.resize(shape[0]);
      for (int r = 0; r < shape[0]; ++r) current.back().bias[r] = next_f32();
    }
  }
  if (!current.empty()) groups.push_back(std::move(current));
  if (pos != payload.size()) throw FormatError("policy weights: trailing tensor data");

  try {
    Mlp gate(std::move(groups.front()), arch.activation);
    std::vector<Mlp> experts;
    for (int k = 0; k < arch.num_experts; ++k) experts.emplace_back(std::move(groups[1 + k]), arch.activation);
    Mlp head(std::move(groups.back()), arch.activation);
    return MoeNetwork(arch, std::move(gate), std::move(experts), std::move(head));
  } catch (const InvalidArgument& e) {
    throw FormatError(fmt::format("policy weights: {}", e.what()));
  }
}

MoeNetwork load_policy_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("policy weights: cannot open {}", path.string()));
  return read_policy_weights(in);
}

// --- history and controllers ------------------------------------------------

void ObservationHistory::reset(const Observation& first) {
  buffer_.assign(static_cast<std::size_t>(length_), first);
}

void ObservationHistory::push(const Observation& obs) {
  if (buffer_.empty()) {
    reset(obs);
    return;
  }
  buffer_.pop_front();
  buffer_.push_back(obs);
}

Eigen::VectorXd ObservationHistory::stacked() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(length_) * kObsDim);
  for (std::size_t i = 0; i < buffer_.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * kObsDim, kObsDim) = buffer_[i];
  }
  return out;
}

MoeOutput forward(const MoeNetwork& net, const ObservationHistory& history) {
  if (!history.full()) throw InvalidArgument("moe: history window not full");
  if (history.length() != net.architecture().history) {
    throw InvalidArgument(fmt::format("moe: history length {} != {}", history.length(),
                                      net.architecture().history));
  }
  return net.forward(history.stacked());
}

MoeController::MoeController(std::shared_ptr<const MoeNetwork> net)
    : net_(std::move(net)), history_(net_->architecture().history) {}

void MoeController::reset(const Observation& first) {
  history_.reset(first);
  last_.reset();
}

JointVector MoeController::act(const Observation& obs) {
  history_.push(obs);
  last_ = forward(*net_, history_);
  return last_->action;
}

ScriptedKind scripted_kind_from_string(std::string_view name) {
  if (name == "stand") return ScriptedKind::kStand;
  if (name == "trot_tracker") return ScriptedKind::kTrotTracker;
  if (name == "faulty") return ScriptedKind::kFaulty;
  throw InvalidArgument(fmt::format("unknown scripted policy '{}'", name));
}

ControllerFactory scripted_policy(ScriptedKind kind, double control_dt) {
  return [kind, control_dt]() -> std::unique_ptr<Controller> {
    switch (kind) {
      case ScriptedKind::kStand: return std::make_unique<StandController>();
      case ScriptedKind::kTrotTracker: return std::make_unique<TrotTrackerController>(control_dt);
      case ScriptedKind::kFaulty: return std::make_unique<FaultyController>(control_dt);
    }
    throw InvalidArgument("unknown scripted policy");
  };
}

ControllerFactory moe_policy(std::shared_ptr<const MoeNetwork> net) {
  return [net = std::move(net)]() -> std::unique_ptr<Controller> {
    return std::make_unique<MoeController>(net);
  };
}

// --- diagnostics --------------------------------------------------------------

double load_balance_diagnostic(const Eigen::MatrixXd& gates) {
  if (gates.rows() < 1 || gates.cols() < 1) throw InvalidArgument("load balance: empty batch");
  for (Eigen::Index j = 0; j < gates.rows(); ++j) {
    if ((gates.row(j).array() < -1e-12).any() || std::abs(gates.row(j).sum() - 1.0) > 1e-6) {
      throw InvalidArgument(fmt::format("load balance: row {} is not on the simplex", j));
    }
  }
  const double k = static_cast<double>(gates.cols());
  const Eigen::VectorXd mean = gates.colwise().mean().transpose();
  return (mean.array() - 1.0 / k).square().sum();
}

Eigen::MatrixXd pca_project(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw InvalidArgument("pca: need at least two rows");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centred = data.rowwise() - mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(data.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("pca: eigen decomposition failed");

  // Eigenvalues ascend; take the last two.
  const Eigen::Index d = cov.rows();
  const double top = d > 0 ? std::max(eig.eigenvalues()[d - 1], 0.0) : 0.0;
  const double scale = std::max(1.0, centred.cwiseAbs().maxCoeff());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(data.rows(), 2);
  for (int c = 0; c < 2 && c < d; ++c) {
    const double lambda = eig.eigenvalues()[d - 1 - c];
    if (!(lambda > 1e-12 * scale * scale) || lambda <= 1e-12 * top) continue;
    Eigen::VectorXd axis = eig.eigenvectors().col(d - 1 - c);
    for (Eigen::Index i = 0; i < axis.size(); ++i) {
      if (std::abs(axis[i]) > 1e-9) {
        if (axis[i] < 0.0) axis = -axis;
        break;
      }
    }
    out.col(c) = centred * axis;
  }
  return out;
}

void dump_latents(const std::vector<LatentRow>& rows, int num_experts, int latent_dim,
                  std::ostream& out) {
  out << "time,terrain,command";
  for (int k = 1; k <= num_experts; ++k) out << ",w" << k;
  for (int i = 1; i <= latent_dim; ++i) out << ",z" << i;
  out << '\n';
  for (const auto& r : rows) {
    if (r.gate.size() != num_experts || r.latent.size() != latent_dim) {
      throw InvalidArgument("latents: row width does not match the header");
    }
    out << fmt::format("{:.6f},{},{}", r.time, r.terrain, r.command_id);
    for (double w : r.gate) out << fmt::format(",{:.17g}", w);
    for (double z : r.latent) out << fmt::format(",{:.17g}", z);
    out << '\n';
  }
  if (!out) throw Error("latents: write failed");
}

Eigen::MatrixXd read_latent_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("latents: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<int> zcols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!header[i].empty() && header[i][0] == 'z') zcols.push_back(static_cast<int>(i));
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw FormatError("latents: ragged row");
    std::vector<double> row;
    for (int c : zcols) row.push_back(std::stod(cells[c]));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(zcols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < zcols.size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

}  // namespace locogauge
