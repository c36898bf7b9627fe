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
 * policy.hpp
 *
 * Policies under test. The mixture-of-experts student encoder reads a window
 * of the last H observations; a softmax gate weighs K expert encoders and the
 * action head maps the mixed latent together with the newest observation to
 * joint position offsets:
 *
 *   w = softmax(gate(o_{t-H+1..t}))
 *   z = sum_k w_k expert_k(o_{t-H+1..t})
 *   a = head([z, o_t])
 */

#ifndef LOCOGAUGE_POLICY_HPP_
#define LOCOGAUGE_POLICY_HPP_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "locogauge/sim.hpp"

namespace locogauge {

enum class Activation { kElu, kRelu, kTanh, kIdentity };
Activation activation_from_string(std::string_view name);
std::string_view to_string(Activation a);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Feed-forward net: activation after every layer except the last.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<DenseLayer> layers, Activation activation);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  int input_dim() const;
  int output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  Activation activation() const { return activation_; }

 private:
  std::vector<DenseLayer> layers_;
  Activation activation_ = Activation::kElu;
};

struct MoeArchitecture {
  int num_experts = 4;
  int history = 5;
  int obs_dim = kObsDim;
  int action_dim = kNumJoints;
  int latent_dim = 32;
  Activation activation = Activation::kElu;
  std::vector<int> gate_hidden{256, 256};
  std::vector<int> expert_hidden{256, 256};
  std::vector<int> head_hidden{256, 256};

  int input_dim() const { return history * obs_dim; }
};

nlohmann::json to_json(const MoeArchitecture& arch);
MoeArchitecture architecture_from_json(const nlohmann::json& j);

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct MoeOutput {
  Eigen::VectorXd action;
  Eigen::VectorXd latent;
  Eigen::VectorXd gate;  // expert weights, on the simplex
};

/// Immutable after construction; shareable across workers.
class MoeNetwork {
 public:
  MoeNetwork(MoeArchitecture arch, Mlp gate, std::vector<Mlp> experts, Mlp head);

  /// Random weights (scaled uniform init), deterministic in `seed`.
  static MoeNetwork random(const MoeArchitecture& arch, std::uint64_t seed);

  /// `window` is the stacked observation history, oldest first.
  MoeOutput forward(const Eigen::VectorXd& window) const;

  const MoeArchitecture& architecture() const { return arch_; }
  const Mlp& gate() const { return gate_; }
  const std::vector<Mlp>& experts() const { return experts_; }
  const Mlp& head() const { return head_; }

 private:
  MoeArchitecture arch_;
  Mlp gate_;
  std::vector<Mlp> experts_;
  Mlp head_;
};

/// "RGPW", u16 version, u32 header length, JSON header, then little-endian
/// f32 tensors in header order. The header carries the architecture, tensor
/// names and shapes, and a SHA-256 of the tensor payload.
void write_policy_weights(const MoeNetwork& net, std::ostream& out);
void save_policy_weights(const MoeNetwork& net, const std::filesystem::path& path);
MoeNetwork read_policy_weights(std::istream& in);
MoeNetwork load_policy_weights(const std::filesystem::path& path);
/// Header block of a weights file without materialising the network.
nlohmann::json read_policy_header(std::istream& in);

/// Fixed-length window of the most recent observations.
class ObservationHistory {
 public:
  explicit ObservationHistory(int length) : length_(length) {}

  /// Clears and pre-fills every slot with `first`.
  void reset(const Observation& first);
  void push(const Observation& obs);
  bool full() const { return static_cast<int>(buffer_.size()) == length_; }
  int length() const { return length_; }
  /// Oldest first.
  Eigen::VectorXd stacked() const;
  const Observation& newest() const { return buffer_.back(); }

 private:
  int length_;
  std::deque<Observation> buffer_;
};

MoeOutput forward(const MoeNetwork& net, const ObservationHistory& history);

/// Per-episode policy instance. Implementations keep episode state (history,
/// gait phase); the network weights they reference are shared read-only.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const Observation& first) = 0;
  virtual JointVector act(const Observation& obs) = 0;
  /// Latent and gate of the last step, for policies that have them.
  virtual const MoeOutput* last_output() const { return nullptr; }
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

class MoeController final : public Controller {
 public:
  explicit MoeController(std::shared_ptr<const MoeNetwork> net);
  void reset(const Observation& first) override;
  JointVector act(const Observation& obs) override;
  const MoeOutput* last_output() const override { return last_ ? &*last_ : nullptr; }

 private:
  std::shared_ptr<const MoeNetwork> net_;
  ObservationHistory history_;
  std::optional<MoeOutput> last_;
};

enum class ScriptedKind { kStand, kTrotTracker, kFaulty };
ScriptedKind scripted_kind_from_string(std::string_view name);

/// Test doubles with known behaviour on the reference simulator.
ControllerFactory scripted_policy(ScriptedKind kind, double control_dt = 0.02);
ControllerFactory moe_policy(std::shared_ptr<const MoeNetwork> net);

/// sum_k (mean_j w_k^(j) - 1/K)^2 over a B x K matrix of gate rows.
/// Throws InvalidArgument if a row is not on the simplex (1e-6).
double load_balance_diagnostic(const Eigen::MatrixXd& gates);

/// Projects centred rows onto the top two principal axes. The sign of each
/// axis is fixed so that its first non-negligible loading is positive;
/// directions without variance project to zero.
Eigen::MatrixXd pca_project(const Eigen::MatrixXd& data);

struct LatentRow {
  double time = 0.0;
  std::string terrain;
  int command_id = 0;
  Eigen::VectorXd gate;
  Eigen::VectorXd latent;
};

/// CSV: time,terrain,command,w1..wK,z1..zD. Writes the header even when
/// `rows` is empty.
void dump_latents(const std::vector<LatentRow>& rows, int num_experts, int latent_dim,
                  std::ostream& out);
/// Latent columns (z1..zD) of a CSV written by dump_latents.
Eigen::MatrixXd read_latent_matrix(std::istream& in);

}  // namespace locogauge

#endif  // LOCOGAUGE_POLICY_HPP_
