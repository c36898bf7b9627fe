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
 * rewards.hpp
 *
 * Training reward table evaluated on recorded steps. Unweighted terms:
 *
 *   lin_tracking       exp(-s ||v_xy^cmd - v_xy||^2)
 *   ang_tracking       exp(-s (w_z^cmd - w_z)^2)
 *   lin_vel_z          v_z^2
 *   ang_vel_xy         ||w_xy||^2
 *   joint_acc          sum_i ((dq_i - dq_i^prev) / dt)^2
 *   joint_power        sum_i |tau_i| |dq_i|
 *   joint_torque       ||tau||^2
 *   base_height        (h_des - h)^2, h above the terrain under the base
 *   action_rate        ||a_t - a_{t-1}||^2
 *   action_smoothness  ||a_t - 2 a_{t-1} + a_{t-2}||^2
 *   collision          number of body contacts
 *   joint_limit        number of joints outside the soft limits
 *   foot_regulation    pluggable, 0 by default
 *   hip_regulation     sum_hips |q^hip - q_default^hip|
 *   hip_symmetry       |v_x^cmd| / ||v_xy^cmd|| (|q_FL + q_FR| + |q_RL + q_RR|)
 *
 * where s is sigma in the default form and 1/sigma in the conventional form.
 * Missing history at the start of a trial reads as zero actions and zero
 * joint velocity.
 */

#ifndef LOCOGAUGE_REWARDS_HPP_
#define LOCOGAUGE_REWARDS_HPP_

#include <array>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "locogauge/robot.hpp"
#include "locogauge/sim.hpp"
#include "locogauge/trace.hpp"

namespace locogauge {

enum RewardTerm : int {
  kRewLinTracking = 0,
  kRewAngTracking,
  kRewLinVelZ,
  kRewAngVelXY,
  kRewJointAcc,
  kRewJointPower,
  kRewJointTorque,
  kRewBaseHeight,
  kRewActionRate,
  kRewActionSmoothness,
  kRewCollision,
  kRewJointLimit,
  kRewFootRegulation,
  kRewHipRegulation,
  kRewHipSymmetry,
};
inline constexpr int kNumRewardTerms = 15;
std::string_view reward_term_name(int term);

using RewardArray = std::array<double, kNumRewardTerms>;

enum class TrackingForm {
  kPrinted,       // exp(-sigma e^2)
  kConventional,  // exp(-e^2 / sigma)
};

struct StepInput {
  const RobotState* state = nullptr;
  const RobotState* prev_state = nullptr;  // null at the start of a trial
  Command command;
  JointVector action = JointVector::Zero();
  JointVector prev_action = JointVector::Zero();
  JointVector prev_prev_action = JointVector::Zero();
  double terrain_height = 0.0;
};

using FootRegulationHook = std::function<double(const StepInput&)>;

struct RewardConfig {
  RewardArray weights{};
  double sigma = 0.25;
  double base_height_target = 0.38;
  double control_dt = 0.02;
  TrackingForm tracking = TrackingForm::kPrinted;
  FootRegulationHook foot_regulation;  // empty: term is 0

  /// Multi-terrain model weights.
  static RewardConfig multi_terrain();
  /// Flat high-speed variant: lin tracking 2.0, hip symmetry -1, h_des 0.33.
  static RewardConfig flat_high_speed();
};

void validate(const RewardConfig& cfg);
nlohmann::json to_json(const RewardConfig& cfg);
/// Starts from the preset named by "preset" (default multi_terrain).
RewardConfig reward_config_from_json(const nlohmann::json& j);

struct StepRewards {
  RewardArray terms{};  // unweighted
  double total = 0.0;   // sum of weight * term
};

StepRewards compute_step_rewards(const StepInput& in, const RobotDescription& robot,
                                 const RewardConfig& cfg);

struct RewardReport {
  std::size_t steps = 0;
  RewardArray sums{};       // unweighted, time-integrated (times control_dt)
  RewardArray means{};      // unweighted per-step means
  RewardArray weighted_means{};
  double total_mean = 0.0;  // sum of weighted means
};

/// Throws InvalidArgument for an empty trace.
RewardReport episode_reward_report(const EpisodeTrace& trace, const RobotDescription& robot,
                                   const RewardConfig& cfg);
/// term,weight,sum,mean,weighted_mean rows plus a total row.
void write_reward_csv(const RewardReport& report, const RewardConfig& cfg, std::ostream& out);

}  // namespace locogauge

#endif  // LOCOGAUGE_REWARDS_HPP_
