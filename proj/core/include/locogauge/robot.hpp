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

#ifndef LOCOGAUGE_ROBOT_HPP_
#define LOCOGAUGE_ROBOT_HPP_

#include <array>
#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace locogauge {

inline constexpr int kNumJoints = 12;
inline constexpr int kNumFeet = 4;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;

/// Joint layout is leg-major FL, FR, RL, RR with (hip, thigh, calf) per leg.
inline constexpr int joint_index(int leg, int joint) { return 3 * leg + joint; }
inline constexpr int kHip = 0;
inline constexpr int kThigh = 1;
inline constexpr int kCalf = 2;
inline constexpr std::array<int, 4> kHipJoints = {0, 3, 6, 9};

/// Minimal robot description shared with external backends.
struct RobotDescription {
  std::string name;
  std::array<std::string, kNumJoints> joint_names;
  JointVector default_pose = JointVector::Zero();
  JointVector hard_lower = JointVector::Zero();
  JointVector hard_upper = JointVector::Zero();
  JointVector soft_lower = JointVector::Zero();
  JointVector soft_upper = JointVector::Zero();
  JointVector torque_limit = JointVector::Zero();
  double nominal_base_height = 0.38;
  double mass = 15.0;
};

/// Soft limits at `fraction` of the hard range, centred on its midpoint.
void set_soft_limits(RobotDescription& robot, double fraction = 0.95);

/// Built-in 12-DoF quadruped (Go2-class dimensions and limits).
RobotDescription default_quadruped();

RobotDescription robot_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RobotDescription& robot);
RobotDescription load_robot_description(const std::filesystem::path& path);

}  // namespace locogauge

#endif  // LOCOGAUGE_ROBOT_HPP_
