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

#include "locogauge/robot.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "locogauge/util.hpp"

namespace locogauge {
namespace {

JointVector joint_vector_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(fmt::format("robot: missing '{}'", key));
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != kNumJoints) {
    throw InvalidArgument(fmt::format("robot: '{}' must have {} entries", key, kNumJoints));
  }
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) {
    if (!a[i].is_number()) throw InvalidArgument(fmt::format("robot: '{}'[{}] not a number", key, i));
    v[i] = a[i].get<double>();
    if (!std::isfinite(v[i])) throw InvalidArgument(fmt::format("robot: '{}'[{}] not finite", key, i));
  }
  return v;
}

nlohmann::json joint_vector_to_json(const JointVector& v) {
  auto a = nlohmann::json::array();
  for (int i = 0; i < kNumJoints; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

void set_soft_limits(RobotDescription& robot, double fraction) {
  const JointVector mid = 0.5 * (robot.hard_lower + robot.hard_upper);
  const JointVector half = 0.5 * (robot.hard_upper - robot.hard_lower);
  robot.soft_lower = mid - fraction * half;
  robot.soft_upper = mid + fraction * half;
}

RobotDescription default_quadruped() {
  RobotDescription r;
  r.name = "go2";
  const char* legs[] = {"FL", "FR", "RL", "RR"};
  const char* joints[] = {"hip", "thigh", "calf"};
  for (int leg = 0; leg < 4; ++leg) {
    for (int j = 0; j < 3; ++j) {
      r.joint_names[joint_index(leg, j)] = fmt::format("{}_{}_joint", legs[leg], joints[j]);
    }
  }
  r.default_pose << 0.1, 0.8, -1.5,   // FL
      -0.1, 0.8, -1.5,                // FR
      0.1, 1.0, -1.5,                 // RL
      -0.1, 1.0, -1.5;                // RR
  for (int leg = 0; leg < 4; ++leg) {
    const bool front = leg < 2;
    r.hard_lower[joint_index(leg, kHip)] = -1.0472;
    r.hard_upper[joint_index(leg, kHip)] = 1.0472;
    r.hard_lower[joint_index(leg, kThigh)] = front ? -1.5708 : -0.5236;
    r.hard_upper[joint_index(leg, kThigh)] = front ? 3.4907 : 4.5379;
    r.hard_lower[joint_index(leg, kCalf)] = -2.7227;
    r.hard_upper[joint_index(leg, kCalf)] = -0.83776;
    r.torque_limit[joint_index(leg, kHip)] = 23.7;
    r.torque_limit[joint_index(leg, kThigh)] = 23.7;
    r.torque_limit[joint_index(leg, kCalf)] = 45.43;
  }
  set_soft_limits(r);
  r.nominal_base_height = 0.38;
  r.mass = 15.0;
  return r;
}

RobotDescription robot_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("robot: description must be a JSON object");
  RobotDescription r;
  r.name = j.value("name", std::string("robot"));
  if (!j.contains("joint_names") || !j.at("joint_names").is_array() ||
      j.at("joint_names").size() != kNumJoints) {
    throw InvalidArgument("robot: 'joint_names' must list 12 joints");
  }
  for (int i = 0; i < kNumJoints; ++i) r.joint_names[i] = j.at("joint_names")[i].get<std::string>();
  r.default_pose = joint_vector_from_json(j, "default_pose");
  r.hard_lower = joint_vector_from_json(j, "hard_lower");
  r.hard_upper = joint_vector_from_json(j, "hard_upper");
  r.torque_limit = joint_vector_from_json(j, "torque_limit");
  if (j.contains("soft_lower") || j.contains("soft_upper")) {
    r.soft_lower = joint_vector_from_json(j, "soft_lower");
    r.soft_upper = joint_vector_from_json(j, "soft_upper");
  } else {
    set_soft_limits(r, j.value("soft_limit_fraction", 0.95));
  }
  r.nominal_base_height = j.value("nominal_base_height", 0.38);
  r.mass = j.value("mass", 15.0);
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(r.hard_lower[i] < r.hard_upper[i])) {
      throw InvalidArgument(fmt::format("robot: joint {} has an empty hard range", i));
    }
    if (!(r.soft_lower[i] <= r.soft_upper[i])) {
      throw InvalidArgument(fmt::format("robot: joint {} has an empty soft range", i));
    }
    if (!(r.torque_limit[i] > 0.0)) {
      throw InvalidArgument(fmt::format("robot: joint {} torque limit must be positive", i));
    }
  }
  if (!(r.nominal_base_height > 0.0)) throw InvalidArgument("robot: nominal_base_height must be positive");
  return r;
}

nlohmann::json to_json(const RobotDescription& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["joint_names"] = r.joint_names;
  j["default_pose"] = joint_vector_to_json(r.default_pose);
  j["hard_lower"] = joint_vector_to_json(r.hard_lower);
  j["hard_upper"] = joint_vector_to_json(r.hard_upper);
  j["soft_lower"] = joint_vector_to_json(r.soft_lower);
  j["soft_upper"] = joint_vector_to_json(r.soft_upper);
  j["torque_limit"] = joint_vector_to_json(r.torque_limit);
  j["nominal_base_height"] = r.nominal_base_height;
  j["mass"] = r.mass;
  return j;
}

RobotDescription load_robot_description(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open robot description '{}'", path.string()));
  try {
    return robot_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(fmt::format("robot description '{}': {}", path.string(), e.what()));
  }
}

}  // namespace locogauge
