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

#include "locogauge/bridge.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "locogauge/config.hpp"

namespace locogauge {
namespace {

using nlohmann::json;

json joint_array(const JointVector& v) {
  json a = json::array();
  for (int i = 0; i < kNumJoints; ++i) a.push_back(v[i]);
  return a;
}

JointVector joint_vector_from(const json& a) {
  if (!a.is_array() || a.size() != kNumJoints) {
    throw InvalidArgument(fmt::format("expected {} joint values", kNumJoints));
  }
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) {
    if (!a[i].is_number()) throw InvalidArgument("joint value is not a number");
    v[i] = a[i].get<double>();
    if (!std::isfinite(v[i])) throw InvalidArgument("joint value is not finite");
  }
  return v;
}

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    // send() avoids SIGPIPE on sockets; stdio pipes need plain write().
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0 && errno == ENOTSOCK) w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("io", std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

}  // namespace

json error_frame(const std::string& code, const std::string& message) {
  return {{"type", "ERROR"}, {"code", code}, {"message", message}};
}

std::vector<std::uint8_t> encode_frame_bytes(const std::string& payload) {
  if (payload.size() > kMaxFrameBytes) throw ProtocolError("bad_frame", "frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::vector<std::uint8_t> out(4 + payload.size());
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(n >> (8 * i));
  std::memcpy(out.data() + 4, payload.data(), payload.size());
  return out;
}

std::vector<std::uint8_t> encode_frame(const json& message) { return encode_frame_bytes(message.dump()); }

void FrameDecoder::feed(const std::uint8_t* data, std::size_t n) {
  buffer_.insert(buffer_.end(), data, data + n);
}

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(buffer_[i]) << (8 * i);
  if (n > kMaxFrameBytes) {
    buffer_.clear();
    throw ProtocolError("bad_frame", fmt::format("declared length {} exceeds limit", n));
  }
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string payload(buffer_.begin() + 4, buffer_.begin() + 4 + n);
  buffer_.erase(buffer_.begin(), buffer_.begin() + 4 + n);
  return payload;
}

FrameChannel::FrameChannel(int read_fd, int write_fd, bool owned)
    : read_fd_(read_fd), write_fd_(write_fd), owned_(owned) {}

FrameChannel::~FrameChannel() {
  if (!owned_) return;
  ::close(read_fd_);
  if (write_fd_ != read_fd_) ::close(write_fd_);
}

void FrameChannel::send(const json& message) { send_raw(message.dump()); }

void FrameChannel::send_raw(const std::string& payload) {
  const auto bytes = encode_frame_bytes(payload);
  write_all(write_fd_, bytes.data(), bytes.size());
}

std::optional<std::string> FrameChannel::receive() {
  std::uint8_t buf[65536];
  while (true) {
    if (auto frame = decoder_.next()) return frame;
    const ssize_t r = ::read(read_fd_, buf, sizeof buf);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("io", std::strerror(errno));
    }
    if (r == 0) {
      if (decoder_.buffered() > 0) {
        decoder_ = FrameDecoder{};
        throw ProtocolError("bad_frame", "stream ended inside a frame");
      }
      return std::nullopt;
    }
    decoder_.feed(buf, static_cast<std::size_t>(r));
  }
}

std::unique_ptr<FrameChannel> FrameChannel::connect_tcp(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw ProtocolError("connect", "address must be host:port");
  const std::string host = address.substr(0, colon), port = address.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ProtocolError("connect", fmt::format("{}: {}", address, ::gai_strerror(rc)));
  }
  int fd = -1;
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProtocolError("connect", fmt::format("cannot connect to {}", address));
  return std::make_unique<FrameChannel>(fd, fd, true);
}

std::pair<std::unique_ptr<FrameChannel>, std::unique_ptr<FrameChannel>> FrameChannel::socket_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw ProtocolError("io", std::strerror(errno));
  return {std::make_unique<FrameChannel>(fds[0], fds[0], true),
          std::make_unique<FrameChannel>(fds[1], fds[1], true)};
}

json to_json(const TerrainSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"difficulty", s.difficulty},
          {"length_m", s.length_m},
          {"width_m", s.width_m},
          {"resolution_m", s.resolution_m},
          {"seed", s.seed}};
}

TerrainSpec terrain_spec_from_json(const json& j) {
  TerrainSpec s;
  s.kind = terrain_kind_from_string(j.at("kind").get<std::string>());
  s.difficulty = j.at("difficulty").get<double>();
  s.length_m = j.at("length_m").get<double>();
  s.width_m = j.at("width_m").get<double>();
  s.resolution_m = j.at("resolution_m").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

json make_hello(const RobotDescription& robot, const Heightfield& terrain,
                const DomainRandomization& dr, std::uint64_t seed, const SimConfig& sim) {
  json t = {{"heightfield", base64_encode(to_binary(terrain))},
            {"origin", {terrain.origin().x(), terrain.origin().y()}}};
  t["spec"] = terrain.spec() ? to_json(*terrain.spec()) : json(nullptr);
  return {{"type", "HELLO"},
          {"protocol_version", kProtocolVersion},
          {"robot", to_json(robot)},
          {"terrain", t},
          {"dr", to_json(dr)},
          {"seed", seed},
          {"sim", to_json(sim)}};
}

// ---------------------------------------------------------------------------
// BridgeSimulator

BridgeSimulator::BridgeSimulator(std::unique_ptr<FrameChannel> channel, SimConfig config,
                                 RobotDescription robot)
    : channel_(std::move(channel)), config_(std::move(config)), robot_(std::move(robot)) {
  if (!channel_) throw InvalidArgument("bridge: null channel");
  validate(config_);
}

BridgeSimulator::~BridgeSimulator() {
  try {
    finish("closed");
  } catch (const std::exception&) {
    // Peer already gone; nothing left to tell it.
  }
}

json BridgeSimulator::exchange(const json& request, std::string_view expected) {
  channel_->send(request);
  const auto payload = channel_->receive();
  if (!payload) throw ProtocolError("closed", "backend closed the connection");
  json reply = json::parse(*payload, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("type") ||
      !reply["type"].is_string()) {
    throw ProtocolError("bad_frame", "backend sent a malformed frame");
  }
  const auto type = reply["type"].get<std::string>();
  if (type == "ERROR") {
    throw ProtocolError(reply.value("code", "backend_error"), reply.value("message", ""));
  }
  if (type != expected) {
    throw ProtocolError("unexpected", fmt::format("expected {}, got {}", expected, type));
  }
  return reply;
}

RobotState BridgeSimulator::parse_state(const json& reply) const {
  try {
    RobotState s = state_from_json(reply.at("state"));
    validate_state(s);
    return s;
  } catch (const ProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError("bad_state", e.what());
  }
}

RobotState BridgeSimulator::reset(const Heightfield& terrain, const DomainRandomization& dr,
                                  std::uint64_t seed) {
  validate(dr);
  finish("reset");
  latency_.emplace(dr.control_latency, config_.physics_hz);
  command_ = Command{};
  fallen_ = false;
  const json reply = exchange(make_hello(robot_, terrain, dr, seed, config_), "RESET_ACK");
  if (reply.value("protocol_version", -1) != kProtocolVersion) {
    throw ProtocolError("bad_version", "backend answered with another protocol version");
  }
  in_episode_ = true;
  return parse_state(reply);
}

RobotState BridgeSimulator::step(const JointVector& action) {
  if (!in_episode_) throw Error("bridge: step called before reset");
  if (!action.allFinite()) throw InvalidArgument("bridge: non-finite action");
  const JointVector clipped = action.cwiseMax(-config_.action_clip).cwiseMin(config_.action_clip);
  json actions = json::array();
  for (int i = 0; i < config_.substeps(); ++i) actions.push_back(joint_array(latency_->push(clipped)));
  const json request = {{"type", "STEP"},
                        {"command", {command_.vx, command_.vy, command_.wz}},
                        {"actions", actions}};
  const json reply = exchange(request, "STATE");
  RobotState s = parse_state(reply);
  fallen_ = reply.value("fallen", false);
  return s;
}

void BridgeSimulator::finish(const std::string& reason) {
  if (!in_episode_) return;
  in_episode_ = false;
  exchange({{"type", "DONE"}, {"reason", reason}}, "DONE");
}

// ---------------------------------------------------------------------------
// StubBackend

json StubBackend::handle(const std::string& payload) {
  const json msg = json::parse(payload, nullptr, false);
  if (msg.is_discarded()) return error_frame("bad_frame", "payload is not JSON");
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return error_frame("bad_frame", "message must be an object with a string 'type'");
  }
  const auto type = msg["type"].get<std::string>();
  try {
    if (type == "HELLO") return on_hello(msg);
    if (type == "STEP") {
      if (!in_episode_) return error_frame("unexpected", "STEP before HELLO");
      return on_step(msg);
    }
    if (type == "DONE") {
      if (!in_episode_) return error_frame("unexpected", "DONE outside an episode");
      in_episode_ = false;
      return {{"type", "DONE"}, {"reason", msg.value("reason", "")}};
    }
    return error_frame("bad_frame", fmt::format("unknown message type '{}'", type));
  } catch (const std::exception& e) {
    return error_frame("bad_message", e.what());
  }
}

json StubBackend::on_hello(const json& msg) {
  if (msg.value("protocol_version", -1) != kProtocolVersion) {
    return error_frame("bad_version", fmt::format("only protocol version {} is supported", kProtocolVersion));
  }
  RobotDescription robot = robot_from_json(msg.at("robot"));
  const json& t = msg.at("terrain");
  Heightfield hf = from_binary(base64_decode(t.at("heightfield").get<std::string>()));
  const auto& origin = t.at("origin");
  std::optional<TerrainSpec> spec;
  if (t.contains("spec") && !t["spec"].is_null()) spec = terrain_spec_from_json(t["spec"]);
  hf = Heightfield(hf.rows(), hf.cols(), hf.resolution(),
                   {origin.at(0).get<double>(), origin.at(1).get<double>()}, hf.heights(), spec);
  const DomainRandomization dr = dr_from_json(msg.at("dr"));
  (void)dr;  // no physics to randomize
  sim_ = sim_config_from_json(msg.at("sim"));

  const Eigen::Vector2d spawn = hf.spawn_point();
  state_ = RobotState{};
  state_.base_position << spawn.x(), spawn.y(),
      hf.height_clamped(spawn.x(), spawn.y()) + robot.nominal_base_height;
  state_.q = robot.default_pose;
  state_.foot_contact.fill(true);
  robot_ = std::move(robot);
  terrain_ = std::move(hf);
  in_episode_ = true;
  return {{"type", "RESET_ACK"}, {"protocol_version", kProtocolVersion}, {"state", to_json(state_)}};
}

json StubBackend::on_step(const json& msg) {
  const json& actions = msg.at("actions");
  if (!actions.is_array() || static_cast<int>(actions.size()) != sim_.substeps()) {
    return error_frame("bad_message", fmt::format("STEP needs {} substep actions", sim_.substeps()));
  }
  JointVector last = JointVector::Zero();
  for (const auto& a : actions) last = joint_vector_from(a);
  Command cmd;
  if (msg.contains("command")) {
    const auto& c = msg["command"];
    if (!c.is_array() || c.size() != 3) return error_frame("bad_message", "command must have 3 entries");
    cmd = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
  }
  const double dt = sim_.control_dt();
  const double yaw = roll_pitch_yaw(state_.base_orientation).z() + cmd.wz * dt;
  const Eigen::Rotation2Dd rot(yaw);
  const Eigen::Vector2d xy = state_.base_position.head<2>() + rot * Eigen::Vector2d(cmd.vx, cmd.vy) * dt;
  const JointVector q = robot_->default_pose + last;

  state_.dq = (q - state_.q) / dt;
  state_.q = q;
  state_.tau.setZero();
  state_.base_orientation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
  state_.base_position << xy.x(), xy.y(), terrain_->height_clamped(xy.x(), xy.y()) + robot_->nominal_base_height;
  state_.lin_vel << cmd.vx, cmd.vy, 0.0;
  state_.ang_vel << 0.0, 0.0, cmd.wz;
  state_.projected_gravity << 0.0, 0.0, -1.0;
  state_.collisions = 0;
  return {{"type", "STATE"}, {"state", to_json(state_)}, {"fallen", false}};
}

void StubBackend::serve(FrameChannel& channel) {
  while (true) {
    std::optional<std::string> frame;
    try {
      frame = channel.receive();
    } catch (const ProtocolError& e) {
      if (e.code() != "bad_frame") return;
      try {
        channel.send(error_frame("bad_frame", e.what()));
      } catch (const ProtocolError&) {
        return;
      }
      continue;
    }
    if (!frame) return;
    try {
      channel.send(handle(*frame));
    } catch (const ProtocolError&) {
      return;  // peer went away mid-reply
    }
  }
}

}  // namespace locogauge
