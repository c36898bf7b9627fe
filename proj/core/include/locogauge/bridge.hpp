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
 * bridge.hpp
 *
 * Engine side of the external backend protocol. Frames are a little-endian
 * u32 byte count followed by that many bytes of UTF-8 JSON. Every message is
 * an object with a "type" field:
 *
 *   engine  -> backend   HELLO   episode setup, answered by RESET_ACK
 *   engine  -> backend   STEP    one control step, answered by STATE
 *   engine  -> backend   DONE    episode end, answered by DONE
 *   backend -> engine    ERROR   {code, message}, in place of any answer
 *
 * After HELLO the exchange strictly alternates. The engine applies the
 * actuation latency queue itself and sends one action per physics substep;
 * the backend applies the PD law with the gains sent in HELLO. See
 * docs/wire_protocol.md for byte-level examples.
 */

#ifndef LOCOGAUGE_BRIDGE_HPP_
#define LOCOGAUGE_BRIDGE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locogauge/sim.hpp"

namespace locogauge {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

/// Length-prefixed encoding of a JSON document (compact dump).
std::vector<std::uint8_t> encode_frame(const nlohmann::json& message);
std::vector<std::uint8_t> encode_frame_bytes(const std::string& payload);

/// Splits a byte stream into frame payloads. Incomplete trailing data stays
/// buffered until more bytes arrive.
class FrameDecoder {
 public:
  void feed(const std::uint8_t* data, std::size_t n);
  /// Throws ProtocolError("bad_frame") when a length exceeds kMaxFrameBytes.
  std::optional<std::string> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::vector<std::uint8_t> buffer_;
};

/// Blocking frame I/O over a pair of file descriptors (a socket uses the
/// same fd twice). Owns the descriptors when `owned` is set.
class FrameChannel {
 public:
  FrameChannel(int read_fd, int write_fd, bool owned);
  ~FrameChannel();
  FrameChannel(const FrameChannel&) = delete;
  FrameChannel& operator=(const FrameChannel&) = delete;

  void send(const nlohmann::json& message);
  void send_raw(const std::string& payload);
  /// nullopt on orderly end of stream.
  std::optional<std::string> receive();

  /// Connects to "host:port". Throws ProtocolError("connect").
  static std::unique_ptr<FrameChannel> connect_tcp(const std::string& address);
  /// Anonymous socket pair for in-process backends.
  static std::pair<std::unique_ptr<FrameChannel>, std::unique_ptr<FrameChannel>> socket_pair();

 private:
  int read_fd_;
  int write_fd_;
  bool owned_;
  FrameDecoder decoder_;
};

nlohmann::json to_json(const TerrainSpec& spec);
TerrainSpec terrain_spec_from_json(const nlohmann::json& j);

nlohmann::json make_hello(const RobotDescription& robot, const Heightfield& terrain,
                          const DomainRandomization& dr, std::uint64_t seed, const SimConfig& sim);

/// Simulator whose physics live in another process.
class BridgeSimulator final : public Simulator {
 public:
  BridgeSimulator(std::unique_ptr<FrameChannel> channel, SimConfig config, RobotDescription robot);
  ~BridgeSimulator() override;

  RobotState reset(const Heightfield& terrain, const DomainRandomization& dr,
                   std::uint64_t seed) override;
  RobotState step(const JointVector& action) override;
  void set_command(const Command& cmd) override { command_ = cmd; }
  bool fallen() const override { return fallen_; }
  const SimConfig& config() const override { return config_; }
  const RobotDescription& robot() const override { return robot_; }

  /// Sends DONE for the running episode, if any.
  void finish(const std::string& reason);

 private:
  nlohmann::json exchange(const nlohmann::json& request, std::string_view expected);
  RobotState parse_state(const nlohmann::json& reply) const;

  std::unique_ptr<FrameChannel> channel_;
  SimConfig config_;
  RobotDescription robot_;
  std::optional<LatencyQueue> latency_;
  Command command_;
  bool fallen_ = false;
  bool in_episode_ = false;
};

/// Protocol endpoint without physics, used for conformance tests and as a
/// template for real adapters. The robot stands at the nominal height over
/// the spawn point; joints follow the last action exactly and the base
/// moves with the commanded velocity carried in STEP.
class StubBackend {
 public:
  /// Answer to one frame payload. Never throws: every failure becomes an
  /// ERROR frame and the session stays usable.
  nlohmann::json handle(const std::string& payload);
  /// Serves until the peer closes the channel.
  void serve(FrameChannel& channel);

 private:
  nlohmann::json on_hello(const nlohmann::json& msg);
  nlohmann::json on_step(const nlohmann::json& msg);

  std::optional<RobotDescription> robot_;
  std::optional<Heightfield> terrain_;
  SimConfig sim_;
  RobotState state_;
  bool in_episode_ = false;
};

nlohmann::json error_frame(const std::string& code, const std::string& message);

}  // namespace locogauge

#endif  // LOCOGAUGE_BRIDGE_HPP_
