// Copyright 2026 The mpipsim Authors
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

// Control-message (CM) block appended to every MPIP packet.
//
// Wire layout, 25 bytes, multi-byte fields big-endian:
//
//   byte  0      flags (bits 0-5) | version << 6
//   bytes 1-6    source node ID
//   bytes 7-8    session ID
//   byte  9      path ID
//   byte  10     feedback path ID
//   bytes 11-14  packet timestamp (ms, unsigned, wraps)
//   bytes 15-18  path delay (ms, signed)
//   byte  19     advertised address count
//   bytes 20-23  advertised address (one per packet, rotating)
//   byte  24     XOR of bytes 0-23

#ifndef MPIP_CM_HPP
#define MPIP_CM_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "mpip/types.hpp"

namespace mpip {

constexpr std::size_t kCmSize = 25;
constexpr std::uint8_t kCmVersion = 1;

namespace cm_flag {
constexpr std::uint8_t kEnable = 1u << 0;
constexpr std::uint8_t kEnabled = 1u << 1;
constexpr std::uint8_t kHandshake = 1u << 2;
constexpr std::uint8_t kIpChange = 1u << 3;
constexpr std::uint8_t kHeartbeat = 1u << 4;
constexpr std::uint8_t kProtected = 1u << 5;
/// Bits owned by the version field.
constexpr std::uint8_t kReservedMask = 0xC0;
}  // namespace cm_flag

struct ControlMessage {
  std::uint8_t version = kCmVersion;
  std::uint8_t flags = 0;
  NodeId source_node_id;
  std::uint16_t session_id = 0;
  std::uint8_t path_id = 0;
  std::uint8_t feedback_path_id = 0;
  std::uint32_t packet_timestamp = 0;
  std::int32_t path_delay = 0;
  std::uint8_t addr_count = 0;
  Addr addr_slot = 0;

  bool has(std::uint8_t flag) const { return (flags & flag) != 0; }

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

using CmBytes = std::array<std::uint8_t, kCmSize>;

enum class CmErrc { Encoding, Truncated, Corrupt, Malformed };

class CmError : public std::runtime_error {
 public:
  CmError(CmErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  CmErrc code() const { return code_; }

 private:
  CmErrc code_;
};

/// Throws CmError(Encoding) naming the offending field when a value is out of range.
CmBytes encode_cm(const ControlMessage& cm);

/// Decodes the final 25 bytes of `buf`.
/// Throws CmError(Truncated | Corrupt | Malformed).
ControlMessage decode_cm(std::span<const std::uint8_t> buf);

std::uint8_t cm_checksum(std::span<const std::uint8_t> first24);

}  // namespace mpip

#endif  // MPIP_CM_HPP
