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

#ifndef MPIP_PACKET_HPP
#define MPIP_PACKET_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "mpip/cm.hpp"
#include "mpip/types.hpp"

namespace mpip {

constexpr std::uint32_t kIpHeader = 20;
constexpr std::uint32_t kTcpHeader = 20;
constexpr std::uint32_t kUdpHeader = 8;
constexpr std::uint32_t kDefaultMtu = 1500;

namespace tcp_flag {
constexpr std::uint8_t kFin = 0x01;
constexpr std::uint8_t kSyn = 0x02;
constexpr std::uint8_t kAck = 0x10;
}  // namespace tcp_flag

struct TcpHeader {
  Port sport = 0;
  Port dport = 0;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t flags = 0;
  std::uint16_t window = 0;

  friend bool operator==(const TcpHeader&, const TcpHeader&) = default;
};

using TcpHeaderBytes = std::array<std::uint8_t, kTcpHeader>;

TcpHeaderBytes encode_tcp_header(const TcpHeader& h);
TcpHeader decode_tcp_header(std::span<const std::uint8_t, kTcpHeader> b);

/// A packet inside the simulator. Payload bytes are not materialised; a
/// payload is its length plus a digest identifying its content.
struct SimPacket {
  std::uint64_t uid = 0;
  Endpoint src;
  Endpoint dst;
  Proto proto = Proto::Tcp;
  std::uint32_t payload_len = 0;
  // TCP-like header fields, meaningful when proto == Tcp.
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t tcp_flags = 0;
  std::uint64_t digest = 0;
  std::optional<CmBytes> cm;
  /// Inner TCP header of a UDP-wrapped TCP packet.
  std::optional<TcpHeaderBytes> wrapped_tcp;
  SimTime created_at = 0;
  /// Scenario flow this packet belongs to, -1 for none.
  int flow = -1;
  /// Sender's path ID the packet arrived on, set by the receiving engine.
  std::uint8_t via_path = 0;

  TcpHeader tcp_header() const { return {src.port, dst.port, seq, ack, tcp_flags, 0}; }
  std::uint32_t wire_size() const;
};

}  // namespace mpip

#endif  // MPIP_PACKET_HPP
