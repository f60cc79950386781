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

// TCP accommodations: receiver-side resequencing, and the two ways of getting
// TCP segments through NATs that never saw the connection's SYN.

#ifndef MPIP_TRANSPORT_COMPAT_HPP
#define MPIP_TRANSPORT_COMPAT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mpip/packet.hpp"
#include "mpip/tables.hpp"

namespace mpip {

constexpr std::size_t kReorderCapacity = 100;

/// Serial-number comparison on 32-bit sequence space.
inline bool seq_lt(std::uint32_t a, std::uint32_t b) {
  return static_cast<std::int32_t>(a - b) < 0;
}

/// Holds segments that arrive ahead of the next expected sequence number and
/// releases them in order. When it holds `capacity` segments and another gap
/// segment shows up, everything is pushed up at once.
class ReorderBuffer {
 public:
  struct Stats {
    std::uint64_t buffered = 0;
    std::uint64_t flushes = 0;
    std::uint64_t passthrough = 0;
    std::uint64_t duplicates = 0;
  };

  explicit ReorderBuffer(std::size_t capacity = kReorderCapacity) : capacity_(capacity) {}

  /// Sets the next expected sequence number if none is known yet.
  void expect(std::uint32_t seq);
  std::optional<std::uint32_t> expected_seq() const { return expected_; }

  /// Returns the segments to hand to the transport, in delivery order.
  /// `flushed` is set when the call triggered a full-buffer flush.
  std::vector<SimPacket> on_segment(SimPacket seg, bool* flushed = nullptr);

  std::size_t size() const { return buffered_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Stats& stats() const { return stats_; }

 private:
  void drain(std::vector<SimPacket>& out);

  std::size_t capacity_;
  std::optional<std::uint32_t> expected_;
  std::uint32_t origin_ = 0;
  // Keyed by offset from origin_ so ordering survives sequence wraparound.
  std::map<std::uint32_t, SimPacket> buffered_;
  Stats stats_;
};

enum class NatTraversal { None, FakeHandshake, UdpWrapper };

const char* to_string(NatTraversal m);
std::optional<NatTraversal> parse_nat_traversal(std::string_view s);

/// Encapsulates a TCP packet in a UDP datagram addressed along `path`.
SimPacket udp_wrap(const SimPacket& tcp, const PathRecord& path);

/// Strips the UDP header of a wrapped packet and restores the session's
/// original 4-tuple (seen from the receiver: remote -> local).
/// Returns nullopt for a packet that is not a wrapped TCP segment.
std::optional<SimPacket> udp_unwrap(const SimPacket& pkt, const SessionRecord& session);

/// Steps of the fake three-way handshake, identified by TCP flags.
enum class HandshakeStep { Syn, SynAck, Ack, Invalid };

HandshakeStep classify_handshake(std::uint8_t tcp_flags);

/// TCP flags of the packet answering `step`, or nullopt when the exchange ends.
std::optional<std::uint8_t> handshake_reply(HandshakeStep step);

}  // namespace mpip

#endif  // MPIP_TRANSPORT_COMPAT_HPP
