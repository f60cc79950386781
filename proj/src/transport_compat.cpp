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

#include "mpip/transport_compat.hpp"

namespace mpip {

void ReorderBuffer::expect(std::uint32_t seq) {
  if (expected_) return;
  expected_ = seq;
  origin_ = seq;
}

std::vector<SimPacket> ReorderBuffer::on_segment(SimPacket seg, bool* flushed) {
  if (flushed) *flushed = false;
  expect(seg.seq);
  std::vector<SimPacket> out;

  if (seg.seq == *expected_) {
    *expected_ += seg.payload_len;
    out.push_back(std::move(seg));
    drain(out);
    return out;
  }
  if (seq_lt(seg.seq, *expected_)) {
    ++stats_.passthrough;
    out.push_back(std::move(seg));
    return out;
  }

  const std::uint32_t key = seg.seq - origin_;
  if (buffered_.contains(key)) {
    ++stats_.duplicates;
    return out;
  }
  buffered_.emplace(key, std::move(seg));
  if (buffered_.size() <= capacity_) {
    ++stats_.buffered;
    return out;
  }

  // Full: push everything up in sequence order.
  ++stats_.flushes;
  if (flushed) *flushed = true;
  for (auto& [k, s] : buffered_) out.push_back(std::move(s));
  buffered_.clear();
  const auto& last = out.back();
  *expected_ = last.seq + last.payload_len;
  return out;
}

void ReorderBuffer::drain(std::vector<SimPacket>& out) {
  for (auto it = buffered_.begin(); it != buffered_.end();) {
    const std::uint32_t expected_key = *expected_ - origin_;
    if (it->first == expected_key) {
      *expected_ += it->second.payload_len;
      out.push_back(std::move(it->second));
      it = buffered_.erase(it);
    } else if (it->first < expected_key) {
      it = buffered_.erase(it);
    } else {
      break;
    }
  }
}

const char* to_string(NatTraversal m) {
  switch (m) {
    case NatTraversal::None: return "none";
    case NatTraversal::FakeHandshake: return "fake_handshake";
    case NatTraversal::UdpWrapper: return "udp_wrapper";
  }
  return "?";
}

std::optional<NatTraversal> parse_nat_traversal(std::string_view s) {
  if (s == "none") return NatTraversal::None;
  if (s == "fake_handshake" || s == "fake-handshake") return NatTraversal::FakeHandshake;
  if (s == "udp_wrapper" || s == "udp-wrapper") return NatTraversal::UdpWrapper;
  return std::nullopt;
}

SimPacket udp_wrap(const SimPacket& tcp, const PathRecord& path) {
  SimPacket out = tcp;
  out.wrapped_tcp = encode_tcp_header(tcp.tcp_header());
  out.proto = Proto::Udp;
  out.src = path.src;
  out.dst = path.dst;
  out.seq = 0;
  out.ack = 0;
  out.tcp_flags = 0;
  return out;
}

std::optional<SimPacket> udp_unwrap(const SimPacket& pkt, const SessionRecord& session) {
  if (pkt.proto != Proto::Udp || !pkt.wrapped_tcp || session.protocol != Proto::Tcp)
    return std::nullopt;
  const auto inner = decode_tcp_header(std::span<const std::uint8_t, kTcpHeader>(*pkt.wrapped_tcp));
  SimPacket out = pkt;
  out.wrapped_tcp.reset();
  out.proto = Proto::Tcp;
  out.seq = inner.seq;
  out.ack = inner.ack;
  out.tcp_flags = inner.flags;
  out.src = session.orig_dst;
  out.dst = session.orig_src;
  return out;
}

HandshakeStep classify_handshake(std::uint8_t tcp_flags) {
  const auto f = tcp_flags & (tcp_flag::kSyn | tcp_flag::kAck);
  if (f == tcp_flag::kSyn) return HandshakeStep::Syn;
  if (f == (tcp_flag::kSyn | tcp_flag::kAck)) return HandshakeStep::SynAck;
  if (f == tcp_flag::kAck) return HandshakeStep::Ack;
  return HandshakeStep::Invalid;
}

std::optional<std::uint8_t> handshake_reply(HandshakeStep step) {
  switch (step) {
    case HandshakeStep::Syn: return tcp_flag::kSyn | tcp_flag::kAck;
    case HandshakeStep::SynAck: return tcp_flag::kAck;
    default: return std::nullopt;
  }
}

}  // namespace mpip
