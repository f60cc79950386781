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

#include "mpip/nat.hpp"

namespace mpip {

Port NatBox::allocate() {
  while (udp_rev_.contains(next_port_) || tcp_rev_.contains(next_port_)) ++next_port_;
  return next_port_++;
}

std::optional<SimPacket> NatBox::outbound(SimPacket pkt) {
  if (pkt.src.addr != inner_) return pkt;

  if (pkt.proto == Proto::Udp) {
    auto it = udp_.find(pkt.src);
    if (it == udp_.end()) {
      const Port p = allocate();
      it = udp_.emplace(pkt.src, UdpMap{p, {}}).first;
      udp_rev_[p] = pkt.src;
    }
    it->second.contacted.insert(pkt.dst);
    pkt.src = {outer_, it->second.outer_port};
    return pkt;
  }

  const std::pair key{pkt.src, pkt.dst};
  auto it = tcp_.find(key);
  if (it == tcp_.end()) {
    const bool syn = (pkt.tcp_flags & (tcp_flag::kSyn | tcp_flag::kAck)) == tcp_flag::kSyn;
    if (drop_unknown_tcp_ && !syn) return std::nullopt;
    const Port p = allocate();
    it = tcp_.emplace(key, p).first;
    tcp_rev_[p] = {pkt.src, pkt.dst};
  }
  pkt.src = {outer_, it->second};
  return pkt;
}

std::optional<SimPacket> NatBox::inbound(SimPacket pkt) {
  if (pkt.dst.addr != outer_) return std::nullopt;

  if (pkt.proto == Proto::Udp) {
    auto rit = udp_rev_.find(pkt.dst.port);
    if (rit == udp_rev_.end()) return std::nullopt;
    if (verify_udp_ && !udp_.at(rit->second).contacted.contains(pkt.src)) return std::nullopt;
    pkt.dst = rit->second;
    return pkt;
  }

  auto rit = tcp_rev_.find(pkt.dst.port);
  if (rit == tcp_rev_.end() || rit->second.remote != pkt.src) return std::nullopt;
  pkt.dst = rit->second.inner;
  return pkt;
}

}  // namespace mpip
