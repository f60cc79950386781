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

// Port-translating NAT sitting in front of one interface.
// UDP mappings are endpoint-independent. TCP flows are tracked per 5-tuple;
// with drop_unknown_tcp only a SYN may open one.

#ifndef MPIP_NAT_HPP
#define MPIP_NAT_HPP

#include <map>
#include <optional>
#include <set>

#include "mpip/packet.hpp"

namespace mpip {

class NatBox {
 public:
  static constexpr Port kFirstPort = 20000;

  NatBox(Addr inner, Addr outer, bool drop_unknown_tcp = false, bool verify_udp = false)
      : inner_(inner), outer_(outer), drop_unknown_tcp_(drop_unknown_tcp), verify_udp_(verify_udp) {}

  Addr inner() const { return inner_; }
  Addr outer() const { return outer_; }
  void set_inner(Addr a) { inner_ = a; }

  /// Source translation. nullopt means the NAT dropped the packet.
  std::optional<SimPacket> outbound(SimPacket pkt);
  /// Destination translation. nullopt means the NAT dropped the packet.
  std::optional<SimPacket> inbound(SimPacket pkt);

  std::size_t udp_mappings() const { return udp_.size(); }
  std::size_t tcp_flows() const { return tcp_.size(); }

 private:
  struct UdpMap {
    Port outer_port = 0;
    std::set<Endpoint> contacted;
  };
  struct TcpFlow {
    Endpoint inner;
    Endpoint remote;
  };

  Port allocate();

  Addr inner_;
  Addr outer_;
  bool drop_unknown_tcp_;
  bool verify_udp_;
  Port next_port_ = kFirstPort;
  std::map<Endpoint, UdpMap> udp_;
  std::map<Port, Endpoint> udp_rev_;
  std::map<std::pair<Endpoint, Endpoint>, Port> tcp_;
  std::map<Port, TcpFlow> tcp_rev_;
};

}  // namespace mpip

#endif  // MPIP_NAT_HPP
