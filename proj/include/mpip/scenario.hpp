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

// Scenario files.
//
// Line-oriented, one declaration per line, '#' starts a comment:
//
//   node <name> [plain] [clock_offset_ms=<n>]
//   iface <node> <addr>
//   link <iface> <iface> <bw_mbps> <delay_ms> <loss> <queue_pkts> [mtu=<bytes>]
//   nat <iface> <outer_addr> [drop_unknown_tcp] [verify_udp]
//   session <name> <src_iface> <dst_iface> <tcp|udp> <traffic-spec>
//   rule <addr|*> <port|*> <proto|*> <min_len> <max_len|*> <Tf|Rf|Pf> [via <addr>] [from <ms>]
//   param <key> <value>
//   fail_link <iface> <iface> <at_ms>
//   restore_link <iface> <iface> <at_ms>
//   ip_change <iface> <new_addr> <at_ms>
//   duration <ms>
//   seed <u64>
//
// Interfaces are referred to by address. Traffic specs:
//
//   bulk [window=<pkts>] [bytes=<n>] [start=<ms>] [stop=<ms>] [sport=<p>] [dport=<p>]
//   cbr rate_kbps=<r> size=<bytes> [echo] [start=<ms>] [stop=<ms>] [sport=<p>] [dport=<p>]

#ifndef MPIP_SCENARIO_HPP
#define MPIP_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mpip/params.hpp"
#include "mpip/tables.hpp"

namespace mpip {

struct NodeSpec {
  std::string name;
  bool mpip = true;
  std::int64_t clock_offset_ms = 0;
  int line = 0;
};

struct IfaceSpec {
  std::string node;
  Addr addr = 0;
  int line = 0;
};

struct LinkSpec {
  Addr a = 0;
  Addr b = 0;
  double bw_mbps = 0;
  double delay_ms = 0;
  double loss = 0;
  std::uint32_t queue_pkts = 0;
  std::uint32_t mtu = 1500;
  int line = 0;
};

struct NatSpec {
  Addr iface = 0;
  Addr outer = 0;
  bool drop_unknown_tcp = false;
  bool verify_udp = false;
  int line = 0;
};

enum class TrafficKind { Bulk, Cbr };

struct TrafficSpec {
  TrafficKind kind = TrafficKind::Bulk;
  std::uint32_t window = 64;
  std::uint64_t bytes = 0;  // 0 is unlimited
  double rate_kbps = 0;
  std::uint32_t size = 0;
  bool echo = false;
  SimTime start = 0;
  SimTime stop = kForever;
  std::optional<Port> sport;
  std::optional<Port> dport;
};

struct SessionSpec {
  std::string name;
  Addr src = 0;
  Addr dst = 0;
  Proto proto = Proto::Tcp;
  TrafficSpec traffic;
  Port sport = 0;
  Port dport = 0;
  int line = 0;
};

struct TimedAction {
  enum class Kind { FailLink, RestoreLink, IpChange };
  Kind kind = Kind::FailLink;
  SimTime at = 0;
  Addr a = 0;
  /// Second link end, or the new address for IpChange.
  Addr b = 0;
  int line = 0;
};

struct Scenario {
  std::vector<NodeSpec> nodes;
  std::vector<IfaceSpec> ifaces;
  std::vector<LinkSpec> links;
  std::vector<NatSpec> nats;
  std::vector<SessionSpec> sessions;
  std::vector<RoutingRule> rules;
  std::vector<TimedAction> actions;
  EngineParams params;
  SimTime duration = 0;
  std::uint64_t seed = 1;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Parses and validates. Throws ScenarioError with the offending line.
Scenario parse_scenario(std::string_view text);

}  // namespace mpip

#endif  // MPIP_SCENARIO_HPP
