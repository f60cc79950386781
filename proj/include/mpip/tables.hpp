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

// Per-node MPIP state: availability, node-address mapping, sessions, paths
// and user routing rules. Owned by a single node; not thread-safe.

#ifndef MPIP_TABLES_HPP
#define MPIP_TABLES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mpip/types.hpp"

namespace mpip {

constexpr int kWeightMax = 1000;
constexpr int kWeightMin = 1;
constexpr std::uint32_t kDefaultQueryThreshold = 10;
constexpr SimTime kDefaultSessionTtl = 60 * kUsPerSec;

enum class Availability { Unknown, True, False };

const char* to_string(Availability a);

struct AvailabilityEntry {
  Endpoint dest;
  Availability available = Availability::Unknown;
  std::uint32_t query_count = 0;
  SimTime last_query = 0;
};

struct NodeAddrEntry {
  NodeId node_id;
  Endpoint ep;

  friend auto operator<=>(const NodeAddrEntry&, const NodeAddrEntry&) = default;
};

using SessionKey = std::pair<NodeId, std::uint16_t>;

struct SessionRecord {
  NodeId dest_node_id;
  std::uint16_t session_id = 0;
  /// Transport-layer 4-tuple from this node's point of view. Never rewritten.
  Endpoint orig_src;
  Endpoint orig_dst;
  Proto protocol = Proto::Tcp;
  std::uint32_t next_seq = 0;
  SimTime update_time = 0;
  /// Session IDs the peer allocated for the same flow before it learned ours.
  std::vector<std::uint16_t> peer_aliases;

  SessionKey key() const { return {dest_node_id, session_id}; }
};

struct PathRecord {
  NodeId dest_node_id;
  std::uint16_t session_id = 0;
  std::uint8_t path_id = 0;
  Endpoint src;
  Endpoint dst;
  double d_min = 0;
  double d_rt = 0;
  double q = 0;
  double q_max = 0;
  bool has_sample = false;
  int weight = kWeightMax;
};

enum class RoutePriority { Tf, Rf, Pf };

const char* to_string(RoutePriority p);

struct RoutingRule {
  std::optional<Addr> dst_addr;
  std::optional<Port> dst_port;
  std::optional<Proto> protocol;
  std::uint32_t start_size = 0;
  /// Exclusive upper bound on payload length; nullopt is unbounded.
  std::optional<std::uint32_t> end_size;
  RoutePriority priority = RoutePriority::Tf;
  /// Restricts the rule to paths leaving this local address.
  std::optional<Addr> via;
  /// Rule is ignored before this time.
  SimTime active_from = 0;

  bool matches(const Endpoint& dst, Proto proto, std::uint32_t payload_len) const;
};

struct PacketMeta {
  Endpoint dst;
  Proto protocol = Proto::Tcp;
  std::uint32_t payload_len = 0;
};

class NodeTables {
 public:
  // Availability (MPIP support of remote sockets).
  Availability availability_lookup(const Endpoint& dest) const;
  AvailabilityEntry& availability_entry(const Endpoint& dest);
  const AvailabilityEntry* find_availability(const Endpoint& dest) const;
  /// Unknown -> True. No effect on a settled entry.
  void record_confirmation(const Endpoint& dest);
  /// Unknown -> False. No effect on a settled entry.
  void mark_unavailable(const Endpoint& dest);
  const std::map<Endpoint, AvailabilityEntry>& availability() const { return availability_; }

  // Node ID <-> (addr, port).
  /// Returns true when the triple was not known before.
  bool learn_node_addr(NodeId node, const Endpoint& ep);
  std::optional<NodeId> node_for(const Endpoint& ep) const;
  std::vector<Endpoint> endpoints_of(NodeId node) const;
  const std::set<NodeAddrEntry>& node_addrs() const { return node_addrs_; }

  /// Accumulates one advertised local address of `node`. A change in
  /// `addr_count` restarts accumulation.
  void learn_advertised(NodeId node, std::uint8_t addr_count, Addr addr);
  std::vector<Addr> advertised_addrs(NodeId node) const;

  // Sessions.
  SessionRecord* find_session(NodeId node, std::uint16_t session_id);
  const SessionRecord* find_session(NodeId node, std::uint16_t session_id) const;
  /// Looks up by the peer's session ID, following aliases.
  SessionRecord* find_session_by_peer_id(NodeId node, std::uint16_t peer_session_id);
  SessionRecord* find_session_by_tuple(NodeId node, const Endpoint& local, const Endpoint& remote,
                                       Proto proto);
  /// Allocates a fresh session ID for `node`. IDs are split by node-ID order so
  /// that two peers never allocate the same ID for different flows.
  std::uint16_t allocate_session_id(NodeId self, NodeId peer) const;
  SessionRecord& insert_session(const SessionRecord& rec);
  std::map<SessionKey, SessionRecord>& sessions() { return sessions_; }
  const std::map<SessionKey, SessionRecord>& sessions() const { return sessions_; }
  /// Removes sessions idle for longer than `ttl` along with their paths.
  std::vector<SessionKey> expire_sessions(SimTime now, SimTime ttl);

  // Paths.
  /// Returns nullptr when all 255 IDs are in use.
  PathRecord* add_path(NodeId node, std::uint16_t session_id, const Endpoint& src,
                       const Endpoint& dst);
  PathRecord* find_path(std::uint8_t path_id);
  const PathRecord* find_path(std::uint8_t path_id) const;
  PathRecord* find_path(NodeId node, std::uint16_t session_id, const Endpoint& src,
                        const Endpoint& dst);
  std::vector<PathRecord*> session_paths(NodeId node, std::uint16_t session_id);
  std::vector<const PathRecord*> session_paths(NodeId node, std::uint16_t session_id) const;
  void remove_path(std::uint8_t path_id);
  /// Removes every path of the session except `keep` (0 keeps none).
  std::vector<std::uint8_t> reset_session_paths(NodeId node, std::uint16_t session_id,
                                                std::uint8_t keep);
  /// Sets every path of the session to 1000/N.
  void reset_weights(NodeId node, std::uint16_t session_id);
  const std::map<std::uint8_t, PathRecord>& paths() const { return paths_; }
  static int clamp_weight(int w);

  // User-defined routing.
  void add_rule(const RoutingRule& r) { rules_.push_back(r); }
  const std::vector<RoutingRule>& rules() const { return rules_; }
  /// First matching active rule in table order.
  const RoutingRule* match_rule(const PacketMeta& meta, SimTime now = kForever) const;

 private:
  struct Advertised {
    std::uint8_t count = 0;
    std::set<Addr> addrs;
  };

  std::map<Endpoint, AvailabilityEntry> availability_;
  std::set<NodeAddrEntry> node_addrs_;
  std::map<NodeId, Advertised> advertised_;
  std::map<SessionKey, SessionRecord> sessions_;
  std::map<std::uint8_t, PathRecord> paths_;
  std::uint8_t next_path_id_ = 1;
  std::vector<RoutingRule> rules_;
};

}  // namespace mpip

#endif  // MPIP_TABLES_HPP
