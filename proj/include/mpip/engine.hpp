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

// The MPIP layer of one node. Sits between the transport and the
// interfaces, owns the node's tables and runs entirely on the caller's
// thread: packets, timer ticks and interface changes are fed in by the host.

#ifndef MPIP_ENGINE_HPP
#define MPIP_ENGINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mpip/cm.hpp"
#include "mpip/params.hpp"
#include "mpip/rng.hpp"
#include "mpip/tables.hpp"

namespace mpip {

class EngineHost {
 public:
  virtual ~EngineHost() = default;
  virtual SimTime now() const = 0;
  /// Sends out of the interface owning pkt.src.addr.
  virtual void transmit(SimPacket pkt) = 0;
  /// Hands a packet to the transport layer.
  virtual void deliver(SimPacket pkt) = 0;
  virtual void log_event(std::string_view name, const std::string& detail) = 0;
  /// Addresses of the interfaces that are currently up.
  virtual std::vector<Addr> local_addrs() const = 0;
  virtual std::uint64_t next_uid() = 0;
};

struct EngineStats {
  std::uint64_t plain_sent = 0;
  std::uint64_t cm_sent = 0;
  std::uint64_t queries_sent = 0;
  std::uint64_t confirmations_sent = 0;
  std::uint64_t probes_sent = 0;
  std::uint64_t heartbeats_sent = 0;
  std::uint64_t handshakes_sent = 0;
  std::uint64_t ip_change_notifications = 0;
  std::uint64_t path_resets = 0;
  std::uint64_t dedup_discards = 0;
  std::uint64_t reorder_flushes = 0;
  std::uint64_t unknown_feedback = 0;
  std::uint64_t corrupt_cm = 0;
  std::uint64_t unwrap_failures = 0;
  /// CM-bearing packets sent towards a destination marked unavailable.
  std::uint64_t cm_to_unavailable = 0;
};

class MpipEngine {
 public:
  MpipEngine(NodeId id, const EngineParams& params, std::vector<RoutingRule> rules,
             std::int64_t clock_offset_ms, Rng rng, EngineHost& host);

  NodeId id() const { return id_; }

  /// Outgoing packet from the transport, addressed with its original 4-tuple.
  void send(SimPacket pkt);
  /// Incoming packet from an interface, after any NAT translation.
  void receive(SimPacket pkt);

  /// Weight adjustment, path probing and heartbeats. Call every params.weights.interval.
  void tick();
  /// Session expiry.
  void expire();

  void iface_down(Addr addr);
  void iface_up(Addr addr);
  void addr_changed(Addr old_addr, Addr new_addr);

  NodeTables& tables() { return tables_; }
  const NodeTables& tables() const { return tables_; }
  const EngineStats& stats() const { return stats_; }
  const EngineParams& params() const { return params_; }

  /// Session carrying the flow local -> remote, if any.
  const SessionRecord* session_for(const Endpoint& local, const Endpoint& remote, Proto proto) const;
  std::vector<const PathRecord*> paths_of(const SessionRecord& s) const;

  /// Local 32-bit millisecond clock used for CM timestamps.
  std::uint32_t local_ms() const;

 private:
  struct SessionState {
    DelayFeedback feedback;
    ProbePlanner planner{ms(100)};
    std::optional<ReorderBuffer> reorder;
    std::optional<SimPacket> last_data;
    SimTime last_sent = 0;
    bool pending_ip_change = false;
    /// Sender timestamp of the last address-change notice from the peer.
    std::optional<std::uint32_t> ip_change_stamp;
    bool tcp_client = false;
    std::uint32_t tcp_seq = 0;
    std::set<std::pair<Addr, Endpoint>> reported_exhausted;
  };

  using Tuple = std::tuple<Endpoint, Endpoint, Proto>;

  SessionRecord* find_or_create_outgoing(const SimPacket& pkt);
  SessionState& state(const SessionRecord& s);
  void send_on_session(SessionRecord& s, SimPacket pkt);
  ControlMessage make_cm(const SessionRecord& s, std::uint8_t path_id, std::uint8_t flags);
  void emit(SimPacket pkt, const std::optional<ControlMessage>& cm);
  void send_query(const SimPacket& pkt);
  void send_confirmation(const SimPacket& query, const ControlMessage& reply);
  void handle_handshake(SessionRecord& s, const SimPacket& pkt, std::uint8_t path_id);
  void deliver_data(SessionRecord& s, SessionState& st, SimPacket pkt);
  void probe(SessionRecord& s, SessionState& st);
  void heartbeat(SessionRecord& s, SessionState& st);
  std::vector<Endpoint> probe_remotes(const SessionRecord& s) const;
  bool is_default_path(const SessionRecord& s, const PathRecord& p) const;
  void remove_paths_from(Addr addr);
  std::string describe(const SessionRecord& s) const;
  std::string describe(const PathRecord& p) const;

  NodeId id_;
  EngineParams params_;
  std::int64_t clock_offset_ms_;
  Rng rng_;
  EngineHost& host_;
  NodeTables tables_;
  ProtectedDedup dedup_;
  EngineStats stats_;
  std::map<SessionKey, SessionState> states_;
  /// Last packet sent to each destination, reused to carry confirmations.
  std::map<Endpoint, SimPacket> last_to_;
  /// Next expected sequence after an observed SYN, keyed by (local, remote).
  std::map<std::pair<Endpoint, Endpoint>, std::uint32_t> syn_next_;
  std::set<std::pair<Endpoint, Endpoint>> syn_sent_;
  std::uint32_t advert_cursor_ = 0;
};

}  // namespace mpip

#endif  // MPIP_ENGINE_HPP
