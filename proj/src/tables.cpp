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

#include "mpip/tables.hpp"

#include <algorithm>

namespace mpip {

const char* to_string(Availability a) {
  switch (a) {
    case Availability::Unknown: return "unknown";
    case Availability::True: return "true";
    case Availability::False: return "false";
  }
  return "?";
}

const char* to_string(RoutePriority p) {
  switch (p) {
    case RoutePriority::Tf: return "Tf";
    case RoutePriority::Rf: return "Rf";
    case RoutePriority::Pf: return "Pf";
  }
  return "?";
}

bool RoutingRule::matches(const Endpoint& dst, Proto proto, std::uint32_t payload_len) const {
  if (dst_addr && *dst_addr != dst.addr) return false;
  if (dst_port && *dst_port != dst.port) return false;
  if (protocol && *protocol != proto) return false;
  if (payload_len < start_size) return false;
  if (end_size && payload_len >= *end_size) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Availability

Availability NodeTables::availability_lookup(const Endpoint& dest) const {
  auto it = availability_.find(dest);
  return it == availability_.end() ? Availability::Unknown : it->second.available;
}

AvailabilityEntry& NodeTables::availability_entry(const Endpoint& dest) {
  auto [it, inserted] = availability_.try_emplace(dest);
  if (inserted) it->second.dest = dest;
  return it->second;
}

const AvailabilityEntry* NodeTables::find_availability(const Endpoint& dest) const {
  auto it = availability_.find(dest);
  return it == availability_.end() ? nullptr : &it->second;
}

void NodeTables::record_confirmation(const Endpoint& dest) {
  auto& e = availability_entry(dest);
  if (e.available == Availability::Unknown) e.available = Availability::True;
}

void NodeTables::mark_unavailable(const Endpoint& dest) {
  auto& e = availability_entry(dest);
  if (e.available == Availability::Unknown) e.available = Availability::False;
}

// ---------------------------------------------------------------------------
// Node addresses

bool NodeTables::learn_node_addr(NodeId node, const Endpoint& ep) {
  return node_addrs_.insert({node, ep}).second;
}

std::optional<NodeId> NodeTables::node_for(const Endpoint& ep) const {
  for (const auto& e : node_addrs_)
    if (e.ep == ep) return e.node_id;
  return std::nullopt;
}

std::vector<Endpoint> NodeTables::endpoints_of(NodeId node) const {
  std::vector<Endpoint> out;
  for (auto it = node_addrs_.lower_bound({node, Endpoint{}});
       it != node_addrs_.end() && it->node_id == node; ++it)
    out.push_back(it->ep);
  return out;
}

void NodeTables::learn_advertised(NodeId node, std::uint8_t addr_count, Addr addr) {
  if (addr_count == 0) return;
  auto& adv = advertised_[node];
  if (adv.count != addr_count) {
    adv.count = addr_count;
    adv.addrs.clear();
  }
  if (adv.addrs.size() < addr_count) adv.addrs.insert(addr);
}

std::vector<Addr> NodeTables::advertised_addrs(NodeId node) const {
  auto it = advertised_.find(node);
  if (it == advertised_.end()) return {};
  return {it->second.addrs.begin(), it->second.addrs.end()};
}

// ---------------------------------------------------------------------------
// Sessions

SessionRecord* NodeTables::find_session(NodeId node, std::uint16_t session_id) {
  auto it = sessions_.find({node, session_id});
  return it == sessions_.end() ? nullptr : &it->second;
}

const SessionRecord* NodeTables::find_session(NodeId node, std::uint16_t session_id) const {
  auto it = sessions_.find({node, session_id});
  return it == sessions_.end() ? nullptr : &it->second;
}

SessionRecord* NodeTables::find_session_by_peer_id(NodeId node, std::uint16_t peer_session_id) {
  if (auto* s = find_session(node, peer_session_id)) return s;
  for (auto& [key, s] : sessions_) {
    if (key.first != node) continue;
    if (std::find(s.peer_aliases.begin(), s.peer_aliases.end(), peer_session_id) !=
        s.peer_aliases.end())
      return &s;
  }
  return nullptr;
}

SessionRecord* NodeTables::find_session_by_tuple(NodeId node, const Endpoint& local,
                                                 const Endpoint& remote, Proto proto) {
  for (auto& [key, s] : sessions_) {
    if (key.first == node && s.orig_src == local && s.orig_dst == remote && s.protocol == proto)
      return &s;
  }
  return nullptr;
}

std::uint16_t NodeTables::allocate_session_id(NodeId self, NodeId peer) const {
  // Lower node ID takes odd IDs, higher takes even ones.
  std::uint32_t id = self < peer ? 1 : 2;
  for (; id <= 0xFFFF; id += 2) {
    const auto sid = static_cast<std::uint16_t>(id);
    bool used = sessions_.contains({peer, sid});
    if (!used) {
      for (const auto& [key, s] : sessions_) {
        if (key.first == peer && std::find(s.peer_aliases.begin(), s.peer_aliases.end(), sid) !=
                                     s.peer_aliases.end()) {
          used = true;
          break;
        }
      }
    }
    if (!used) return sid;
  }
  return 0;
}

SessionRecord& NodeTables::insert_session(const SessionRecord& rec) {
  auto [it, inserted] = sessions_.try_emplace(rec.key(), rec);
  return it->second;
}

std::vector<SessionKey> NodeTables::expire_sessions(SimTime now, SimTime ttl) {
  std::vector<SessionKey> removed;
  if (ttl == kForever) return removed;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.update_time > ttl) {
      removed.push_back(it->first);
      reset_session_paths(it->first.first, it->first.second, 0);
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

// ---------------------------------------------------------------------------
// Paths

PathRecord* NodeTables::add_path(NodeId node, std::uint16_t session_id, const Endpoint& src,
                                 const Endpoint& dst) {
  if (paths_.size() >= 255) return nullptr;
  while (next_path_id_ == 0 || paths_.contains(next_path_id_)) ++next_path_id_;
  const std::uint8_t id = next_path_id_++;
  PathRecord p;
  p.dest_node_id = node;
  p.session_id = session_id;
  p.path_id = id;
  p.src = src;
  p.dst = dst;
  auto [it, _] = paths_.emplace(id, p);
  reset_weights(node, session_id);
  return &it->second;
}

PathRecord* NodeTables::find_path(std::uint8_t path_id) {
  auto it = paths_.find(path_id);
  return it == paths_.end() ? nullptr : &it->second;
}

const PathRecord* NodeTables::find_path(std::uint8_t path_id) const {
  auto it = paths_.find(path_id);
  return it == paths_.end() ? nullptr : &it->second;
}

PathRecord* NodeTables::find_path(NodeId node, std::uint16_t session_id, const Endpoint& src,
                                  const Endpoint& dst) {
  for (auto& [id, p] : paths_) {
    if (p.dest_node_id == node && p.session_id == session_id && p.src == src && p.dst == dst)
      return &p;
  }
  return nullptr;
}

std::vector<PathRecord*> NodeTables::session_paths(NodeId node, std::uint16_t session_id) {
  std::vector<PathRecord*> out;
  for (auto& [id, p] : paths_)
    if (p.dest_node_id == node && p.session_id == session_id) out.push_back(&p);
  return out;
}

std::vector<const PathRecord*> NodeTables::session_paths(NodeId node,
                                                         std::uint16_t session_id) const {
  std::vector<const PathRecord*> out;
  for (const auto& [id, p] : paths_)
    if (p.dest_node_id == node && p.session_id == session_id) out.push_back(&p);
  return out;
}

void NodeTables::remove_path(std::uint8_t path_id) {
  auto it = paths_.find(path_id);
  if (it == paths_.end()) return;
  const auto node = it->second.dest_node_id;
  const auto sid = it->second.session_id;
  paths_.erase(it);
  reset_weights(node, sid);
}

std::vector<std::uint8_t> NodeTables::reset_session_paths(NodeId node, std::uint16_t session_id,
                                                          std::uint8_t keep) {
  std::vector<std::uint8_t> removed;
  for (auto it = paths_.begin(); it != paths_.end();) {
    const auto& p = it->second;
    if (p.dest_node_id == node && p.session_id == session_id && p.path_id != keep) {
      removed.push_back(p.path_id);
      it = paths_.erase(it);
    } else {
      ++it;
    }
  }
  reset_weights(node, session_id);
  return removed;
}

void NodeTables::reset_weights(NodeId node, std::uint16_t session_id) {
  auto ps = session_paths(node, session_id);
  if (ps.empty()) return;
  const int w = clamp_weight(kWeightMax / static_cast<int>(ps.size()));
  for (auto* p : ps) p->weight = w;
}

int NodeTables::clamp_weight(int w) {
  return std::clamp(w, kWeightMin, kWeightMax);
}

// ---------------------------------------------------------------------------
// Rules

const RoutingRule* NodeTables::match_rule(const PacketMeta& meta, SimTime now) const {
  for (const auto& r : rules_) {
    if (r.active_from > now) continue;
    if (r.matches(meta.dst, meta.protocol, meta.payload_len)) return &r;
  }
  return nullptr;
}

}  // namespace mpip
