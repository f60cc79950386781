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

#include "mpip/engine.hpp"

#include <algorithm>

#include "mpip/handshake.hpp"

namespace mpip {

namespace {

bool is_syn(const SimPacket& p) {
  return p.proto == Proto::Tcp &&
         (p.tcp_flags & (tcp_flag::kSyn | tcp_flag::kAck)) == tcp_flag::kSyn;
}

}  // namespace

MpipEngine::MpipEngine(NodeId id, const EngineParams& params, std::vector<RoutingRule> rules,
                       std::int64_t clock_offset_ms, Rng rng, EngineHost& host)
    : id_(id),
      params_(params),
      clock_offset_ms_(clock_offset_ms),
      rng_(std::move(rng)),
      host_(host),
      dedup_(params.dedup_window) {
  for (const auto& r : rules) tables_.add_rule(r);
}

std::uint32_t MpipEngine::local_ms() const {
  const std::int64_t t = host_.now() / kUsPerMs + clock_offset_ms_;
  return static_cast<std::uint32_t>(t);
}

// ---------------------------------------------------------------------------
// Outgoing

void MpipEngine::send(SimPacket pkt) {
  if (is_syn(pkt)) syn_sent_.insert({pkt.src, pkt.dst});

  const auto before = tables_.availability_lookup(pkt.dst);
  const auto fc = on_outgoing_first_contact(tables_, pkt.dst, host_.now(), params_.handshake);
  if (before == Availability::Unknown &&
      tables_.availability_lookup(pkt.dst) == Availability::False) {
    host_.log_event("mpip_unavailable",
                    "dst=" + format_endpoint(pkt.dst) +
                        " queries=" + std::to_string(tables_.find_availability(pkt.dst)->query_count));
  }

  switch (fc) {
    case FirstContact::SendPlain:
      last_to_[pkt.dst] = pkt;
      emit(std::move(pkt), std::nullopt);
      return;
    case FirstContact::SendPlainPlusQuery:
      last_to_[pkt.dst] = pkt;
      emit(pkt, std::nullopt);
      send_query(pkt);
      return;
    case FirstContact::SendMpip:
      break;
  }

  SessionRecord* s = find_or_create_outgoing(pkt);
  if (!s) {
    emit(std::move(pkt), std::nullopt);
    return;
  }
  auto& st = state(*s);
  s->update_time = host_.now();
  st.last_sent = host_.now();
  if (pkt.payload_len > 0) st.last_data = pkt;
  if (pkt.proto == Proto::Tcp) st.tcp_seq = pkt.seq;
  last_to_[pkt.dst] = pkt;
  send_on_session(*s, std::move(pkt));
}

SessionRecord* MpipEngine::find_or_create_outgoing(const SimPacket& pkt) {
  const auto peer = tables_.node_for(pkt.dst);
  if (!peer) return nullptr;
  if (auto* s = tables_.find_session_by_tuple(*peer, pkt.src, pkt.dst, pkt.proto)) return s;

  SessionRecord rec;
  rec.dest_node_id = *peer;
  rec.session_id = tables_.allocate_session_id(id_, *peer);
  if (rec.session_id == 0) return nullptr;
  rec.orig_src = pkt.src;
  rec.orig_dst = pkt.dst;
  rec.protocol = pkt.proto;
  rec.update_time = host_.now();
  auto& s = tables_.insert_session(rec);
  auto& st = state(s);
  st.tcp_client = syn_sent_.contains({pkt.src, pkt.dst});
  st.last_sent = host_.now();
  host_.log_event("session_add", describe(s));
  if (auto* p = tables_.add_path(s.dest_node_id, s.session_id, pkt.src, pkt.dst))
    host_.log_event("path_add", describe(*p));
  return &s;
}

MpipEngine::SessionState& MpipEngine::state(const SessionRecord& s) {
  auto it = states_.find(s.key());
  if (it == states_.end()) {
    it = states_.emplace(s.key(), SessionState{}).first;
    it->second.planner = ProbePlanner(params_.probe_interval);
  }
  return it->second;
}

bool MpipEngine::is_default_path(const SessionRecord& s, const PathRecord& p) const {
  return p.src == s.orig_src && p.dst == s.orig_dst;
}

void MpipEngine::send_on_session(SessionRecord& s, SimPacket pkt) {
  auto& st = state(s);
  const auto paths = std::as_const(tables_).session_paths(s.dest_node_id, s.session_id);
  if (paths.empty()) {
    // No usable path: the original route, as plain IP.
    emit(std::move(pkt), std::nullopt);
    return;
  }

  const PacketMeta meta{s.orig_dst, s.protocol, pkt.payload_len};
  const RoutingRule* rule = tables_.match_rule(meta, host_.now());
  Dispatch d = route_packet(rule, paths, rng_);
  if (st.pending_ip_change) d.path_ids.resize(1);

  bool first = true;
  for (const auto pid : d.path_ids) {
    const PathRecord* p = tables_.find_path(pid);
    SimPacket out = pkt;
    if (!first) out.uid = host_.next_uid();
    first = false;
    out.src = p->src;
    out.dst = p->dst;

    std::uint8_t flags = d.kind == Dispatch::Kind::Protected ? cm_flag::kProtected : 0;
    if (st.pending_ip_change) {
      flags |= cm_flag::kIpChange;
      st.pending_ip_change = false;
      ++stats_.ip_change_notifications;
      for (auto removed : tables_.reset_session_paths(s.dest_node_id, s.session_id, pid))
        host_.log_event("path_remove", describe(s) + " path=" + std::to_string(removed));
      host_.log_event("ip_change_notify", describe(*p));
    }
    const auto cm = make_cm(s, pid, flags);
    if (params_.nat_mode == NatTraversal::UdpWrapper && s.protocol == Proto::Tcp &&
        !is_default_path(s, *p))
      out = udp_wrap(out, *p);
    emit(std::move(out), cm);
  }
}

ControlMessage MpipEngine::make_cm(const SessionRecord& s, std::uint8_t path_id,
                                   std::uint8_t flags) {
  ControlMessage cm;
  cm.flags = flags;
  cm.source_node_id = id_;
  cm.session_id = s.session_id;
  cm.path_id = path_id;
  const auto report = state(s).feedback.next_report();
  cm.feedback_path_id = report.path_id;
  cm.path_delay = report.delay_ms;
  cm.packet_timestamp = local_ms();
  auto addrs = host_.local_addrs();
  std::sort(addrs.begin(), addrs.end());
  if (!addrs.empty()) {
    cm.addr_count = static_cast<std::uint8_t>(std::min<std::size_t>(addrs.size(), 255));
    cm.addr_slot = addrs[advert_cursor_++ % cm.addr_count];
  }
  return cm;
}

void MpipEngine::emit(SimPacket pkt, const std::optional<ControlMessage>& cm) {
  if (cm) {
    if (!cm->has(cm_flag::kEnable) && !cm->has(cm_flag::kEnabled) &&
        tables_.availability_lookup(pkt.dst) == Availability::False)
      ++stats_.cm_to_unavailable;
    pkt.cm = encode_cm(*cm);
    ++stats_.cm_sent;
  } else {
    pkt.cm.reset();
    ++stats_.plain_sent;
  }
  host_.transmit(std::move(pkt));
}

void MpipEngine::send_query(const SimPacket& pkt) {
  SimPacket dup = pkt;
  dup.uid = host_.next_uid();
  ControlMessage cm;
  cm.flags = cm_flag::kEnable;
  cm.source_node_id = id_;
  cm.packet_timestamp = local_ms();
  auto addrs = host_.local_addrs();
  std::sort(addrs.begin(), addrs.end());
  if (!addrs.empty()) {
    cm.addr_count = static_cast<std::uint8_t>(std::min<std::size_t>(addrs.size(), 255));
    cm.addr_slot = addrs[advert_cursor_++ % cm.addr_count];
  }
  ++stats_.queries_sent;
  host_.log_event("query", "dst=" + format_endpoint(pkt.dst) + " count=" +
                               std::to_string(tables_.find_availability(pkt.dst)->query_count));
  emit(std::move(dup), cm);
}

void MpipEngine::send_confirmation(const SimPacket& query, const ControlMessage& reply) {
  SimPacket r;
  if (auto it = last_to_.find(query.src); it != last_to_.end()) {
    r = it->second;
  } else {
    r.proto = query.proto;
    r.tcp_flags = query.proto == Proto::Tcp ? tcp_flag::kAck : 0;
  }
  r.uid = host_.next_uid();
  r.src = query.dst;
  r.dst = query.src;
  r.created_at = host_.now();
  ControlMessage cm = reply;
  cm.packet_timestamp = local_ms();
  ++stats_.confirmations_sent;
  emit(std::move(r), cm);
}

// ---------------------------------------------------------------------------
// Incoming

void MpipEngine::receive(SimPacket pkt) {
  if (!pkt.cm) {
    if (pkt.proto == Proto::Tcp) {
      const std::pair key{pkt.dst, pkt.src};
      if (is_syn(pkt)) {
        syn_next_[key] = pkt.seq + 1;
      } else if (pkt.payload_len > 0) {
        if (auto peer = tables_.node_for(pkt.src)) {
          if (auto* s = tables_.find_session_by_tuple(*peer, pkt.dst, pkt.src, Proto::Tcp)) {
            deliver_data(*s, state(*s), std::move(pkt));
            return;
          }
        }
        if (auto it = syn_next_.find(key); it != syn_next_.end() && it->second == pkt.seq)
          it->second += pkt.payload_len;
      }
    }
    host_.deliver(std::move(pkt));
    return;
  }

  ControlMessage cm;
  try {
    cm = decode_cm(*pkt.cm);
  } catch (const CmError&) {
    ++stats_.corrupt_cm;
    pkt.cm.reset();
    host_.deliver(std::move(pkt));
    return;
  }

  learn_peer_addr(tables_, cm, pkt.src);
  if (cm.has(cm_flag::kEnable)) {
    const auto reply = on_receive_query(tables_, cm, pkt.src, id_);
    send_confirmation(pkt, reply);
    return;
  }
  if (cm.has(cm_flag::kEnabled)) {
    const bool known = tables_.availability_lookup(pkt.src) == Availability::True;
    on_receive_confirmation(tables_, cm, pkt.src);
    if (!known) host_.log_event("handshake_confirmed", "peer=" + format_endpoint(pkt.src));
    return;
  }
  if (cm.session_id == 0) return;

  const bool control = cm.has(cm_flag::kHeartbeat) || cm.has(cm_flag::kHandshake);
  const NodeId peer = cm.source_node_id;
  SessionRecord* s = tables_.find_session_by_peer_id(peer, cm.session_id);
  if (!s) {
    const Proto proto = pkt.wrapped_tcp ? Proto::Tcp : pkt.proto;
    s = tables_.find_session_by_tuple(peer, pkt.dst, pkt.src, proto);
    if (s) {
      s->peer_aliases.push_back(cm.session_id);
    } else {
      // Control traffic never resurrects a session.
      if (control) return;
      SessionRecord rec;
      rec.dest_node_id = peer;
      rec.session_id = cm.session_id;
      rec.orig_src = pkt.dst;
      rec.orig_dst = pkt.src;
      rec.protocol = proto;
      rec.update_time = host_.now();
      s = &tables_.insert_session(rec);
      auto& st = state(*s);
      st.tcp_client = syn_sent_.contains({s->orig_src, s->orig_dst});
      st.last_sent = host_.now();
      host_.log_event("session_add", describe(*s));
    }
  }
  auto& st = state(*s);

  // Packets sent before the peer's last address change may carry a source
  // that no longer exists.
  const bool stale = st.ip_change_stamp && !cm.has(cm_flag::kIpChange) &&
                     static_cast<std::int32_t>(cm.packet_timestamp - *st.ip_change_stamp) <= 0;
  PathRecord* arrival = tables_.find_path(peer, s->session_id, pkt.dst, pkt.src);
  if (!arrival && !stale) {
    arrival = tables_.add_path(peer, s->session_id, pkt.dst, pkt.src);
    if (arrival) {
      host_.log_event("path_add", describe(*arrival));
      st.planner.erase(pkt.dst.addr, pkt.src);
    }
  }

  if (cm.has(cm_flag::kIpChange) && arrival) {
    for (auto removed : tables_.reset_session_paths(peer, s->session_id, arrival->path_id))
      host_.log_event("path_remove", describe(*s) + " path=" + std::to_string(removed));
    st.feedback.clear();
    st.ip_change_stamp = cm.packet_timestamp;
    ++stats_.path_resets;
    host_.log_event("session_reset_paths",
                    describe(*arrival) + " paths=" +
                        std::to_string(tables_.session_paths(peer, s->session_id).size()));
  }

  if (cm.path_id != 0)
    st.feedback.on_sample(cm.path_id, one_way_delay_ms(cm.packet_timestamp, local_ms()));

  if (cm.feedback_path_id != 0) {
    PathRecord* fp = tables_.find_path(cm.feedback_path_id);
    if (fp && fp->dest_node_id == peer && fp->session_id == s->session_id)
      update_delay_metrics(*fp, cm.path_delay);
    else
      ++stats_.unknown_feedback;
  }

  if (cm.has(cm_flag::kHandshake)) {
    handle_handshake(*s, pkt, arrival ? arrival->path_id : 0);
    return;
  }
  if (cm.has(cm_flag::kHeartbeat)) return;

  SimPacket out;
  if (pkt.wrapped_tcp) {
    auto u = udp_unwrap(pkt, *s);
    if (!u) {
      ++stats_.unwrap_failures;
      return;
    }
    out = std::move(*u);
  } else {
    out = std::move(pkt);
    out.src = s->orig_dst;
    out.dst = s->orig_src;
  }
  out.cm.reset();
  out.via_path = cm.path_id;
  s->update_time = host_.now();

  if (cm.has(cm_flag::kProtected) &&
      !dedup_.accept(s->key(), cm.packet_timestamp, out.digest, host_.now())) {
    ++stats_.dedup_discards;
    host_.log_event("dedupe", describe(*s) + " path=" + std::to_string(cm.path_id));
    return;
  }
  if (is_syn(out)) syn_next_[{out.dst, out.src}] = out.seq + 1;
  deliver_data(*s, st, std::move(out));
}

void MpipEngine::deliver_data(SessionRecord& s, SessionState& st, SimPacket pkt) {
  if (pkt.proto != Proto::Tcp || pkt.payload_len == 0 || params_.reorder_capacity == 0) {
    host_.deliver(std::move(pkt));
    return;
  }
  if (!st.reorder) {
    st.reorder.emplace(params_.reorder_capacity);
    if (auto it = syn_next_.find({s.orig_src, s.orig_dst}); it != syn_next_.end())
      st.reorder->expect(it->second);
  }
  bool flushed = false;
  auto segs = st.reorder->on_segment(std::move(pkt), &flushed);
  if (flushed) {
    ++stats_.reorder_flushes;
    host_.log_event("reorder_flush", describe(s) + " segments=" + std::to_string(segs.size()));
  }
  if (auto e = st.reorder->expected_seq(); e && !seq_lt(*e, s.next_seq)) s.next_seq = *e;
  for (auto& seg : segs) host_.deliver(std::move(seg));
}

void MpipEngine::handle_handshake(SessionRecord& s, const SimPacket& pkt, std::uint8_t path_id) {
  const auto step = classify_handshake(pkt.tcp_flags);
  if (step == HandshakeStep::SynAck)
    host_.log_event("fake_handshake", describe(s) + " local=" + format_endpoint(pkt.dst) +
                                          " remote=" + format_endpoint(pkt.src));
  const auto reply = handshake_reply(step);
  if (!reply) return;
  auto& st = state(s);
  SimPacket r;
  r.uid = host_.next_uid();
  r.src = pkt.dst;
  r.dst = pkt.src;
  r.proto = Proto::Tcp;
  r.tcp_flags = *reply;
  r.seq = st.tcp_seq;
  r.created_at = host_.now();
  ++stats_.handshakes_sent;
  emit(std::move(r), make_cm(s, path_id, cm_flag::kHandshake));
}

// ---------------------------------------------------------------------------
// Timers

void MpipEngine::tick() {
  for (auto& [key, s] : tables_.sessions()) {
    auto& st = state(s);
    auto paths = tables_.session_paths(s.dest_node_id, s.session_id);
    if (!paths.empty()) adjust_weights(paths, params_.weights);
    heartbeat(s, st);
    probe(s, st);
  }
}

void MpipEngine::heartbeat(SessionRecord& s, SessionState& st) {
  const SimTime now = host_.now();
  if (!heartbeat_due(s.protocol, st.last_sent, now, params_.heartbeat)) return;
  st.last_sent = now;
  for (const auto* p : std::as_const(tables_).session_paths(s.dest_node_id, s.session_id)) {
    SimPacket hb;
    hb.uid = host_.next_uid();
    hb.src = p->src;
    hb.dst = p->dst;
    hb.proto = s.protocol;
    hb.created_at = now;
    ++stats_.heartbeats_sent;
    emit(std::move(hb), make_cm(s, p->path_id, cm_flag::kHeartbeat));
  }
}

std::vector<Endpoint> MpipEngine::probe_remotes(const SessionRecord& s) const {
  std::set<Endpoint> out{s.orig_dst};
  for (const auto* p : tables_.session_paths(s.dest_node_id, s.session_id)) out.insert(p->dst);
  for (auto a : tables_.advertised_addrs(s.dest_node_id)) out.insert({a, s.orig_dst.port});
  return {out.begin(), out.end()};
}

void MpipEngine::probe(SessionRecord& s, SessionState& st) {
  const bool fake_hs = params_.nat_mode == NatTraversal::FakeHandshake && s.protocol == Proto::Tcp;
  // With fake handshakes only the side that opened the connection probes.
  if (fake_hs && !st.tcp_client) return;

  std::vector<std::pair<Addr, Endpoint>> existing;
  for (const auto* p : std::as_const(tables_).session_paths(s.dest_node_id, s.session_id))
    existing.emplace_back(p->src.addr, p->dst);
  st.planner.update(host_.local_addrs(), probe_remotes(s), existing);

  const SimTime now = host_.now();
  for (const auto& c : st.planner.due(now)) {
    SimPacket p;
    if (st.last_data && !fake_hs) {
      p = *st.last_data;
    } else {
      p.proto = s.protocol;
      p.tcp_flags = s.protocol == Proto::Tcp ? tcp_flag::kAck : 0;
    }
    p.uid = host_.next_uid();
    p.src = {c.local, s.orig_src.port};
    p.dst = c.remote;
    p.created_at = now;
    std::uint8_t flags = cm_flag::kHeartbeat;
    if (fake_hs) {
      p.tcp_flags = tcp_flag::kSyn;
      p.payload_len = 0;
      p.seq = st.tcp_seq;
      flags = cm_flag::kHandshake;
      ++stats_.handshakes_sent;
    } else {
      ++stats_.probes_sent;
    }
    const auto cm = make_cm(s, 0, flags);
    if (params_.nat_mode == NatTraversal::UdpWrapper && s.protocol == Proto::Tcp &&
        !(p.src == s.orig_src && p.dst == s.orig_dst)) {
      PathRecord via;
      via.src = p.src;
      via.dst = p.dst;
      p = udp_wrap(p, via);
    }
    emit(std::move(p), cm);
  }

  for (const auto& c : st.planner.exhausted()) {
    if (!st.reported_exhausted.insert({c.local, c.remote}).second) continue;
    host_.log_event(fake_hs ? "nat_blocked" : "probe_exhausted",
                    describe(s) + " local=" + format_addr(c.local) +
                        " remote=" + format_endpoint(c.remote));
  }
}

void MpipEngine::expire() {
  for (const auto& key : tables_.expire_sessions(host_.now(), params_.session_ttl)) {
    host_.log_event("session_expire",
                    "peer=" + format_node_id(key.first) + " session=" + std::to_string(key.second));
    states_.erase(key);
  }
}

// ---------------------------------------------------------------------------
// Interface changes

void MpipEngine::remove_paths_from(Addr addr) {
  std::vector<std::uint8_t> doomed;
  for (const auto& [id, p] : tables_.paths())
    if (p.src.addr == addr) doomed.push_back(id);
  for (auto id : doomed) {
    const PathRecord* p = tables_.find_path(id);
    const SessionKey key{p->dest_node_id, p->session_id};
    host_.log_event("path_remove", describe(*p));
    tables_.remove_path(id);
    tables_.reset_weights(key.first, key.second);
    if (auto* s = tables_.find_session(key.first, key.second)) state(*s).pending_ip_change = true;
  }
}

void MpipEngine::iface_down(Addr addr) {
  host_.log_event("iface_down", "addr=" + format_addr(addr));
  remove_paths_from(addr);
}

void MpipEngine::iface_up(Addr addr) {
  host_.log_event("iface_up", "addr=" + format_addr(addr));
  for (auto& [key, st] : states_) {
    st.planner.reset_attempts();
    st.reported_exhausted.clear();
  }
}

void MpipEngine::addr_changed(Addr old_addr, Addr new_addr) {
  host_.log_event("addr_change", "old=" + format_addr(old_addr) + " new=" + format_addr(new_addr));
  remove_paths_from(old_addr);
  for (auto& [key, st] : states_) {
    st.planner.reset_attempts();
    st.reported_exhausted.clear();
  }
}

// ---------------------------------------------------------------------------
// Queries

const SessionRecord* MpipEngine::session_for(const Endpoint& local, const Endpoint& remote,
                                             Proto proto) const {
  const auto peer = tables_.node_for(remote);
  if (!peer) return nullptr;
  for (const auto& [key, s] : tables_.sessions())
    if (key.first == *peer && s.orig_src == local && s.orig_dst == remote && s.protocol == proto)
      return &s;
  return nullptr;
}

std::vector<const PathRecord*> MpipEngine::paths_of(const SessionRecord& s) const {
  return tables_.session_paths(s.dest_node_id, s.session_id);
}

std::string MpipEngine::describe(const SessionRecord& s) const {
  return "peer=" + format_node_id(s.dest_node_id) + " session=" + std::to_string(s.session_id);
}

std::string MpipEngine::describe(const PathRecord& p) const {
  return "peer=" + format_node_id(p.dest_node_id) + " session=" + std::to_string(p.session_id) +
         " path=" + std::to_string(p.path_id) + " src=" + format_endpoint(p.src) +
         " dst=" + format_endpoint(p.dst);
}

}  // namespace mpip
