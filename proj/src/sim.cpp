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

#include "mpip/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>

#include "mpip/nat.hpp"

namespace mpip {

void EventQueue::schedule(SimTime at, std::function<void()> fn) {
  heap_.push_back({std::max(at, now_), next_id_++, std::move(fn)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

std::uint64_t EventQueue::run_until(SimTime end) {
  std::uint64_t n = 0;
  while (!heap_.empty() && heap_.front().at <= end) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.at;
    ev.fn();
    ++n;
  }
  if (end != kForever) now_ = std::max(now_, end);
  return n;
}

std::uint64_t NetCounters::dropped_total() const {
  std::uint64_t n = 0;
  for (const auto& [reason, count] : dropped) n += count;
  return n;
}

NodeId scenario_node_id(std::size_t index) {
  // Locally administered MAC range.
  return NodeId(0x0200'0000'0000ull + index + 1);
}

namespace {

struct Channel {
  double bps = 0;
  SimTime prop = 0;
  double loss = 0;
  std::uint32_t cap = 0;
  std::uint32_t mtu = kDefaultMtu;
  SimTime busy_until = 0;
  std::deque<SimTime> departures;
  Rng rng;
};

struct Link {
  int end[2] = {0, 0};
  bool up = true;
  std::uint64_t epoch = 0;
  Channel dir[2];
};

struct Iface {
  Addr addr = 0;
  int node = 0;
  bool up = true;
  std::optional<NatBox> nat;
  std::vector<int> links;

  Addr visible() const { return nat ? nat->outer() : addr; }
};

class World;

class Node : public EngineHost, public AppHost {
 public:
  Node(World& w, int index, const NodeSpec& spec) : w_(w), index_(index), spec_(spec) {}

  void attach_engine(const Scenario& sc, std::uint64_t seed);
  MpipEngine* engine() { return engine_.get(); }
  const NodeSpec& spec() const { return spec_; }
  std::vector<int>& ifaces() { return ifaces_; }

  void bind(Proto proto, Port port, App* app) { apps_[{proto, port}] = app; }
  bool bound(Proto proto, Port port) const { return apps_.contains({proto, port}); }
  void receive(SimPacket pkt);

  // EngineHost + AppHost
  SimTime now() const override;
  void transmit(SimPacket pkt) override;
  void deliver(SimPacket pkt) override;
  void log_event(std::string_view name, const std::string& detail) override;
  std::vector<Addr> local_addrs() const override;
  std::uint64_t next_uid() override;
  void send(SimPacket pkt) override;
  void schedule(SimTime at, std::function<void()> fn) override;

  NodeResult result() const;

 private:
  World& w_;
  int index_;
  NodeSpec spec_;
  std::unique_ptr<MpipEngine> engine_;
  std::vector<int> ifaces_;
  std::map<std::pair<Proto, Port>, App*> apps_;
  std::uint64_t cm_queries_ = 0;
  std::uint64_t cm_data_ = 0;
  std::uint64_t plain_ = 0;
};

class World {
 public:
  World(const Scenario& sc, std::uint64_t seed);
  RunResult run();

  EventQueue q;
  std::vector<Iface> ifaces;
  std::vector<Link> links;
  std::vector<std::unique_ptr<Node>> nodes;
  NetCounters counters;
  std::vector<EventRow> events;
  std::uint64_t next_uid = 1;

  void transmit(int node, SimPacket pkt);
  void log(std::string_view name, std::string detail) {
    events.push_back({q.now(), std::string(name), std::move(detail)});
  }

 private:
  void drop(const char* reason) { ++counters.dropped[reason]; }
  void nat_drop(const Iface& f, const SimPacket& pkt, const char* dir);
  void arrive(int link, int dir, std::uint64_t epoch, bool lost, SimPacket pkt);
  void fail_link(int link);
  void restore_link(int link);
  void change_addr(int iface, Addr new_addr);
  int iface_index(Addr a) const;
  int link_between(Addr a, Addr b) const;
  void set_iface_up(int iface, bool up);
  void sample_metrics(SimTime t);

  const Scenario& sc_;
  std::uint64_t seed_;
  std::vector<FlowResult> flows_;
  std::vector<std::unique_ptr<App>> apps_;
  struct FlowBinding {
    int sender_node = 0;
    Endpoint local;
    Endpoint remote;
    Proto proto = Proto::Tcp;
    TcpSender* tcp_sender = nullptr;
    TcpReceiver* tcp_receiver = nullptr;
    CbrSource* cbr_source = nullptr;
    CbrSink* cbr_sink = nullptr;
  };
  std::vector<FlowBinding> bindings_;
  std::vector<MetricsRow> metrics_;
};

// ---------------------------------------------------------------------------
// Node

void Node::attach_engine(const Scenario& sc, std::uint64_t seed) {
  if (!spec_.mpip) return;
  engine_ = std::make_unique<MpipEngine>(scenario_node_id(index_), sc.params, sc.rules,
                                         spec_.clock_offset_ms,
                                         Rng::split(seed, "route", index_), *this);
}

SimTime Node::now() const { return w_.q.now(); }

void Node::transmit(SimPacket pkt) { w_.transmit(index_, std::move(pkt)); }

void Node::send(SimPacket pkt) {
  if (engine_)
    engine_->send(std::move(pkt));
  else
    w_.transmit(index_, std::move(pkt));
}

void Node::receive(SimPacket pkt) {
  if (engine_) {
    engine_->receive(std::move(pkt));
    return;
  }
  if (pkt.cm) {
    // A stack without MPIP does not understand the trailer; the packet is
    // discarded before reaching the transport.
    bool query = false;
    try {
      query = decode_cm(*pkt.cm).has(cm_flag::kEnable);
    } catch (const CmError&) {
    }
    if (query)
      ++cm_queries_;
    else
      ++cm_data_;
    return;
  }
  ++plain_;
  deliver(std::move(pkt));
}

void Node::deliver(SimPacket pkt) {
  auto it = apps_.find({pkt.proto, pkt.dst.port});
  if (it != apps_.end()) it->second->on_packet(pkt);
}

void Node::log_event(std::string_view name, const std::string& detail) {
  w_.log(name, "node=" + spec_.name + " " + detail);
}

std::vector<Addr> Node::local_addrs() const {
  std::vector<Addr> out;
  for (int i : ifaces_)
    if (w_.ifaces[i].up) out.push_back(w_.ifaces[i].addr);
  return out;
}

std::uint64_t Node::next_uid() { return w_.next_uid++; }

void Node::schedule(SimTime at, std::function<void()> fn) { w_.q.schedule(at, std::move(fn)); }

NodeResult Node::result() const {
  NodeResult r;
  r.name = spec_.name;
  r.mpip = spec_.mpip;
  if (engine_) {
    r.stats = engine_->stats();
    for (const auto& [ep, e] : engine_->tables().availability()) r.availability.push_back(e);
  }
  r.cm_queries_received = cm_queries_;
  r.cm_data_received = cm_data_;
  r.plain_received = plain_;
  return r;
}

// ---------------------------------------------------------------------------
// World

int World::iface_index(Addr a) const {
  for (std::size_t i = 0; i < ifaces.size(); ++i)
    if (ifaces[i].addr == a) return static_cast<int>(i);
  return -1;
}

int World::link_between(Addr a, Addr b) const {
  const int ia = iface_index(a);
  const int ib = iface_index(b);
  for (std::size_t l = 0; l < links.size(); ++l) {
    const auto& k = links[l];
    if ((k.end[0] == ia && k.end[1] == ib) || (k.end[0] == ib && k.end[1] == ia))
      return static_cast<int>(l);
  }
  return -1;
}

World::World(const Scenario& sc, std::uint64_t seed) : sc_(sc), seed_(seed) {
  std::map<std::string, int> node_index;
  for (std::size_t i = 0; i < sc.nodes.size(); ++i) {
    node_index[sc.nodes[i].name] = static_cast<int>(i);
    nodes.push_back(std::make_unique<Node>(*this, static_cast<int>(i), sc.nodes[i]));
  }
  for (const auto& f : sc.ifaces) {
    Iface iface;
    iface.addr = f.addr;
    iface.node = node_index.at(f.node);
    nodes[iface.node]->ifaces().push_back(static_cast<int>(ifaces.size()));
    ifaces.push_back(std::move(iface));
  }
  for (const auto& n : sc.nats) {
    auto& f = ifaces[iface_index(n.iface)];
    f.nat.emplace(f.addr, n.outer, n.drop_unknown_tcp, n.verify_udp);
  }
  std::uint32_t min_mtu = kDefaultMtu;
  for (const auto& ls : sc.links) {
    Link l;
    l.end[0] = iface_index(ls.a);
    l.end[1] = iface_index(ls.b);
    const int li = static_cast<int>(links.size());
    for (int d = 0; d < 2; ++d) {
      auto& c = l.dir[d];
      c.bps = ls.bw_mbps * 1e6;
      c.prop = static_cast<SimTime>(std::llround(ls.delay_ms * kUsPerMs));
      c.loss = ls.loss;
      c.cap = ls.queue_pkts;
      c.mtu = ls.mtu;
      c.rng = Rng::split(seed, "link", 2 * static_cast<std::uint64_t>(li) + d);
    }
    ifaces[l.end[0]].links.push_back(li);
    ifaces[l.end[1]].links.push_back(li);
    links.push_back(std::move(l));
    min_mtu = std::min(min_mtu, ls.mtu);
  }
  for (auto& n : nodes) n->attach_engine(sc, seed);

  flows_.reserve(sc.sessions.size());
  for (std::size_t i = 0; i < sc.sessions.size(); ++i) {
    const auto& s = sc.sessions[i];
    const int flow = static_cast<int>(i);
    Node& src = *nodes[ifaces[iface_index(s.src)].node];
    Node& dst = *nodes[ifaces[iface_index(s.dst)].node];
    flows_.push_back(FlowResult{});
    auto& fr = flows_.back();
    fr.name = s.name;
    fr.proto = s.proto;

    FlowBinding b;
    b.sender_node = ifaces[iface_index(s.src)].node;
    b.local = {s.src, s.sport};
    b.remote = {s.dst, s.dport};
    b.proto = s.proto;
    if (src.bound(s.proto, s.sport) || dst.bound(s.proto, s.dport))
      throw ScenarioError(s.line, "port already bound on this node");

    if (s.proto == Proto::Tcp) {
      TcpConfig cfg;
      cfg.local = b.local;
      cfg.remote = b.remote;
      cfg.window = s.traffic.window;
      std::uint32_t overhead = kIpHeader + kTcpHeader;
      if (src.spec().mpip) {
        overhead += kCmSize;
        if (sc.params.nat_mode == NatTraversal::UdpWrapper) overhead += kUdpHeader;
      }
      cfg.mss = min_mtu - overhead;
      cfg.bytes = s.traffic.bytes;
      cfg.start = s.traffic.start;
      cfg.stop = s.traffic.stop;
      cfg.iss = 1000u * (static_cast<std::uint32_t>(i) + 1);
      cfg.flow = flow;
      auto sender = std::make_unique<TcpSender>(src, fr.recorder, cfg);
      auto receiver = std::make_unique<TcpReceiver>(dst, fr.recorder, b.remote, flow);
      b.tcp_sender = sender.get();
      b.tcp_receiver = receiver.get();
      src.bind(Proto::Tcp, s.sport, sender.get());
      dst.bind(Proto::Tcp, s.dport, receiver.get());
      apps_.push_back(std::move(sender));
      apps_.push_back(std::move(receiver));
    } else {
      CbrConfig cfg;
      cfg.local = b.local;
      cfg.remote = b.remote;
      cfg.rate_kbps = s.traffic.rate_kbps;
      cfg.size = s.traffic.size;
      cfg.start = s.traffic.start;
      cfg.stop = s.traffic.stop;
      cfg.flow = flow;
      auto source = std::make_unique<CbrSource>(src, cfg);
      auto sink = std::make_unique<CbrSink>(dst, fr.recorder, b.remote, s.traffic.echo, flow);
      b.cbr_source = source.get();
      b.cbr_sink = sink.get();
      src.bind(Proto::Udp, s.sport, source.get());
      dst.bind(Proto::Udp, s.dport, sink.get());
      apps_.push_back(std::move(source));
      apps_.push_back(std::move(sink));
    }
    bindings_.push_back(b);
  }
}

void World::nat_drop(const Iface& f, const SimPacket& pkt, const char* dir) {
  drop("nat_drop");
  log("nat_drop", std::string("dir=") + dir + " nat=" + format_addr(f.visible()) +
                      " proto=" + to_string(pkt.proto) + " src=" + format_endpoint(pkt.src) +
                      " dst=" + format_endpoint(pkt.dst));
}

void World::transmit(int node, SimPacket pkt) {
  ++counters.injected;
  int fi = -1;
  for (int i : nodes[node]->ifaces())
    if (ifaces[i].addr == pkt.src.addr) fi = i;
  if (fi < 0) return drop("no_route");
  Iface& f = ifaces[fi];
  if (!f.up) return drop("iface_down");
  if (f.nat) {
    auto translated = f.nat->outbound(pkt);
    if (!translated) return nat_drop(f, pkt, "out");
    pkt = std::move(*translated);
  }

  int li = -1;
  bool any_down = false;
  for (int l : f.links) {
    const auto& k = links[l];
    const int far = k.end[0] == fi ? k.end[1] : k.end[0];
    if (ifaces[far].visible() != pkt.dst.addr) continue;
    if (!k.up) {
      any_down = true;
      continue;
    }
    li = l;
    break;
  }
  if (li < 0) return drop(any_down ? "link_down" : "no_route");

  Link& link = links[li];
  const int dir = link.end[0] == fi ? 0 : 1;
  Channel& ch = link.dir[dir];
  if (pkt.wire_size() > ch.mtu) return drop("mtu");

  const SimTime now = q.now();
  while (!ch.departures.empty() && ch.departures.front() <= now) ch.departures.pop_front();
  if (ch.departures.size() >= ch.cap) return drop("queue_full");
  const double bits = pkt.wire_size() * 8.0;
  const auto ser = static_cast<SimTime>(std::ceil(bits / ch.bps * 1e6));
  const SimTime finish = std::max(now, ch.busy_until) + ser;
  ch.busy_until = finish;
  ch.departures.push_back(finish);
  const bool lost = ch.rng.bernoulli(ch.loss);
  ++counters.in_flight;
  const auto epoch = link.epoch;
  q.schedule(finish + ch.prop, [this, li, dir, epoch, lost, p = std::move(pkt)]() mutable {
    arrive(li, dir, epoch, lost, std::move(p));
  });
}

void World::arrive(int li, int dir, std::uint64_t epoch, bool lost, SimPacket pkt) {
  --counters.in_flight;
  const Link& link = links[li];
  if (link.epoch != epoch) return drop("link_down");
  if (lost) return drop("loss");
  Iface& f = ifaces[link.end[1 - dir]];
  if (!f.up) return drop("iface_down");
  if (f.nat) {
    auto translated = f.nat->inbound(pkt);
    if (!translated) return nat_drop(f, pkt, "in");
    pkt = std::move(*translated);
  } else if (pkt.dst.addr != f.addr) {
    return drop("no_route");
  }
  ++counters.delivered;
  nodes[f.node]->receive(std::move(pkt));
}

void World::set_iface_up(int i, bool up) {
  Iface& f = ifaces[i];
  if (f.up == up) return;
  f.up = up;
  if (auto* e = nodes[f.node]->engine()) {
    if (up)
      e->iface_up(f.addr);
    else
      e->iface_down(f.addr);
  }
}

void World::fail_link(int li) {
  Link& l = links[li];
  if (!l.up) return;
  l.up = false;
  ++l.epoch;
  for (auto& c : l.dir) {
    c.departures.clear();
    c.busy_until = q.now();
  }
  log("link_fail", "a=" + format_addr(ifaces[l.end[0]].addr) + " b=" + format_addr(ifaces[l.end[1]].addr));
  for (int e : l.end) {
    const bool carrier = std::any_of(ifaces[e].links.begin(), ifaces[e].links.end(),
                                     [&](int k) { return links[k].up; });
    if (!carrier) set_iface_up(e, false);
  }
}

void World::restore_link(int li) {
  Link& l = links[li];
  if (l.up) return;
  l.up = true;
  log("link_restore",
      "a=" + format_addr(ifaces[l.end[0]].addr) + " b=" + format_addr(ifaces[l.end[1]].addr));
  for (int e : l.end) set_iface_up(e, true);
}

void World::change_addr(int i, Addr new_addr) {
  Iface& f = ifaces[i];
  const Addr old = f.addr;
  f.addr = new_addr;
  if (f.nat) f.nat->set_inner(new_addr);
  log("ip_change", "old=" + format_addr(old) + " new=" + format_addr(new_addr));
  if (auto* e = nodes[f.node]->engine()) e->addr_changed(old, new_addr);
}

void World::sample_metrics(SimTime t) {
  const SimTime width = ms(100);
  const auto bucket = static_cast<std::size_t>(t / width) - 1;
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    const auto& b = bindings_[i];
    const auto fb = flows_[i].recorder.bucket(bucket);

    struct PathView {
      int weight = 0;
      double q = 0;
      double d_rt = 0;
    };
    std::map<int, PathView> rows;
    if (auto* e = nodes[b.sender_node]->engine()) {
      if (const auto* s = e->session_for(b.local, b.remote, b.proto)) {
        for (const auto* p : e->paths_of(*s)) rows[p->path_id] = {p->weight, p->q, p->d_rt};
      }
    }
    for (const auto& [pid, n] : fb.bytes_by_path) rows.try_emplace(pid);
    for (const auto& [pid, v] : rows) {
      MetricsRow r;
      r.time = t;
      r.session = flows_[i].name;
      r.path_id = pid;
      auto it = fb.bytes_by_path.find(static_cast<std::uint8_t>(pid));
      const std::uint64_t bytes = it == fb.bytes_by_path.end() ? 0 : it->second;
      r.goodput_bps = bytes * 8 * kUsPerSec / width;
      r.weight = v.weight;
      r.q_ms = v.q;
      r.d_rt_ms = v.d_rt;
      metrics_.push_back(std::move(r));
    }
  }
}

RunResult World::run() {
  const SimTime end = sc_.duration;

  for (SimTime t = ms(100); t <= end; t += ms(100))
    q.schedule(t, [this, t] { sample_metrics(t); });

  for (auto& n : nodes) {
    auto* e = n->engine();
    if (!e) continue;
    const SimTime period = e->params().weights.interval;
    for (SimTime t = period; t <= end; t += period) q.schedule(t, [e] { e->tick(); });
    for (SimTime t = kUsPerSec; t <= end; t += kUsPerSec) q.schedule(t, [e] { e->expire(); });
  }

  for (const auto& a : sc_.actions) {
    switch (a.kind) {
      case TimedAction::Kind::FailLink: {
        const int li = link_between(a.a, a.b);
        q.schedule(a.at, [this, li] { fail_link(li); });
        break;
      }
      case TimedAction::Kind::RestoreLink: {
        const int li = link_between(a.a, a.b);
        q.schedule(a.at, [this, li] { restore_link(li); });
        break;
      }
      case TimedAction::Kind::IpChange: {
        const int fi = iface_index(a.a);
        const Addr to = a.b;
        q.schedule(a.at, [this, fi, to] { change_addr(fi, to); });
        break;
      }
    }
  }

  for (auto& app : apps_) app->start();

  RunResult r;
  r.events_executed = q.run_until(end);
  r.duration = end;
  r.seed = seed_;
  r.metrics = std::move(metrics_);
  r.events = std::move(events);
  r.counters = counters;
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    auto& f = flows_[i];
    const auto& b = bindings_[i];
    if (b.tcp_sender) {
      f.established = b.tcp_sender->established();
      f.delivered_bytes = b.tcp_receiver->delivered_bytes();
      f.out_of_order = b.tcp_receiver->out_of_order();
      f.gap_retransmits = b.tcp_sender->gap_retransmits();
      f.timeout_retransmits = b.tcp_sender->timeout_retransmits();
    } else {
      f.established = true;
      f.packets_sent = b.cbr_source->sent();
      f.out_of_order = b.cbr_sink->out_of_order();
      for (const auto& bk : f.recorder.buckets()) f.delivered_bytes += bk.bytes;
    }
  }
  r.flows = std::move(flows_);
  for (const auto& n : nodes) r.nodes.push_back(n->result());
  return r;
}

}  // namespace

RunResult run_scenario(const Scenario& sc, std::optional<std::uint64_t> seed) {
  World w(sc, seed.value_or(sc.seed));
  return w.run();
}

}  // namespace mpip
