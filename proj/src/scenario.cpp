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

#include "mpip/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

namespace mpip {

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineParser {
 public:
  LineParser(int line, std::vector<std::string_view> toks) : line_(line), toks_(std::move(toks)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioError(line_, msg); }

  std::size_t size() const { return toks_.size(); }
  std::string_view at(std::size_t i) const { return toks_.at(i); }

  void arity(std::size_t min, std::size_t max) const {
    const auto n = toks_.size() - 1;
    if (n < min || n > max) {
      fail("'" + std::string(toks_[0]) + "' expects " +
           (min == max ? std::to_string(min) : std::to_string(min) + "-" + std::to_string(max)) +
           " arguments, got " + std::to_string(n));
    }
  }

  Addr addr(std::string_view s, const char* what) const {
    auto a = parse_addr(s);
    if (!a) fail(std::string("bad ") + what + " address '" + std::string(s) + "'");
    return *a;
  }

  template <typename T>
  T integer(std::string_view s, const char* what, T lo, T hi) const {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      fail(std::string("bad ") + what + " '" + std::string(s) + "'");
    if (v < lo || v > hi) fail(std::string(what) + " out of range: " + std::string(s));
    return v;
  }

  double real(std::string_view s, const char* what, double lo, double hi) const {
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v))
      fail(std::string("bad ") + what + " '" + tmp + "'");
    if (v < lo || v > hi) fail(std::string(what) + " out of range: " + tmp);
    return v;
  }

  int line() const { return line_; }

 private:
  int line_;
  std::vector<std::string_view> toks_;
};

std::pair<std::string_view, std::string_view> split_kv(std::string_view tok) {
  auto eq = tok.find('=');
  if (eq == std::string_view::npos) return {tok, {}};
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

SimTime ms_to_time(double v) {
  return static_cast<SimTime>(std::llround(v * kUsPerMs));
}

TrafficSpec parse_traffic(const LineParser& lp, std::size_t first, Proto proto) {
  TrafficSpec t;
  const auto kind = lp.at(first);
  if (kind == "bulk") {
    if (proto != Proto::Tcp) lp.fail("bulk traffic needs a tcp session");
    t.kind = TrafficKind::Bulk;
  } else if (kind == "cbr") {
    if (proto != Proto::Udp) lp.fail("cbr traffic needs a udp session");
    t.kind = TrafficKind::Cbr;
  } else {
    lp.fail("unknown traffic kind '" + std::string(kind) + "'");
  }
  bool have_rate = false;
  bool have_size = false;
  for (std::size_t i = first + 1; i < lp.size(); ++i) {
    auto [k, v] = split_kv(lp.at(i));
    if (k == "echo" && v.empty() && t.kind == TrafficKind::Cbr) {
      t.echo = true;
      continue;
    }
    if (v.empty()) lp.fail("traffic option '" + std::string(k) + "' needs a value");
    if (k == "window" && t.kind == TrafficKind::Bulk) {
      t.window = lp.integer<std::uint32_t>(v, "window", 1, 65535);
    } else if (k == "bytes" && t.kind == TrafficKind::Bulk) {
      t.bytes = lp.integer<std::uint64_t>(v, "bytes", 1, UINT64_MAX);
    } else if (k == "rate_kbps" && t.kind == TrafficKind::Cbr) {
      t.rate_kbps = lp.real(v, "rate_kbps", 1e-3, 1e7);
      have_rate = true;
    } else if (k == "size" && t.kind == TrafficKind::Cbr) {
      t.size = lp.integer<std::uint32_t>(v, "size", 1, 1500 - kIpHeader - kUdpHeader - kCmSize);
      have_size = true;
    } else if (k == "start") {
      t.start = ms_to_time(lp.real(v, "start", 0, 1e12));
    } else if (k == "stop") {
      t.stop = ms_to_time(lp.real(v, "stop", 0, 1e12));
    } else if (k == "sport") {
      t.sport = lp.integer<Port>(v, "sport", 1, 65535);
    } else if (k == "dport") {
      t.dport = lp.integer<Port>(v, "dport", 1, 65535);
    } else {
      lp.fail("unknown traffic option '" + std::string(k) + "'");
    }
  }
  if (t.kind == TrafficKind::Cbr && (!have_rate || !have_size))
    lp.fail("cbr traffic needs rate_kbps= and size=");
  if (t.stop <= t.start) lp.fail("traffic stop must be after start");
  return t;
}

bool parse_bool(std::string_view v, bool* out) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") {
    *out = true;
    return true;
  }
  if (v == "off" || v == "false" || v == "0" || v == "no") {
    *out = false;
    return true;
  }
  return false;
}

void apply_param(const LineParser& lp, EngineParams& p) {
  const auto key = lp.at(1);
  const auto v = lp.at(2);
  if (key == "S") {
    p.weights.step = lp.integer<int>(v, "S", 1, kWeightMax);
  } else if (key == "T") {
    p.weights.interval = ms_to_time(lp.real(v, "T", 1, 1e6));
  } else if (key == "heartbeat_ms") {
    p.heartbeat = ms_to_time(lp.real(v, "heartbeat_ms", 1, 1e7));
  } else if (key == "reorder_buffer") {
    bool on = false;
    if (parse_bool(v, &on))
      p.reorder_capacity = on ? kReorderCapacity : 0;
    else
      p.reorder_capacity = lp.integer<std::size_t>(v, "reorder_buffer", 0, 1'000'000);
  } else if (key == "nat_mode") {
    auto m = parse_nat_traversal(v);
    if (!m) lp.fail("nat_mode must be none, fake_handshake or udp_wrapper");
    p.nat_mode = *m;
  } else if (key == "query_threshold") {
    p.handshake.query_threshold = lp.integer<std::uint32_t>(v, "query_threshold", 1, 1000);
  } else if (key == "query_interval_ms") {
    p.handshake.query_interval = ms_to_time(lp.real(v, "query_interval_ms", 0, 1e7));
  } else if (key == "session_ttl_ms") {
    if (v == "inf")
      p.session_ttl = kForever;
    else
      p.session_ttl = ms_to_time(lp.real(v, "session_ttl_ms", 1, 1e12));
  } else if (key == "probe_interval_ms") {
    p.probe_interval = ms_to_time(lp.real(v, "probe_interval_ms", 1, 1e7));
  } else if (key == "dedup_window_ms") {
    p.dedup_window = ms_to_time(lp.real(v, "dedup_window_ms", 1, 1e7));
  } else {
    lp.fail("unknown param '" + std::string(key) + "'");
  }
}

RoutingRule parse_rule(const LineParser& lp) {
  RoutingRule r;
  if (lp.at(1) != "*") r.dst_addr = lp.addr(lp.at(1), "rule destination");
  if (lp.at(2) != "*") r.dst_port = lp.integer<Port>(lp.at(2), "rule port", 0, 65535);
  const auto proto = lp.at(3);
  if (proto == "tcp" || proto == "TCP") {
    r.protocol = Proto::Tcp;
  } else if (proto == "udp" || proto == "UDP") {
    r.protocol = Proto::Udp;
  } else if (proto != "*") {
    lp.fail("rule protocol must be tcp, udp or *");
  }
  r.start_size = lp.integer<std::uint32_t>(lp.at(4), "rule start size", 0, 65535);
  if (lp.at(5) != "*") {
    r.end_size = lp.integer<std::uint32_t>(lp.at(5), "rule end size", 0, 65535);
    if (*r.end_size < r.start_size) lp.fail("rule end size below start size");
  }
  const auto pri = lp.at(6);
  if (pri == "Tf") {
    r.priority = RoutePriority::Tf;
  } else if (pri == "Rf") {
    r.priority = RoutePriority::Rf;
  } else if (pri == "Pf") {
    r.priority = RoutePriority::Pf;
  } else {
    lp.fail("rule priority must be Tf, Rf or Pf");
  }
  for (std::size_t i = 7; i < lp.size(); i += 2) {
    if (i + 1 >= lp.size()) lp.fail("rule option '" + std::string(lp.at(i)) + "' needs a value");
    if (lp.at(i) == "via") {
      r.via = lp.addr(lp.at(i + 1), "rule via");
    } else if (lp.at(i) == "from") {
      r.active_from = ms_to_time(lp.real(lp.at(i + 1), "rule from", 0, 1e12));
    } else {
      lp.fail("unknown rule option '" + std::string(lp.at(i)) + "'");
    }
  }
  return r;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario sc;
  std::map<std::string, std::size_t> node_index;
  std::map<Addr, std::size_t> iface_index;
  std::set<std::string> session_names;
  std::set<Addr> outer_addrs;

  auto find_iface = [&](const LineParser& lp, std::string_view tok) {
    const Addr a = lp.addr(tok, "interface");
    if (!iface_index.contains(a)) lp.fail("undefined interface " + std::string(tok));
    return a;
  };
  auto find_link = [&](const LineParser& lp, Addr a, Addr b) {
    for (const auto& l : sc.links)
      if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return;
    lp.fail("no link between " + format_addr(a) + " and " + format_addr(b));
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = tokenize(line);
    if (toks.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    LineParser lp(line_no, toks);
    const auto d = toks[0];

    if (d == "node") {
      lp.arity(1, 3);
      NodeSpec n;
      n.name = std::string(lp.at(1));
      n.line = line_no;
      if (node_index.contains(n.name)) lp.fail("duplicate node '" + n.name + "'");
      for (std::size_t i = 2; i < lp.size(); ++i) {
        auto [k, v] = split_kv(lp.at(i));
        if (k == "plain" && v.empty()) {
          n.mpip = false;
        } else if (k == "clock_offset_ms" && !v.empty()) {
          n.clock_offset_ms = lp.integer<std::int64_t>(v, "clock_offset_ms", -1'000'000'000,
                                                       1'000'000'000);
        } else {
          lp.fail("unknown node option '" + std::string(lp.at(i)) + "'");
        }
      }
      node_index[n.name] = sc.nodes.size();
      sc.nodes.push_back(n);
    } else if (d == "iface") {
      lp.arity(2, 2);
      IfaceSpec f;
      f.node = std::string(lp.at(1));
      if (!node_index.contains(f.node)) lp.fail("undefined node '" + f.node + "'");
      f.addr = lp.addr(lp.at(2), "interface");
      if (iface_index.contains(f.addr) || outer_addrs.contains(f.addr))
        lp.fail("duplicate address " + std::string(lp.at(2)));
      f.line = line_no;
      iface_index[f.addr] = sc.ifaces.size();
      sc.ifaces.push_back(f);
    } else if (d == "link") {
      lp.arity(6, 7);
      LinkSpec l;
      l.a = find_iface(lp, lp.at(1));
      l.b = find_iface(lp, lp.at(2));
      if (l.a == l.b) lp.fail("link endpoints must differ");
      if (sc.ifaces[iface_index[l.a]].node == sc.ifaces[iface_index[l.b]].node)
        lp.fail("link endpoints are on the same node");
      for (const auto& o : sc.links)
        if ((o.a == l.a && o.b == l.b) || (o.a == l.b && o.b == l.a)) lp.fail("duplicate link");
      l.bw_mbps = lp.real(lp.at(3), "bandwidth", 1e-3, 1e6);
      l.delay_ms = lp.real(lp.at(4), "delay", 0, 1e6);
      l.loss = lp.real(lp.at(5), "loss", 0, 0.999999);
      l.queue_pkts = lp.integer<std::uint32_t>(lp.at(6), "queue", 1, 10'000'000);
      if (lp.size() == 8) {
        auto [k, v] = split_kv(lp.at(7));
        if (k != "mtu" || v.empty()) lp.fail("unknown link option '" + std::string(lp.at(7)) + "'");
        l.mtu = lp.integer<std::uint32_t>(v, "mtu", 576, 65535);
      }
      l.line = line_no;
      sc.links.push_back(l);
    } else if (d == "nat") {
      lp.arity(2, 4);
      NatSpec n;
      n.iface = find_iface(lp, lp.at(1));
      n.outer = lp.addr(lp.at(2), "nat outer");
      if (iface_index.contains(n.outer) || outer_addrs.contains(n.outer))
        lp.fail("nat outer address already in use");
      for (const auto& o : sc.nats)
        if (o.iface == n.iface) lp.fail("interface already has a nat");
      for (std::size_t i = 3; i < lp.size(); ++i) {
        if (lp.at(i) == "drop_unknown_tcp")
          n.drop_unknown_tcp = true;
        else if (lp.at(i) == "verify_udp")
          n.verify_udp = true;
        else
          lp.fail("unknown nat option '" + std::string(lp.at(i)) + "'");
      }
      n.line = line_no;
      outer_addrs.insert(n.outer);
      sc.nats.push_back(n);
    } else if (d == "session") {
      if (lp.size() < 6) lp.fail("'session' expects <name> <src> <dst> <tcp|udp> <traffic-spec>");
      SessionSpec s;
      s.name = std::string(lp.at(1));
      if (!session_names.insert(s.name).second) lp.fail("duplicate session '" + s.name + "'");
      s.src = find_iface(lp, lp.at(2));
      s.dst = find_iface(lp, lp.at(3));
      if (sc.ifaces[iface_index[s.src]].node == sc.ifaces[iface_index[s.dst]].node)
        lp.fail("session endpoints are on the same node");
      if (lp.at(4) == "tcp")
        s.proto = Proto::Tcp;
      else if (lp.at(4) == "udp")
        s.proto = Proto::Udp;
      else
        lp.fail("session protocol must be tcp or udp");
      s.traffic = parse_traffic(lp, 5, s.proto);
      const auto idx = static_cast<Port>(sc.sessions.size());
      s.sport = s.traffic.sport.value_or(static_cast<Port>(40000 + idx));
      s.dport = s.traffic.dport.value_or(static_cast<Port>(5000 + idx));
      s.line = line_no;
      sc.sessions.push_back(s);
    } else if (d == "rule") {
      if (lp.size() < 7) lp.fail("'rule' expects 6 fields");
      sc.rules.push_back(parse_rule(lp));
    } else if (d == "param") {
      lp.arity(2, 2);
      apply_param(lp, sc.params);
    } else if (d == "fail_link" || d == "restore_link") {
      lp.arity(3, 3);
      TimedAction a;
      a.kind = d == "fail_link" ? TimedAction::Kind::FailLink : TimedAction::Kind::RestoreLink;
      a.a = find_iface(lp, lp.at(1));
      a.b = find_iface(lp, lp.at(2));
      find_link(lp, a.a, a.b);
      a.at = ms_to_time(lp.real(lp.at(3), "time", 0, 1e12));
      a.line = line_no;
      sc.actions.push_back(a);
    } else if (d == "ip_change") {
      lp.arity(3, 3);
      TimedAction a;
      a.kind = TimedAction::Kind::IpChange;
      a.a = find_iface(lp, lp.at(1));
      a.b = lp.addr(lp.at(2), "new");
      if (iface_index.contains(a.b) || outer_addrs.contains(a.b))
        lp.fail("new address already in use");
      a.at = ms_to_time(lp.real(lp.at(3), "time", 0, 1e12));
      a.line = line_no;
      sc.actions.push_back(a);
    } else if (d == "duration") {
      lp.arity(1, 1);
      sc.duration = ms_to_time(lp.real(lp.at(1), "duration", 0, 1e10));
    } else if (d == "seed") {
      lp.arity(1, 1);
      sc.seed = lp.integer<std::uint64_t>(lp.at(1), "seed", 0, UINT64_MAX);
    } else {
      lp.fail("unknown directive '" + std::string(d) + "'");
    }
    if (nl == text.size()) break;
  }

  // Cross-checks that need the whole file.
  for (const auto& n : sc.nodes) {
    const bool has_iface = std::any_of(sc.ifaces.begin(), sc.ifaces.end(),
                                       [&](const IfaceSpec& f) { return f.node == n.name; });
    if (!has_iface) throw ScenarioError(n.line, "node '" + n.name + "' has no interface");
  }
  for (const auto& s : sc.sessions) {
    for (const auto& n : sc.nats)
      if (n.iface == s.dst)
        throw ScenarioError(s.line, "session destination sits behind a nat");
  }
  std::stable_sort(sc.actions.begin(), sc.actions.end(),
                   [](const TimedAction& x, const TimedAction& y) { return x.at < y.at; });
  return sc;
}

}  // namespace mpip
