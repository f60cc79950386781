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


// Acceptance runner: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mpip/cm.hpp"
#include "mpip/path_manager.hpp"
#include "mpip/router.hpp"
#include "support.hpp"

using namespace mpip;
using namespace mpip::testing;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << (ok ? "" : "FAILED ") << what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

constexpr double kMbps = 1e6;

std::map<std::string, RunResult>& cache() {
  static std::map<std::string, RunResult> runs;
  return runs;
}

const RunResult& canned_run(const std::string& name) {
  auto& c = cache();
  auto it = c.find(name);
  if (it == c.end()) it = c.emplace(name, run_text(canned_text(name))).first;
  return it->second;
}

/// Upper-tail chi-square probability for 1 or 3 degrees of freedom.
double chi2_p(double x, int df) {
  if (df == 1) return std::erfc(std::sqrt(x / 2));
  if (df == 3)
    return std::erfc(std::sqrt(x / 2)) + std::sqrt(2 * x / M_PI) * std::exp(-x / 2);
  throw std::invalid_argument("df");
}

void two_path_goodput(Verdict& v, const RunResult& r, const char* label) {
  const auto& f = flow(r, "bulk");
  const SimTime from = 10 * kUsPerSec, to = r.duration;
  // Path ends are the scenario's first and second A-side addresses.
  const auto sources = path_sources(r, "A");
  std::vector<Addr> srcs;
  for (const auto& [pid, a] : sources)
    if (std::find(srcs.begin(), srcs.end(), a) == srcs.end()) srcs.push_back(a);
  if (srcs.size() < 2) {
    v.check(false, std::string(label) + " only " + std::to_string(srcs.size()) + " path(s)");
    return;
  }
  const double g1 = goodput_bps(r, f, from, to, srcs[0]);
  const double g2 = goodput_bps(r, f, from, to, srcs[1]);
  v.check(std::abs(g1 - 40 * kMbps) <= 4 * kMbps,
          std::string(label) + fmt(" path1 %.2f Mbps (cap 40)", g1 / kMbps));
  v.check(std::abs(g2 - 20 * kMbps) <= 2 * kMbps,
          std::string(label) + fmt(" path2 %.2f Mbps (cap 20)", g2 / kMbps));
  const double ratio = g2 > 0 ? g1 / g2 : 0;
  v.check(std::abs(ratio - 2.0) <= 0.3, std::string(label) + fmt(" ratio %.3f", ratio));
}

// 1. Load balancing over 40/20 Mbps.
void criterion1(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& r = canned_run("loadbalance_40_20");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  two_path_goodput(v, r, "loadbalance");
  v.check(secs < 10.0, fmt("runtime %.2f s", secs));
}

// 2. Failover at 30 s and restoration at 70 s.
void criterion2(Verdict& v) {
  const auto& r = canned_run("failover");
  const auto& f = flow(r, "bulk");
  const SimTime fail = 30 * kUsPerSec, restore = 70 * kUsPerSec;

  // Recovery time: start of the first 1 s window, on the 100 ms metrics grid,
  // whose mean goodput is at least 90% of the surviving 40 Mbps path.
  std::optional<SimTime> recovered;
  for (SimTime t = fail; t <= fail + 10 * kUsPerSec; t += ms(100)) {
    if (goodput_bps(r, f, t, t + kUsPerSec) >= 0.9 * 40 * kMbps) {
      recovered = t;
      break;
    }
  }
  v.check(recovered && *recovered <= fail + 2 * kUsPerSec,
          recovered ? fmt("90%% of surviving path reached %.1f s after failure",
                          static_cast<double>(*recovered - fail) / kUsPerSec)
                    : std::string("never recovered to 90% of surviving path"));
  const double steady = goodput_bps(r, f, fail + 2 * kUsPerSec, restore);
  v.check(steady >= 0.9 * 40 * kMbps, fmt("single-path goodput %.2f Mbps", steady / kMbps));

  const Addr restored = addr("10.0.2.1");
  const double on_restored = goodput_bps(r, f, restore, restore + 5 * kUsPerSec, restored);
  const double total = goodput_bps(r, f, restore, restore + 5 * kUsPerSec);
  const double share = total > 0 ? on_restored / total : 0;
  v.check(share >= 0.25, fmt("restored path share %.1f%% in first 5 s", 100 * share));

  v.check(f.established, "transport established");
  v.check(events_named(r, "session_expire").empty(), "no session expiry");
  v.check(events_named(r, "session_add", "A").size() == 1 &&
              events_named(r, "session_add", "B").size() == 1,
          "one MPIP session per node throughout");
  const double tail = goodput_bps(r, f, r.duration - 5 * kUsPerSec, r.duration);
  v.check(tail > 0, fmt("transport still moving at end (%.2f Mbps)", tail / kMbps));
}

// 3. Reordering with 10 ms / 2 ms paths, buffer on and off.
void criterion3(Verdict& v) {
  const auto& on = canned_run("reorder_10_2");
  const auto off = run_text(variant(canned_text("reorder_10_2"),
                                    {{"param reorder_buffer on", "param reorder_buffer off"}}));
  const auto& fon = flow(on, "bulk");
  const auto& foff = flow(off, "bulk");
  const SimTime from = 2 * kUsPerSec;
  const double gon = goodput_bps(on, fon, from, on.duration);
  const double goff = goodput_bps(off, foff, from, off.duration);

  v.check(fon.out_of_order == 0,
          "on: " + std::to_string(fon.out_of_order) + " out-of-order deliveries");
  v.check(fon.gap_retransmits == 0,
          "on: " + std::to_string(fon.gap_retransmits) + " gap retransmits");
  v.check(gon >= 0.9 * 40 * kMbps, fmt("on: goodput %.2f Mbps of 40", gon / kMbps));
  v.check(foff.gap_retransmits + foff.timeout_retransmits > 0,
          "off: " + std::to_string(foff.gap_retransmits + foff.timeout_retransmits) +
              " retransmits");
  v.check(goff < gon, fmt("off: goodput %.2f Mbps < %.2f Mbps", goff / kMbps, gon / kMbps));
}

// 4. Dispatch probabilities and weight adjustment.
void criterion4(Verdict& v) {
  Rng rng(20260418);

  bool bounded = true;
  for (int trial = 0; trial < 200 && bounded; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<int> w(n);
    for (auto& x : w) x = 1 + static_cast<int>(rng.below(1000));
    for (int round = 0; round < 300; ++round) {
      std::vector<double> q(n);
      for (auto& x : q) x = static_cast<double>(rng.below(200));
      w = adjust_weights(q, w, WeightParams{});
      for (int x : w) bounded = bounded && x >= kWeightMin && x <= kWeightMax;
    }
  }
  for (const auto* name : {"loadbalance_40_20", "failover", "coordinated_two_sessions"})
    for (const auto& m : canned_run(name).metrics)
      if (m.path_id != 0) bounded = bounded && m.weight >= kWeightMin && m.weight <= kWeightMax;
  v.check(bounded, "weights within [1,1000] (random rounds and canned runs)");

  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<PathRecord> recs(1 + rng.below(8));
    std::vector<const PathRecord*> ptrs;
    for (auto& p : recs) {
      p.weight = 1 + static_cast<int>(rng.below(1000));
      ptrs.push_back(&p);
    }
    const auto probs = dispatch_probabilities(ptrs);
    worst = std::max(worst, std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0));
  }
  v.check(worst < 1e-12, fmt("sum P(k) = 1 (max error %.1e)", worst));

  PathRecord a, b;
  a.path_id = 1;
  a.weight = 1000;
  b.path_id = 2;
  b.weight = 500;
  const std::vector<const PathRecord*> two{&a, &b};
  Rng draw(7);
  const int n = 10000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += pick_path(two, draw) == 1;
  const double e1 = n * 2.0 / 3, e2 = n / 3.0;
  const double chi = (hits - e1) * (hits - e1) / e1 + ((n - hits) - e2) * ((n - hits) - e2) / e2;
  const double p = chi2_p(chi, 1);
  v.check(p > 0.01, fmt("chi-square [1000,500]: x2=%.3f p=%.3f", chi, p));

  const WeightParams s10{};
  const std::vector<double> q1{5, 15};
  const std::vector<int> w1{500, 500};
  v.check(adjust_weights(q1, w1, s10) == std::vector<int>{510, 490}, "Q=[5,15] W=[500,500] -> [510,490]");
  const std::vector<double> q2{3, 9};
  const std::vector<int> w2{1000, 400};
  v.check(adjust_weights(q2, w2, s10)[0] == 1000, "W=1000 at Q<=Qavg stays 1000");
  const std::vector<int> w3{600, 1};
  v.check(adjust_weights(q2, w3, s10)[1] == 1, "W=1 at Q>Qavg stays 1");
}

// 5. Responsiveness-first audio next to a throughput-first bulk flow.
void criterion5(Verdict& v) {
  const auto& rf = canned_run("rf_audio_50_80");
  const auto tf = run_text(
      variant(canned_text("rf_audio_50_80"), {{"rule * * udp 0 200 Rf", "rule * * udp 0 200 Tf"}}));
  const SimTime from = 2 * kUsPerSec;

  const auto a_rf = flow(rf, "audio").recorder.total(from, rf.duration);
  const auto a_tf = flow(tf, "audio").recorder.total(from, tf.duration);
  const double d_rf = a_rf.delay_samples ? a_rf.delay_sum_ms / a_rf.delay_samples : 1e9;
  const double d_tf = a_tf.delay_samples ? a_tf.delay_sum_ms / a_tf.delay_samples : 0;
  v.check(std::abs(d_rf - 50.0) <= 2.0, fmt("Rf audio mean delay %.2f ms (path 50 ms)", d_rf));

  const auto& bulk = flow(rf, "bulk");
  const double g1 = goodput_bps(rf, bulk, from, rf.duration, addr("10.0.1.1"));
  const double g2 = goodput_bps(rf, bulk, from, rf.duration, addr("10.0.2.1"));
  const double share = g1 + g2 > 0 ? std::min(g1, g2) / (g1 + g2) : 0;
  v.check(share >= 0.1, fmt("bulk uses both paths (smaller share %.1f%%)", 100 * share));

  v.check(d_tf - d_rf >= 25.0,
          fmt("Rf %.2f ms vs Tf control %.2f ms", d_rf, d_tf) +
              fmt(" (gain %.2f ms, target 25)", d_tf - d_rf));
}

// 6. Coordinated routing of two sessions.
void criterion6(Verdict& v) {
  const auto& r = canned_run("coordinated_two_sessions");
  const SimTime from = 22 * kUsPerSec, to = r.duration;
  const auto& video = flow(r, "video");
  const auto& file = flow(r, "file");
  const double gv = goodput_bps(r, video, from, to);
  v.check(gv >= 0.9 * 2 * kMbps, fmt("phase 2 video goodput %.3f Mbps of 2", gv / kMbps));
  const auto vb = video.recorder.total(from, to);
  const auto fb = file.recorder.total(from, to);
  v.check(vb.out_of_order == 0, "phase 2 video out-of-order " + std::to_string(vb.out_of_order));
  v.check(fb.out_of_order == 0, "phase 2 file out-of-order " + std::to_string(fb.out_of_order));
  const double gv_other = goodput_bps(r, video, from, to, addr("10.0.2.1"));
  const double gf_other = goodput_bps(r, file, from, to, addr("10.0.1.1"));
  v.check(gv_other == 0 && gf_other == 0, "sessions on distinct paths in phase 2");
  const double gv1 = goodput_bps(r, video, 2 * kUsPerSec, 20 * kUsPerSec, addr("10.0.2.1"));
  v.check(gv1 > 0, fmt("phase 1 video also on second path (%.3f Mbps)", gv1 / kMbps));
}

// 7. NAT on the secondary path.
void criterion7(Verdict& v) {
  const auto none = run_text(variant(canned_text("nat_fakehs"),
                                     {{"param nat_mode fake_handshake", "param nat_mode none"}}));
  const auto& fn = flow(none, "bulk");
  const double sec = goodput_bps(none, fn, 0, none.duration, addr("192.168.0.2"));
  v.check(sec == 0, fmt("traversal off: secondary-path goodput %.0f bit/s", sec));
  two_path_goodput(v, canned_run("nat_fakehs"), "fake_handshake");
  two_path_goodput(v, canned_run("nat_udpwrap"), "udp_wrapper");
}

// 8. Fallback against a peer without MPIP.
void criterion8(Verdict& v) {
  const auto& r = canned_run("non_mpip_peer");
  const NodeResult* a = nullptr;
  const NodeResult* b = nullptr;
  for (const auto& n : r.nodes) (n.name == "A" ? a : b) = &n;
  v.check(b->cm_data_received == 0,
          "peer received " + std::to_string(b->cm_data_received) + " CM data packets");
  for (const auto& f : r.flows) {
    const bool moved = f.delivered_bytes > 0 && f.established;
    v.check(moved, f.name + " delivered " + std::to_string(f.delivered_bytes) + " bytes");
  }
  const auto threshold = parse_scenario(canned_text("non_mpip_peer")).params.handshake.query_threshold;
  bool all_false = !a->availability.empty();
  for (const auto& e : a->availability)
    all_false = all_false && e.available == Availability::False && e.query_count == threshold;
  v.check(all_false, "every destination False after exactly " + std::to_string(threshold) +
                         " queries");
  v.check(a->stats.cm_to_unavailable == 0, "no CM data after the verdict");
  v.check(a->stats.cm_sent == a->stats.queries_sent, "only queries carried CM blocks");
}

// 9. Engine conformance.
const char* kIpChangeScenario = R"(
node A
node B
iface A 10.0.1.1
iface A 10.0.2.1
iface B 10.0.1.2
iface B 10.0.2.2
link 10.0.1.1 10.0.1.2 10 10 0 200
link 10.0.2.1 10.0.2.2 10 10 0 200
session s 10.0.1.1 10.0.1.2 udp cbr rate_kbps=2000 size=1000
ip_change 10.0.2.1 10.0.3.1 5000
duration 10000
)";

const char* kProtectedScenario = R"(
node A
node B
iface A 10.0.1.1
iface A 10.0.2.1
iface B 10.0.1.2
iface B 10.0.2.2
link 10.0.1.1 10.0.1.2 10 10 0 200
link 10.0.2.1 10.0.2.2 10 15 LOSS 200
session s 10.0.1.1 10.0.1.2 udp cbr rate_kbps=800 size=500 stop=9000
rule * * udp 0 * Pf
duration 10000
)";

void criterion9(Verdict& v) {
  Rng rng(99);

  // Codec.
  bool roundtrip = true, sized = true, detected = true;
  for (int i = 0; i < 2000; ++i) {
    ControlMessage cm;
    cm.flags = static_cast<std::uint8_t>(rng.below(64));
    cm.source_node_id = NodeId(rng.next());
    cm.session_id = static_cast<std::uint16_t>(rng.next());
    cm.path_id = static_cast<std::uint8_t>(rng.next());
    cm.feedback_path_id = static_cast<std::uint8_t>(rng.next());
    cm.packet_timestamp = static_cast<std::uint32_t>(rng.next());
    cm.path_delay = static_cast<std::int32_t>(static_cast<std::uint32_t>(rng.next()));
    cm.addr_count = static_cast<std::uint8_t>(rng.next());
    cm.addr_slot = static_cast<Addr>(rng.next());
    const auto bytes = encode_cm(cm);
    sized = sized && bytes.size() == kCmSize;
    roundtrip = roundtrip && decode_cm(bytes) == cm;
    if (i < 64) {
      for (std::size_t pos = 0; pos < 24; ++pos) {
        for (int delta = 1; delta < 256; ++delta) {
          auto bad = bytes;
          bad[pos] ^= static_cast<std::uint8_t>(delta);
          try {
            decode_cm(bad);
            detected = false;
          } catch (const CmError& e) {
            detected = detected && e.code() == CmErrc::Corrupt;
          }
        }
      }
    }
  }
  v.check(roundtrip && sized, "codec round-trip and 25-byte size");
  v.check(detected, "every single-byte corruption of bytes 0-23 detected");

  // Delay metrics against a direct recomputation, with a random clock offset.
  bool metrics_ok = true;
  for (int trace = 0; trace < 200; ++trace) {
    const std::int64_t offset = static_cast<std::int64_t>(rng.below(2'000'000)) - 1'000'000;
    DelayFeedback fb;
    PathRecord path, shifted_path;
    DelayFeedback shifted_fb;
    std::vector<double> raw, smoothed;
    double d_min = 0, q_max = 0;
    const int len = 1 + static_cast<int>(rng.below(200));
    for (int i = 0; i < len; ++i) {
      const auto base = static_cast<std::int32_t>(10 + rng.below(150));
      raw.push_back(base + static_cast<double>(offset));
      const double got = fb.on_sample(1, static_cast<std::int32_t>(base + offset));
      update_delay_metrics(path, got);
      update_delay_metrics(shifted_path, shifted_fb.on_sample(1, base));

      const std::size_t k = std::min<std::size_t>(raw.size(), kDelayWindow);
      const double mean =
          std::accumulate(raw.end() - static_cast<std::ptrdiff_t>(k), raw.end(), 0.0) / k;
      smoothed.push_back(mean);
      d_min = i == 0 ? mean : std::min(d_min, mean);
      const double q = mean - d_min;
      q_max = std::max(q_max, q);
      metrics_ok = metrics_ok && std::abs(got - mean) < 1e-9 &&
                   std::abs(path.d_rt - mean) < 1e-9 && std::abs(path.d_min - d_min) < 1e-9 &&
                   std::abs(path.q - q) < 1e-9 && std::abs(path.q_max - q_max) < 1e-9 &&
                   std::abs(shifted_path.q - q) < 1e-6;
    }
  }
  v.check(metrics_ok, "delay metrics match recomputation on 200 random traces");

  // IP_CHANGE: the notified peer drops to one path and recovers.
  const auto r = run_text(kIpChangeScenario);
  const auto notify = events_named(r, "ip_change_notify");
  const auto resets = events_named(r, "session_reset_paths");
  v.check(!notify.empty() && resets.size() == notify.size(),
          std::to_string(resets.size()) + " resets for " + std::to_string(notify.size()) +
              " notifications");
  bool one_left = !resets.empty();
  for (const auto* e : resets) one_left = one_left && field(e->detail, "paths") == "1";
  v.check(one_left, "reset leaves exactly one path");
  if (!resets.empty()) {
    const auto node = *field(resets.front()->detail, "node");
    const SimTime changed = notify.front()->time;
    int live = 0, before = 0;
    std::optional<SimTime> back;
    bool after = false;
    for (const auto& e : r.events) {
      if (field(e.detail, "node") != node) continue;
      if (e.name == "path_add") ++live;
      if (e.name == "path_remove") --live;
      if (&e == resets.front()) {
        after = true;
        live = std::stoi(*field(e.detail, "paths"));
        continue;
      }
      if (e.time < changed) before = live;
      if (after && !back && live >= before) back = e.time;
    }
    v.check(before >= 2 && back.has_value(),
            "re-converged to " + std::to_string(before) + " paths" +
                (back ? fmt(" %.0f ms after reset",
                            static_cast<double>(*back - resets.front()->time) / kUsPerMs)
                      : std::string(" never")));
  }

  // Protected mode: duplicates suppressed, single-copy loss absorbed.
  for (const char* loss : {"0", "0.3"}) {
    std::string text = kProtectedScenario;
    text.replace(text.find("LOSS"), 4, loss);
    const auto pr = run_text(text);
    const auto& s = flow(pr, "s");
    const auto got = s.recorder.total(0, pr.duration).packets;
    std::uint64_t discards = 0;
    for (const auto& n : pr.nodes) discards += n.stats.dedup_discards;
    v.check(got == s.packets_sent && discards > 0,
            std::string("protected loss=") + loss + ": " + std::to_string(got) + " of " +
                std::to_string(s.packets_sent) + " delivered once, " + std::to_string(discards) +
                " copies discarded");
  }
}

// 10. Same seed, same bytes.
void criterion10(Verdict& v) {
  for (const auto& c : canned_scenarios()) {
    const auto& first = canned_run(std::string(c.name));
    const auto second = run_text(std::string(c.text));
    v.check(metrics_csv(first) == metrics_csv(second) && events_csv(first) == events_csv(second),
            std::string(c.name));
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria = {
      {"load balancing 40/20", criterion1},   {"failover and recovery", criterion2},
      {"reordering", criterion3},             {"dispatch and weight adjustment", criterion4},
      {"Rf latency routing", criterion5},     {"coordinated routing", criterion6},
      {"NAT traversal", criterion7},          {"handshake fallback", criterion8},
      {"engine conformance", criterion9},     {"determinism", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %zu (%s): %s - %s\n", i + 1, criteria[i].first,
                v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed;
}
