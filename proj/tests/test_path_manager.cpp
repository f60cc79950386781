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


#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "mpip/path_manager.hpp"
#include "mpip/rng.hpp"

namespace mpip {
namespace {

TEST(Delay, RawSampleIsClockDifference) {
  EXPECT_EQ(one_way_delay_ms(1000, 1025), 25);
  EXPECT_EQ(one_way_delay_ms(0xFFFFFFF0u, 0x00000009u), 25);
  EXPECT_EQ(one_way_delay_ms(1025, 1000), -25);
}

TEST(Delay, MovingAverageByHand) {
  DelayWindow w(5);
  double d = 0;
  for (double s : {20, 22, 24, 26, 28}) d = w.push(s);
  EXPECT_DOUBLE_EQ(d, 24.0);
  EXPECT_DOUBLE_EQ(w.push(40), (22 + 24 + 26 + 28 + 40) / 5.0);
}

TEST(Delay, MetricUpdateRules) {
  PathRecord p;
  update_delay_metrics(p, 20);
  EXPECT_EQ(p.d_min, 20);
  EXPECT_EQ(p.q, 0);
  EXPECT_EQ(p.q_max, 0);
  update_delay_metrics(p, 25);
  EXPECT_EQ(p.q, 5);
  EXPECT_EQ(p.q_max, 5);
  update_delay_metrics(p, 18);
  EXPECT_EQ(p.d_min, 18);
  EXPECT_EQ(p.q, 0);
  EXPECT_EQ(p.q_max, 5);
  EXPECT_EQ(p.d_rt, 18);
}

// Straight recomputation from the full sample history.
struct Oracle {
  std::vector<double> raw;
  std::vector<double> smooth;

  void push(double s) {
    raw.push_back(s);
    const std::size_t k = std::min(raw.size(), kDelayWindow);
    smooth.push_back(std::accumulate(raw.end() - static_cast<std::ptrdiff_t>(k), raw.end(), 0.0) /
                     static_cast<double>(k));
  }
  double d_min() const { return *std::min_element(smooth.begin(), smooth.end()); }
  double q() const { return smooth.back() - d_min(); }
  double q_max() const {
    double best = 0, lo = smooth.front();
    for (double s : smooth) {
      lo = std::min(lo, s);
      best = std::max(best, s - lo);
    }
    return best;
  }
};

TEST(Delay, RandomTracesMatchOracle) {
  Rng rng(31);
  for (int trace = 0; trace < 300; ++trace) {
    DelayFeedback fb;
    PathRecord p;
    Oracle o;
    const int len = 1 + static_cast<int>(rng.below(300));
    for (int i = 0; i < len; ++i) {
      const auto s = static_cast<std::int32_t>(rng.below(400)) - 100;
      o.push(s);
      update_delay_metrics(p, fb.on_sample(3, s));
      ASSERT_NEAR(p.d_rt, o.smooth.back(), 1e-9);
      ASSERT_NEAR(p.d_min, o.d_min(), 1e-9);
      ASSERT_NEAR(p.q, o.q(), 1e-9);
      ASSERT_NEAR(p.q_max, o.q_max(), 1e-9);
    }
  }
}

TEST(Delay, ClockOffsetLeavesQueueingUnchanged) {
  Rng rng(32);
  for (int trace = 0; trace < 100; ++trace) {
    const auto offset = static_cast<std::uint32_t>(rng.next());
    DelayFeedback a, b;
    PathRecord pa, pb;
    std::uint32_t t1 = static_cast<std::uint32_t>(rng.next());
    for (int i = 0; i < 200; ++i) {
      t1 += static_cast<std::uint32_t>(rng.below(20));
      const auto t2 = t1 + 10 + static_cast<std::uint32_t>(rng.below(60));
      update_delay_metrics(pa, a.on_sample(1, one_way_delay_ms(t1, t2)));
      update_delay_metrics(pb, b.on_sample(1, one_way_delay_ms(t1, t2 + offset)));
      ASSERT_NEAR(pa.q, pb.q, 1e-6);
    }
  }
}

TEST(Feedback, ReportsRotateOverFreshPaths) {
  DelayFeedback fb;
  fb.on_sample(1, 10);
  fb.on_sample(2, 20);
  const auto r1 = fb.next_report();
  const auto r2 = fb.next_report();
  EXPECT_EQ(r1.path_id, 1);
  EXPECT_EQ(r1.delay_ms, 10);
  EXPECT_EQ(r2.path_id, 2);
  EXPECT_EQ(r2.delay_ms, 20);
  EXPECT_EQ(fb.next_report().path_id, 0);
  fb.on_sample(1, 30);
  const auto r3 = fb.next_report();
  EXPECT_EQ(r3.path_id, 1);
  EXPECT_EQ(r3.delay_ms, 20);
}

TEST(Probes, AtMostThreeAttemptsPerPair) {
  ProbePlanner pl(ms(100));
  pl.update({1, 2}, {{10, 5000}, {20, 5000}}, {{1, {10, 5000}}});
  EXPECT_EQ(pl.size(), 3u);
  int sent = 0;
  for (SimTime t = 0; t < ms(2000); t += ms(100)) sent += static_cast<int>(pl.due(t).size());
  EXPECT_EQ(sent, 3 * kMaxProbeAttempts);
  EXPECT_EQ(pl.exhausted().size(), 3u);
  pl.reset_attempts();
  EXPECT_EQ(pl.due(ms(5000)).size(), 3u);
}

TEST(Probes, RetriesArePaced) {
  ProbePlanner pl(ms(100));
  pl.update({1}, {{10, 5000}}, {});
  EXPECT_EQ(pl.due(0).size(), 1u);
  EXPECT_TRUE(pl.due(ms(50)).empty());
  EXPECT_EQ(pl.due(ms(100)).size(), 1u);
}

TEST(Probes, EstablishedPairsDropOut) {
  ProbePlanner pl;
  pl.update({1, 2}, {{10, 5000}, {20, 5000}}, {});
  EXPECT_EQ(pl.size(), 4u);
  pl.erase(2, {20, 5000});
  EXPECT_EQ(pl.size(), 3u);
}

TEST(Heartbeat, OnlyIdleUdp) {
  EXPECT_TRUE(heartbeat_due(Proto::Udp, 0, ms(200), kDefaultHeartbeat));
  EXPECT_FALSE(heartbeat_due(Proto::Udp, 0, ms(199), kDefaultHeartbeat));
  EXPECT_FALSE(heartbeat_due(Proto::Tcp, 0, ms(10000), kDefaultHeartbeat));
}

}  // namespace
}  // namespace mpip
