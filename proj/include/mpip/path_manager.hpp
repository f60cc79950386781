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

#ifndef MPIP_PATH_MANAGER_HPP
#define MPIP_PATH_MANAGER_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "mpip/tables.hpp"

namespace mpip {

constexpr std::size_t kDelayWindow = 10;
constexpr SimTime kDefaultHeartbeat = ms(200);
constexpr int kMaxProbeAttempts = 3;

/// One-way delay in ms from two 32-bit millisecond clocks, wraparound-aware.
inline std::int32_t one_way_delay_ms(std::uint32_t send_ts, std::uint32_t recv_ts) {
  return static_cast<std::int32_t>(recv_ts - send_ts);
}

/// Simple moving average over the last N samples.
class DelayWindow {
 public:
  explicit DelayWindow(std::size_t size = kDelayWindow) : size_(size) {}

  double push(double sample);
  double mean() const { return samples_.empty() ? 0.0 : sum_ / samples_.size(); }
  std::size_t count() const { return samples_.size(); }

 private:
  std::size_t size_;
  std::deque<double> samples_;
  double sum_ = 0;
};

/// Folds the latest smoothed delay into d_min, q and q_max.
void update_delay_metrics(PathRecord& path, double d_rt);

/// Receiver-side state for one session: smoothed delay per remote path and the
/// rotation that decides which one rides in the next outgoing CM.
class DelayFeedback {
 public:
  /// Records T2 - T1 for the peer's path. Returns the smoothed delay.
  double on_sample(std::uint8_t remote_path_id, std::int32_t raw_ms);

  struct Report {
    std::uint8_t path_id = 0;
    std::int32_t delay_ms = 0;
  };
  /// Next fresh report in round-robin order; path_id 0 when nothing is pending.
  Report next_report();

  void clear() { windows_.clear(); }
  std::size_t tracked() const { return windows_.size(); }
  std::optional<double> smoothed(std::uint8_t remote_path_id) const;

 private:
  struct Entry {
    DelayWindow window;
    bool fresh = false;
  };
  std::map<std::uint8_t, Entry> windows_;
  std::uint8_t cursor_ = 0;
};

/// Tracks candidate (local address, remote endpoint) pairs that are not yet
/// paths and schedules at most kMaxProbeAttempts probes for each.
class ProbePlanner {
 public:
  struct Candidate {
    Addr local = 0;
    Endpoint remote;
    int attempts = 0;
    SimTime last_attempt = 0;
  };

  explicit ProbePlanner(SimTime retry_interval = ms(100)) : retry_interval_(retry_interval) {}

  /// Replaces the candidate set; attempt counters survive for pairs that remain.
  void update(const std::vector<Addr>& local_addrs, const std::vector<Endpoint>& remotes,
              const std::vector<std::pair<Addr, Endpoint>>& existing);
  /// Pairs due for a probe at `now`; marks them attempted.
  std::vector<Candidate> due(SimTime now);
  /// Pairs that used up their attempts without becoming paths since the last reset.
  std::vector<Candidate> exhausted() const;
  void reset_attempts();
  void erase(Addr local, const Endpoint& remote);
  std::size_t size() const { return candidates_.size(); }

 private:
  SimTime retry_interval_;
  std::map<std::pair<Addr, Endpoint>, Candidate> candidates_;
};

/// Heartbeats go out only for UDP-like sessions that have not sent anything
/// on their own for a full interval.
bool heartbeat_due(Proto proto, SimTime last_sent, SimTime now, SimTime interval);

}  // namespace mpip

#endif  // MPIP_PATH_MANAGER_HPP
