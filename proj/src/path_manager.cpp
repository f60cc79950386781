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

#include "mpip/path_manager.hpp"

#include <algorithm>
#include <cmath>

namespace mpip {

double DelayWindow::push(double sample) {
  samples_.push_back(sample);
  sum_ += sample;
  if (samples_.size() > size_) {
    sum_ -= samples_.front();
    samples_.pop_front();
  }
  return mean();
}

void update_delay_metrics(PathRecord& path, double d_rt) {
  path.d_rt = d_rt;
  if (!path.has_sample) {
    path.has_sample = true;
    path.d_min = d_rt;
    path.q = 0;
    path.q_max = 0;
    return;
  }
  path.d_min = std::min(path.d_min, d_rt);
  path.q = d_rt - path.d_min;
  path.q_max = std::max(path.q_max, path.q);
}

double DelayFeedback::on_sample(std::uint8_t remote_path_id, std::int32_t raw_ms) {
  auto& e = windows_[remote_path_id];
  e.fresh = true;
  return e.window.push(raw_ms);
}

DelayFeedback::Report DelayFeedback::next_report() {
  if (windows_.empty()) return {};
  // Round-robin starting after the last reported path.
  auto it = windows_.upper_bound(cursor_);
  for (std::size_t n = 0; n < windows_.size(); ++n, ++it) {
    if (it == windows_.end()) it = windows_.begin();
    if (it->second.fresh) {
      it->second.fresh = false;
      cursor_ = it->first;
      return {it->first, static_cast<std::int32_t>(std::lround(it->second.window.mean()))};
    }
  }
  return {};
}

std::optional<double> DelayFeedback::smoothed(std::uint8_t remote_path_id) const {
  auto it = windows_.find(remote_path_id);
  if (it == windows_.end()) return std::nullopt;
  return it->second.window.mean();
}

void ProbePlanner::update(const std::vector<Addr>& local_addrs,
                          const std::vector<Endpoint>& remotes,
                          const std::vector<std::pair<Addr, Endpoint>>& existing) {
  std::map<std::pair<Addr, Endpoint>, Candidate> next;
  for (auto local : local_addrs) {
    for (const auto& remote : remotes) {
      std::pair key{local, remote};
      if (std::find(existing.begin(), existing.end(), key) != existing.end()) continue;
      auto it = candidates_.find(key);
      next[key] = it != candidates_.end() ? it->second : Candidate{local, remote};
    }
  }
  candidates_ = std::move(next);
}

std::vector<ProbePlanner::Candidate> ProbePlanner::due(SimTime now) {
  std::vector<Candidate> out;
  for (auto& [key, c] : candidates_) {
    if (c.attempts >= kMaxProbeAttempts) continue;
    if (c.attempts > 0 && now - c.last_attempt < retry_interval_) continue;
    ++c.attempts;
    c.last_attempt = now;
    out.push_back(c);
  }
  return out;
}

std::vector<ProbePlanner::Candidate> ProbePlanner::exhausted() const {
  std::vector<Candidate> out;
  for (const auto& [key, c] : candidates_)
    if (c.attempts >= kMaxProbeAttempts) out.push_back(c);
  return out;
}

void ProbePlanner::reset_attempts() {
  for (auto& [key, c] : candidates_) c.attempts = 0;
}

void ProbePlanner::erase(Addr local, const Endpoint& remote) {
  candidates_.erase({local, remote});
}

bool heartbeat_due(Proto proto, SimTime last_sent, SimTime now, SimTime interval) {
  return proto == Proto::Udp && now - last_sent >= interval;
}

}  // namespace mpip
