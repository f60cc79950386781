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

#include "mpip/router.hpp"

#include <algorithm>
#include <numeric>

namespace mpip {

std::vector<double> dispatch_probabilities(std::span<const PathRecord* const> paths) {
  std::vector<double> out;
  std::int64_t total = 0;
  for (const auto* p : paths) total += p->weight;
  for (const auto* p : paths) out.push_back(static_cast<double>(p->weight) / total);
  return out;
}

std::uint8_t pick_path(std::span<const PathRecord* const> paths, Rng& rng) {
  if (paths.empty()) throw NoPathAvailable();
  if (paths.size() == 1) return paths.front()->path_id;
  std::uint64_t total = 0;
  for (const auto* p : paths) total += static_cast<std::uint64_t>(p->weight);
  auto r = rng.below(total);
  for (const auto* p : paths) {
    const auto w = static_cast<std::uint64_t>(p->weight);
    if (r < w) return p->path_id;
    r -= w;
  }
  return paths.back()->path_id;
}

std::vector<int> adjust_weights(std::span<const double> q, std::span<const int> weights,
                                const WeightParams& params) {
  std::vector<int> out(weights.begin(), weights.end());
  if (q.empty()) return out;
  const double q_avg = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (q[i] <= q_avg)
      out[i] = std::min(out[i] + params.step, kWeightMax);
    else
      out[i] = std::max(out[i] - params.step, kWeightMin);
  }
  return out;
}

void adjust_weights(std::span<PathRecord* const> paths, const WeightParams& params) {
  std::vector<double> q;
  std::vector<int> w;
  for (const auto* p : paths) {
    q.push_back(p->q);
    w.push_back(p->weight);
  }
  const auto next = adjust_weights(q, w, params);
  for (std::size_t i = 0; i < paths.size(); ++i) paths[i]->weight = next[i];
}

std::uint8_t lowest_delay_path(std::span<const PathRecord* const> paths) {
  if (paths.empty()) throw NoPathAvailable();
  const PathRecord* best = nullptr;
  for (const auto* p : paths) {
    if (!p->has_sample) continue;
    if (!best || p->d_rt < best->d_rt || (p->d_rt == best->d_rt && p->path_id < best->path_id))
      best = p;
  }
  if (best) return best->path_id;
  return (*std::min_element(paths.begin(), paths.end(),
                            [](auto* a, auto* b) { return a->path_id < b->path_id; }))
      ->path_id;
}

Dispatch route_packet(const RoutingRule* rule, std::span<const PathRecord* const> paths,
                      Rng& rng) {
  if (paths.empty()) throw NoPathAvailable();

  std::vector<const PathRecord*> eligible(paths.begin(), paths.end());
  if (rule && rule->via) {
    std::vector<const PathRecord*> pinned;
    for (const auto* p : paths)
      if (p->src.addr == *rule->via) pinned.push_back(p);
    if (!pinned.empty()) eligible = std::move(pinned);
  }

  Dispatch d;
  const auto priority = rule ? rule->priority : RoutePriority::Tf;
  switch (priority) {
    case RoutePriority::Tf:
      d.kind = Dispatch::Kind::AllPaths;
      d.path_ids.push_back(pick_path(eligible, rng));
      break;
    case RoutePriority::Rf:
      d.kind = Dispatch::Kind::SinglePath;
      d.path_ids.push_back(lowest_delay_path(eligible));
      break;
    case RoutePriority::Pf:
      d.kind = Dispatch::Kind::Protected;
      for (const auto* p : eligible) d.path_ids.push_back(p->path_id);
      break;
  }
  return d;
}

bool ProtectedDedup::accept(SessionKey session, std::uint32_t timestamp, std::uint64_t digest,
                            SimTime now) {
  while (!order_.empty() && now - order_.front().first > window_) {
    seen_.erase(order_.front().second);
    order_.pop_front();
  }
  Key key{session.first, session.second, timestamp, digest};
  if (!seen_.insert(key).second) return false;
  order_.emplace_back(now, key);
  return true;
}

}  // namespace mpip
