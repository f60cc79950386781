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

// Per-packet path selection.
//
// All-paths mode dispatches each packet to path k with probability
// W_k / sum(W). Weights move by a fixed step every interval: paths whose
// queuing delay is at or below the session average gain weight, the rest
// lose it, bounded to [1, 1000].

#ifndef MPIP_ROUTER_HPP
#define MPIP_ROUTER_HPP

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <tuple>
#include <set>
#include <vector>

#include "mpip/rng.hpp"
#include "mpip/tables.hpp"

namespace mpip {

struct WeightParams {
  int step = 10;
  SimTime interval = ms(100);
};

class NoPathAvailable : public std::runtime_error {
 public:
  NoPathAvailable() : std::runtime_error("no path available") {}
};

/// P(k) for each path, in input order. Sums to 1 for a non-empty input.
std::vector<double> dispatch_probabilities(std::span<const PathRecord* const> paths);

/// Draws a path ID according to the weights. Throws NoPathAvailable.
std::uint8_t pick_path(std::span<const PathRecord* const> paths, Rng& rng);

/// One weight-adjustment round over a session's paths, all against the same
/// average queuing delay.
std::vector<int> adjust_weights(std::span<const double> q, std::span<const int> weights,
                                const WeightParams& params);
void adjust_weights(std::span<PathRecord* const> paths, const WeightParams& params);

/// Lowest d_rt; ties and paths without samples resolve to the lowest path ID.
std::uint8_t lowest_delay_path(std::span<const PathRecord* const> paths);

struct Dispatch {
  enum class Kind { AllPaths, SinglePath, Protected };
  Kind kind = Kind::AllPaths;
  std::vector<std::uint8_t> path_ids;
};

/// Applies `rule` (nullptr means throughput-first) to choose path(s).
/// Throws NoPathAvailable.
Dispatch route_packet(const RoutingRule* rule, std::span<const PathRecord* const> paths, Rng& rng);

/// Receiver-side duplicate suppression for protected-path copies.
class ProtectedDedup {
 public:
  explicit ProtectedDedup(SimTime window = kUsPerSec) : window_(window) {}

  /// True for the first copy seen within the window.
  bool accept(SessionKey session, std::uint32_t timestamp, std::uint64_t digest, SimTime now);
  std::size_t tracked() const { return seen_.size(); }

 private:
  using Key = std::tuple<NodeId, std::uint16_t, std::uint32_t, std::uint64_t>;

  SimTime window_;
  std::deque<std::pair<SimTime, Key>> order_;
  std::set<Key> seen_;
};

}  // namespace mpip

#endif  // MPIP_ROUTER_HPP
