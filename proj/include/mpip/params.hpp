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

#ifndef MPIP_PARAMS_HPP
#define MPIP_PARAMS_HPP

#include "mpip/handshake.hpp"
#include "mpip/path_manager.hpp"
#include "mpip/router.hpp"
#include "mpip/transport_compat.hpp"

namespace mpip {

/// Tunables shared by every MPIP node of a run.
struct EngineParams {
  WeightParams weights;
  HandshakeParams handshake;
  SimTime heartbeat = kDefaultHeartbeat;
  /// Reorder buffer capacity in segments; 0 disables resequencing.
  std::size_t reorder_capacity = kReorderCapacity;
  NatTraversal nat_mode = NatTraversal::None;
  SimTime session_ttl = kDefaultSessionTtl;
  SimTime probe_interval = ms(100);
  SimTime dedup_window = kUsPerSec;
};

}  // namespace mpip

#endif  // MPIP_PARAMS_HPP
