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

// MPIP availability discovery.
//
// The first packets to an unknown (addr, port) go out as plain IP, each paired
// with a duplicate carrying a CM block with ENABLE set. An MPIP peer answers
// with ENABLED; a peer that stays silent past the query threshold is marked as
// not supporting MPIP and is only ever sent plain packets afterwards.

#ifndef MPIP_HANDSHAKE_HPP
#define MPIP_HANDSHAKE_HPP

#include "mpip/cm.hpp"
#include "mpip/tables.hpp"

namespace mpip {

struct HandshakeParams {
  std::uint32_t query_threshold = kDefaultQueryThreshold;
  /// Minimum spacing between two queries to the same destination.
  SimTime query_interval = ms(100);
};

enum class FirstContact { SendPlain, SendPlainPlusQuery, SendMpip };

const char* to_string(FirstContact f);

FirstContact on_outgoing_first_contact(NodeTables& tables, const Endpoint& dest, SimTime now,
                                       const HandshakeParams& params);

/// Stores the sender's node ID against the observed source and accumulates the
/// advertised address carried in this CM.
void learn_peer_addr(NodeTables& tables, const ControlMessage& cm, const Endpoint& observed_src);

/// Handles an ENABLE query. Returns the CM of the ENABLED reply.
ControlMessage on_receive_query(NodeTables& tables, const ControlMessage& query,
                                const Endpoint& observed_src, NodeId self);

/// Handles an ENABLED confirmation.
void on_receive_confirmation(NodeTables& tables, const ControlMessage& cm,
                             const Endpoint& observed_src);

}  // namespace mpip

#endif  // MPIP_HANDSHAKE_HPP
