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

#include "mpip/handshake.hpp"

namespace mpip {

const char* to_string(FirstContact f) {
  switch (f) {
    case FirstContact::SendPlain: return "send-plain";
    case FirstContact::SendPlainPlusQuery: return "send-plain-plus-query";
    case FirstContact::SendMpip: return "send-mpip";
  }
  return "?";
}

FirstContact on_outgoing_first_contact(NodeTables& tables, const Endpoint& dest, SimTime now,
                                       const HandshakeParams& params) {
  auto& e = tables.availability_entry(dest);
  switch (e.available) {
    case Availability::True: return FirstContact::SendMpip;
    case Availability::False: return FirstContact::SendPlain;
    case Availability::Unknown: break;
  }

  const bool spaced = e.query_count == 0 || now - e.last_query >= params.query_interval;
  if (e.query_count >= params.query_threshold) {
    // The last query has had a full interval to be answered.
    if (spaced) tables.mark_unavailable(dest);
    return FirstContact::SendPlain;
  }
  if (!spaced) return FirstContact::SendPlain;
  ++e.query_count;
  e.last_query = now;
  return FirstContact::SendPlainPlusQuery;
}

void learn_peer_addr(NodeTables& tables, const ControlMessage& cm, const Endpoint& observed_src) {
  tables.learn_node_addr(cm.source_node_id, observed_src);
  tables.learn_advertised(cm.source_node_id, cm.addr_count, cm.addr_slot);
}

ControlMessage on_receive_query(NodeTables& tables, const ControlMessage& query,
                                const Endpoint& observed_src, NodeId self) {
  tables.record_confirmation(observed_src);
  learn_peer_addr(tables, query, observed_src);
  ControlMessage reply;
  reply.flags = cm_flag::kEnabled;
  reply.source_node_id = self;
  return reply;
}

void on_receive_confirmation(NodeTables& tables, const ControlMessage& cm,
                             const Endpoint& observed_src) {
  tables.record_confirmation(observed_src);
  learn_peer_addr(tables, cm, observed_src);
}

}  // namespace mpip
