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

#include "mpip/cm.hpp"
#include "mpip/handshake.hpp"
#include "mpip/tables.hpp"

namespace mpip {
namespace {

const Endpoint kPeer{0x0A000102, 5000};
const NodeId kSelf{0x020000000001};
const NodeId kOther{0x020000000002};

TEST(Availability, UnknownUntilSettled) {
  NodeTables t;
  EXPECT_EQ(t.availability_lookup(kPeer), Availability::Unknown);
  t.record_confirmation(kPeer);
  EXPECT_EQ(t.availability_lookup(kPeer), Availability::True);
  t.mark_unavailable(kPeer);
  EXPECT_EQ(t.availability_lookup(kPeer), Availability::True);
}

TEST(Handshake, UnknownDestinationGetsPlainPlusQuery) {
  NodeTables t;
  EXPECT_EQ(on_outgoing_first_contact(t, kPeer, 0, {}), FirstContact::SendPlainPlusQuery);
  EXPECT_EQ(t.find_availability(kPeer)->query_count, 1u);
}

TEST(Handshake, QueriesArePacedByInterval) {
  NodeTables t;
  HandshakeParams p;
  EXPECT_EQ(on_outgoing_first_contact(t, kPeer, 0, p), FirstContact::SendPlainPlusQuery);
  EXPECT_EQ(on_outgoing_first_contact(t, kPeer, ms(50), p), FirstContact::SendPlain);
  EXPECT_EQ(on_outgoing_first_contact(t, kPeer, ms(100), p), FirstContact::SendPlainPlusQuery);
  EXPECT_EQ(t.find_availability(kPeer)->query_count, 2u);
}

TEST(Handshake, FalseAfterExactlyThresholdQueries) {
  NodeTables t;
  HandshakeParams p;
  SimTime now = 0;
  int queries = 0;
  for (int i = 0; i < 100; ++i, now += ms(100))
    queries += on_outgoing_first_contact(t, kPeer, now, p) == FirstContact::SendPlainPlusQuery;
  EXPECT_EQ(queries, static_cast<int>(p.query_threshold));
  EXPECT_EQ(t.availability_lookup(kPeer), Availability::False);
  EXPECT_EQ(on_outgoing_first_contact(t, kPeer, now, p), FirstContact::SendPlain);
}

TEST(Handshake, TrueDestinationGetsMpip) {
  NodeTables t;
  t.record_confirmation(kPeer);
  EXPECT_EQ(on_outgoing_first_contact(t, kPeer, 0, {}), FirstContact::SendMpip);
}

TEST(Handshake, QueryReplayIsIdempotent) {
  NodeTables t;
  ControlMessage q;
  q.flags = cm_flag::kEnable;
  q.source_node_id = kOther;
  q.addr_count = 1;
  q.addr_slot = kPeer.addr;

  const auto r1 = on_receive_query(t, q, kPeer, kSelf);
  EXPECT_TRUE(r1.has(cm_flag::kEnabled));
  EXPECT_EQ(r1.source_node_id, kSelf);
  EXPECT_EQ(t.availability_lookup(kPeer), Availability::True);

  const auto avail = t.availability();
  const auto addrs = t.node_addrs();
  for (int i = 0; i < 5; ++i) {
    const auto r = on_receive_query(t, q, kPeer, kSelf);
    EXPECT_EQ(r, r1);
  }
  EXPECT_EQ(t.availability().size(), avail.size());
  EXPECT_EQ(t.availability().at(kPeer).available, avail.at(kPeer).available);
  EXPECT_EQ(t.node_addrs(), addrs);
}

TEST(Handshake, ConfirmationMarksTrue) {
  NodeTables t;
  ControlMessage c;
  c.flags = cm_flag::kEnabled;
  c.source_node_id = kOther;
  on_receive_confirmation(t, c, kPeer);
  EXPECT_EQ(t.availability_lookup(kPeer), Availability::True);
  EXPECT_EQ(t.node_for(kPeer), kOther);
}

TEST(NodeAddrs, StoresObservedSourceAndDedupes) {
  NodeTables t;
  ControlMessage cm;
  cm.source_node_id = kOther;
  cm.addr_count = 1;
  cm.addr_slot = 0xC0A80002;  // inner address behind a NAT
  const Endpoint natted{0x0A000264, 20000};
  learn_peer_addr(t, cm, natted);
  learn_peer_addr(t, cm, natted);
  EXPECT_EQ(t.node_addrs().size(), 1u);
  EXPECT_EQ(t.node_for(natted), kOther);
}

TEST(NodeAddrs, AdvertisedAddressesAccumulate) {
  NodeTables t;
  ControlMessage cm;
  cm.source_node_id = kOther;
  cm.addr_count = 2;
  cm.addr_slot = 0x0A000102;
  learn_peer_addr(t, cm, kPeer);
  cm.addr_slot = 0x0A000202;
  learn_peer_addr(t, cm, kPeer);
  const auto a = t.advertised_addrs(kOther);
  EXPECT_EQ(a, (std::vector<Addr>{0x0A000102, 0x0A000202}));
}

TEST(Rules, TableSixRows) {
  NodeTables t;
  RoutingRule ssh;
  ssh.dst_port = 22;
  ssh.protocol = Proto::Tcp;
  ssh.start_size = 0;
  ssh.end_size = 200;
  ssh.priority = RoutePriority::Rf;
  RoutingRule xmpp;
  xmpp.dst_addr = 0xC0A80102;
  xmpp.dst_port = 5222;
  xmpp.protocol = Proto::Udp;
  xmpp.start_size = 200;
  xmpp.priority = RoutePriority::Tf;
  t.add_rule(ssh);
  t.add_rule(xmpp);

  const auto* r1 = t.match_rule({{0x01020304, 22}, Proto::Tcp, 150});
  ASSERT_NE(r1, nullptr);
  EXPECT_EQ(r1->priority, RoutePriority::Rf);
  const auto* r2 = t.match_rule({{0xC0A80102, 5222}, Proto::Udp, 800});
  ASSERT_NE(r2, nullptr);
  EXPECT_EQ(r2->priority, RoutePriority::Tf);
  EXPECT_EQ(t.match_rule({{0x01020304, 80}, Proto::Tcp, 150}), nullptr);
  EXPECT_EQ(t.match_rule({{0x01020304, 22}, Proto::Tcp, 200}), nullptr);
}

TEST(Rules, InactiveBeforeStartTime) {
  NodeTables t;
  RoutingRule r;
  r.priority = RoutePriority::Rf;
  r.active_from = ms(500);
  t.add_rule(r);
  EXPECT_EQ(t.match_rule({kPeer, Proto::Udp, 10}, ms(499)), nullptr);
  EXPECT_NE(t.match_rule({kPeer, Proto::Udp, 10}, ms(500)), nullptr);
}

SessionRecord make_session(NodeTables& t, std::uint16_t id, SimTime updated) {
  SessionRecord s;
  s.dest_node_id = kOther;
  s.session_id = id;
  s.orig_src = {1, 100};
  s.orig_dst = kPeer;
  s.update_time = updated;
  return t.insert_session(s);
}

TEST(Sessions, ExpireRemovesIdleSessionAndItsPaths) {
  NodeTables t;
  make_session(t, 1, 0);
  make_session(t, 3, ms(59000));
  t.add_path(kOther, 1, {1, 100}, kPeer);
  t.add_path(kOther, 1, {2, 100}, kPeer);
  t.add_path(kOther, 3, {1, 100}, kPeer);
  const auto gone = t.expire_sessions(ms(60001), ms(60000));
  ASSERT_EQ(gone.size(), 1u);
  EXPECT_EQ(gone[0], (SessionKey{kOther, 1}));
  EXPECT_TRUE(t.session_paths(kOther, 1).empty());
  EXPECT_EQ(t.session_paths(kOther, 3).size(), 1u);
}

TEST(Sessions, InfiniteTtlKeepsEverything) {
  NodeTables t;
  make_session(t, 1, 0);
  EXPECT_TRUE(t.expire_sessions(ms(10'000'000), kForever).empty());
}

TEST(Sessions, IdSplitByNodeOrder) {
  NodeTables t;
  const auto low = t.allocate_session_id(kSelf, kOther);
  const auto high = t.allocate_session_id(kOther, kSelf);
  EXPECT_NE(low % 2, high % 2);
  EXPECT_NE(low, 0);
  EXPECT_NE(high, 0);
}

TEST(Paths, WeightsResetToEqualShareOnChange) {
  NodeTables t;
  make_session(t, 1, 0);
  for (Addr a = 1; a <= 4; ++a) t.add_path(kOther, 1, {a, 100}, kPeer);
  for (const auto* p : t.session_paths(kOther, 1)) EXPECT_EQ(p->weight, 250);
  t.remove_path(t.session_paths(kOther, 1).front()->path_id);
  t.reset_weights(kOther, 1);
  for (const auto* p : t.session_paths(kOther, 1)) EXPECT_EQ(p->weight, 333);
}

TEST(Paths, ResetKeepsOnlyArrivalPath) {
  NodeTables t;
  make_session(t, 1, 0);
  std::uint8_t keep = 0;
  for (Addr a = 1; a <= 4; ++a) keep = t.add_path(kOther, 1, {a, 100}, kPeer)->path_id;
  const auto removed = t.reset_session_paths(kOther, 1, keep);
  EXPECT_EQ(removed.size(), 3u);
  const auto left = t.session_paths(kOther, 1);
  ASSERT_EQ(left.size(), 1u);
  EXPECT_EQ(left[0]->path_id, keep);
  EXPECT_EQ(left[0]->weight, kWeightMax);
}

TEST(Paths, ClampWeight) {
  EXPECT_EQ(NodeTables::clamp_weight(0), 1);
  EXPECT_EQ(NodeTables::clamp_weight(5000), 1000);
  EXPECT_EQ(NodeTables::clamp_weight(42), 42);
}

}  // namespace
}  // namespace mpip
