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

// Discrete-event network simulator. Time is integer microseconds; events
// fire in (time, insertion order). A run is a pure function of the scenario
// and the seed.

#ifndef MPIP_SIM_HPP
#define MPIP_SIM_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpip/engine.hpp"
#include "mpip/scenario.hpp"
#include "mpip/transport.hpp"

namespace mpip {

class EventQueue {
 public:
  void schedule(SimTime at, std::function<void()> fn);
  /// Runs events with time <= end. Returns the number executed.
  std::uint64_t run_until(SimTime end);
  SimTime now() const { return now_; }
  std::size_t pending() const { return heap_.size(); }

 private:
  struct Event {
    SimTime at;
    std::uint64_t id;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.id > b.id;
    }
  };

  std::vector<Event> heap_;
  std::uint64_t next_id_ = 0;
  SimTime now_ = 0;
};

struct MetricsRow {
  SimTime time = 0;
  std::string session;
  int path_id = 0;
  std::uint64_t goodput_bps = 0;
  int weight = 0;
  double q_ms = 0;
  double d_rt_ms = 0;
};

struct EventRow {
  SimTime time = 0;
  std::string name;
  std::string detail;
};

/// Packet accounting for the whole network.
struct NetCounters {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t in_flight = 0;
  std::map<std::string, std::uint64_t> dropped;

  std::uint64_t dropped_total() const;
};

struct FlowResult {
  std::string name;
  Proto proto = Proto::Tcp;
  FlowRecorder recorder{ms(100)};
  bool established = false;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t out_of_order = 0;
  std::uint64_t gap_retransmits = 0;
  std::uint64_t timeout_retransmits = 0;
  std::uint64_t packets_sent = 0;
};

struct NodeResult {
  std::string name;
  bool mpip = true;
  EngineStats stats;
  std::vector<AvailabilityEntry> availability;
  /// CM-bearing packets that reached a node without MPIP, by kind.
  std::uint64_t cm_queries_received = 0;
  std::uint64_t cm_data_received = 0;
  std::uint64_t plain_received = 0;
};

struct RunResult {
  SimTime duration = 0;
  std::uint64_t seed = 0;
  std::vector<MetricsRow> metrics;
  std::vector<EventRow> events;
  std::vector<FlowResult> flows;
  std::vector<NodeResult> nodes;
  NetCounters counters;
  std::uint64_t events_executed = 0;
};

/// Runs the scenario. `seed` overrides the scenario's own seed.
RunResult run_scenario(const Scenario& sc, std::optional<std::uint64_t> seed = std::nullopt);

/// Node ID assigned to the i-th node of a scenario.
NodeId scenario_node_id(std::size_t index);

}  // namespace mpip

#endif  // MPIP_SIM_HPP
