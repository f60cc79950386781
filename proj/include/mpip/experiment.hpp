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

#ifndef MPIP_EXPERIMENT_HPP
#define MPIP_EXPERIMENT_HPP

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mpip/sim.hpp"

namespace mpip {

inline constexpr std::string_view kMetricsHeader =
    "time_ms,session_id,path_id,goodput_bps,weight,q_ms,d_rt_ms";
inline constexpr std::string_view kEventsHeader = "time_ms,event,detail";

void write_metrics_csv(const RunResult& r, std::ostream& out);
void write_events_csv(const RunResult& r, std::ostream& out);
std::string metrics_csv(const RunResult& r);
std::string events_csv(const RunResult& r);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes metrics.csv and events.csv into `dir`, creating it if needed.
/// On failure nothing is left behind and IoError is thrown.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

struct CannedScenario {
  std::string_view name;
  std::string_view text;
};

const std::vector<CannedScenario>& canned_scenarios();
std::optional<std::string_view> canned_scenario(std::string_view name);

}  // namespace mpip

#endif  // MPIP_EXPERIMENT_HPP
