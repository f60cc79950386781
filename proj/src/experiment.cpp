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

#include "mpip/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mpip {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string time_ms(SimTime t) {
  if (t % kUsPerMs == 0) return std::to_string(t / kUsPerMs);
  return fixed3(static_cast<double>(t) / kUsPerMs);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << body;
  f.flush();
  if (!f) {
    f.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw IoError("write to " + path.string() + " failed");
  }
}

}  // namespace

void write_metrics_csv(const RunResult& r, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const auto& m : r.metrics) {
    out << time_ms(m.time) << ',' << csv_field(m.session) << ',' << m.path_id << ','
        << m.goodput_bps << ',' << m.weight << ',' << fixed3(m.q_ms) << ',' << fixed3(m.d_rt_ms)
        << '\n';
  }
}

void write_events_csv(const RunResult& r, std::ostream& out) {
  out << kEventsHeader << '\n';
  for (const auto& e : r.events)
    out << time_ms(e.time) << ',' << csv_field(e.name) << ',' << csv_field(e.detail) << '\n';
}

std::string metrics_csv(const RunResult& r) {
  std::ostringstream s;
  write_metrics_csv(r, s);
  return s.str();
}

std::string events_csv(const RunResult& r) {
  std::ostringstream s;
  write_events_csv(r, s);
  return s.str();
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const auto metrics = dir / "metrics.csv";
  const auto events = dir / "events.csv";
  write_file(metrics, metrics_csv(r));
  try {
    write_file(events, events_csv(r));
  } catch (const IoError&) {
    std::filesystem::remove(metrics, ec);
    throw;
  }
}

}  // namespace mpip
