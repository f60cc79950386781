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


// Helpers shared by the unit tests and the acceptance runner.

#ifndef MPIP_TESTS_SUPPORT_HPP
#define MPIP_TESTS_SUPPORT_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpip/experiment.hpp"
#include "mpip/scenario.hpp"
#include "mpip/sim.hpp"

namespace mpip::testing {

inline std::string canned_text(std::string_view name) {
  auto t = canned_scenario(name);
  if (!t) throw std::runtime_error("no canned scenario " + std::string(name));
  return std::string(*t);
}

/// Text substitutions applied in order, then extra lines appended.
inline std::string variant(std::string text,
                           const std::vector<std::pair<std::string, std::string>>& repl,
                           std::string_view extra = {}) {
  for (const auto& [from, to] : repl) {
    auto pos = text.find(from);
    if (pos == std::string::npos) throw std::runtime_error("pattern not found: " + from);
    text.replace(pos, from.size(), to);
  }
  text += '\n';
  text += extra;
  return text;
}

inline RunResult run_text(const std::string& text,
                          std::optional<std::uint64_t> seed = std::nullopt) {
  return run_scenario(parse_scenario(text), seed);
}

/// Value of `key=` inside an event detail string.
inline std::optional<std::string> field(std::string_view detail, std::string_view key) {
  std::string needle = std::string(key) + "=";
  std::size_t pos = 0;
  while ((pos = detail.find(needle, pos)) != std::string_view::npos) {
    if (pos == 0 || detail[pos - 1] == ' ') {
      auto start = pos + needle.size();
      auto end = detail.find(' ', start);
      return std::string(detail.substr(start, end == std::string_view::npos ? end : end - start));
    }
    pos += needle.size();
  }
  return std::nullopt;
}

inline std::vector<const EventRow*> events_named(const RunResult& r, std::string_view name,
                                                 std::string_view node = {}) {
  std::vector<const EventRow*> out;
  for (const auto& e : r.events) {
    if (e.name != name) continue;
    if (!node.empty() && field(e.detail, "node") != std::string(node)) continue;
    out.push_back(&e);
  }
  return out;
}

/// Source address of each path a node created, keyed by path ID.
inline std::map<int, Addr> path_sources(const RunResult& r, std::string_view node) {
  std::map<int, Addr> out;
  for (const auto* e : events_named(r, "path_add", node)) {
    auto id = field(e->detail, "path");
    auto src = field(e->detail, "src");
    if (!id || !src) continue;
    auto addr = parse_addr(src->substr(0, src->find(':')));
    if (addr) out[std::stoi(*id)] = *addr;
  }
  return out;
}

inline const FlowResult& flow(const RunResult& r, std::string_view name) {
  for (const auto& f : r.flows)
    if (f.name == name) return f;
  throw std::runtime_error("no flow " + std::string(name));
}

/// Mean goodput in bit/s over [from, to), optionally restricted to paths
/// leaving `src` on the sender.
inline double goodput_bps(const RunResult& r, const FlowResult& f, SimTime from, SimTime to,
                          std::optional<Addr> src = std::nullopt,
                          std::string_view sender = "A") {
  const auto b = f.recorder.total(from, to);
  std::uint64_t bytes = 0;
  if (!src) {
    bytes = b.bytes;
  } else {
    const auto paths = path_sources(r, sender);
    for (const auto& [pid, n] : b.bytes_by_path) {
      auto it = paths.find(pid);
      if (it != paths.end() && it->second == *src) bytes += n;
    }
  }
  return static_cast<double>(bytes) * 8.0 * kUsPerSec / static_cast<double>(to - from);
}

inline Addr addr(std::string_view s) {
  auto a = parse_addr(s);
  if (!a) throw std::runtime_error("bad address " + std::string(s));
  return *a;
}

}  // namespace mpip::testing

#endif  // MPIP_TESTS_SUPPORT_HPP
