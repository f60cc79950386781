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

#ifndef MPIP_TYPES_HPP
#define MPIP_TYPES_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace mpip {

/// IPv4 address in host byte order.
using Addr = std::uint32_t;
using Port = std::uint16_t;

/// Simulation time in integer microseconds.
using SimTime = std::int64_t;

constexpr SimTime kUsPerMs = 1000;
constexpr SimTime kUsPerSec = 1000 * kUsPerMs;
constexpr SimTime kForever = INT64_MAX;

constexpr SimTime ms(std::int64_t v) { return v * kUsPerMs; }

enum class Proto : std::uint8_t { Tcp = 6, Udp = 17 };

const char* to_string(Proto p);

struct Endpoint {
  Addr addr = 0;
  Port port = 0;

  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// 48-bit node identifier (MAC address of the node).
class NodeId {
 public:
  static constexpr std::uint64_t kMask = 0xFFFF'FFFF'FFFFull;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint64_t v) : value_(v & kMask) {}

  constexpr std::uint64_t value() const { return value_; }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;

 private:
  std::uint64_t value_ = 0;
};

std::string format_addr(Addr a);
std::optional<Addr> parse_addr(std::string_view s);
std::string format_endpoint(const Endpoint& e);
std::string format_node_id(NodeId id);

}  // namespace mpip

template <>
struct std::hash<mpip::Endpoint> {
  std::size_t operator()(const mpip::Endpoint& e) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{e.addr} << 16) | e.port);
  }
};

template <>
struct std::hash<mpip::NodeId> {
  std::size_t operator()(const mpip::NodeId& n) const noexcept {
    return std::hash<std::uint64_t>{}(n.value());
  }
};

#endif  // MPIP_TYPES_HPP
