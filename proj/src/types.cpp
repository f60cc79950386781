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

#include "mpip/types.hpp"

#include <charconv>
#include <cstdio>

namespace mpip {

const char* to_string(Proto p) {
  return p == Proto::Tcp ? "tcp" : "udp";
}

std::string format_addr(Addr a) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (a >> 24) & 0xFF, (a >> 16) & 0xFF,
                (a >> 8) & 0xFF, a & 0xFF);
  return buf;
}

std::optional<Addr> parse_addr(std::string_view s) {
  Addr out = 0;
  const char* p = s.data();
  const char* end = s.data() + s.size();
  for (int i = 0; i < 4; ++i) {
    unsigned octet = 0;
    auto [next, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc{} || next == p || octet > 255) return std::nullopt;
    out = (out << 8) | octet;
    p = next;
    if (i < 3) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
  }
  if (p != end) return std::nullopt;
  return out;
}

std::string format_endpoint(const Endpoint& e) {
  return format_addr(e.addr) + ":" + std::to_string(e.port);
}

std::string format_node_id(NodeId id) {
  char buf[18];
  const auto v = id.value();
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x",
                unsigned(v >> 40) & 0xFF, unsigned(v >> 32) & 0xFF, unsigned(v >> 24) & 0xFF,
                unsigned(v >> 16) & 0xFF, unsigned(v >> 8) & 0xFF, unsigned(v) & 0xFF);
  return buf;
}

}  // namespace mpip
