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

#include "mpip/cm.hpp"

namespace mpip {

namespace {

void put_be(std::uint8_t* out, std::uint64_t v, int n) {
  for (int i = n - 1; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xFF);
    v >>= 8;
  }
}

std::uint64_t get_be(const std::uint8_t* in, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v = (v << 8) | in[i];
  return v;
}

}  // namespace

std::uint8_t cm_checksum(std::span<const std::uint8_t> first24) {
  std::uint8_t x = 0;
  for (auto b : first24) x ^= b;
  return x;
}

CmBytes encode_cm(const ControlMessage& cm) {
  if (cm.version > 3) throw CmError(CmErrc::Encoding, "cm field 'version' out of range");
  if (cm.flags & cm_flag::kReservedMask)
    throw CmError(CmErrc::Encoding, "cm field 'flags' uses reserved bits");

  CmBytes out{};
  out[0] = static_cast<std::uint8_t>(cm.flags | (cm.version << 6));
  put_be(&out[1], cm.source_node_id.value(), 6);
  put_be(&out[7], cm.session_id, 2);
  out[9] = cm.path_id;
  out[10] = cm.feedback_path_id;
  put_be(&out[11], cm.packet_timestamp, 4);
  put_be(&out[15], static_cast<std::uint32_t>(cm.path_delay), 4);
  out[19] = cm.addr_count;
  put_be(&out[20], cm.addr_slot, 4);
  out[24] = cm_checksum(std::span(out).first(24));
  return out;
}

ControlMessage decode_cm(std::span<const std::uint8_t> buf) {
  if (buf.size() < kCmSize)
    throw CmError(CmErrc::Truncated,
                  "cm block truncated: " + std::to_string(buf.size()) + " bytes");
  const auto b = buf.last(kCmSize);
  if (cm_checksum(b.first(24)) != b[24]) throw CmError(CmErrc::Corrupt, "cm checksum mismatch");

  ControlMessage cm;
  cm.version = b[0] >> 6;
  if (cm.version != kCmVersion)
    throw CmError(CmErrc::Malformed, "cm version " + std::to_string(cm.version));
  cm.flags = b[0] & ~cm_flag::kReservedMask;
  cm.source_node_id = NodeId(get_be(&b[1], 6));
  cm.session_id = static_cast<std::uint16_t>(get_be(&b[7], 2));
  cm.path_id = b[9];
  cm.feedback_path_id = b[10];
  cm.packet_timestamp = static_cast<std::uint32_t>(get_be(&b[11], 4));
  cm.path_delay = static_cast<std::int32_t>(static_cast<std::uint32_t>(get_be(&b[15], 4)));
  cm.addr_count = b[19];
  cm.addr_slot = static_cast<Addr>(get_be(&b[20], 4));
  return cm;
}

}  // namespace mpip
