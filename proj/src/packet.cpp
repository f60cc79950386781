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

#include "mpip/packet.hpp"

namespace mpip {

TcpHeaderBytes encode_tcp_header(const TcpHeader& h) {
  TcpHeaderBytes b{};
  b[0] = h.sport >> 8;
  b[1] = h.sport & 0xFF;
  b[2] = h.dport >> 8;
  b[3] = h.dport & 0xFF;
  for (int i = 0; i < 4; ++i) {
    b[4 + i] = static_cast<std::uint8_t>(h.seq >> (24 - 8 * i));
    b[8 + i] = static_cast<std::uint8_t>(h.ack >> (24 - 8 * i));
  }
  b[12] = 5 << 4;  // data offset, no options
  b[13] = h.flags;
  b[14] = h.window >> 8;
  b[15] = h.window & 0xFF;
  // Checksum and urgent pointer stay zero in the simulator.
  return b;
}

TcpHeader decode_tcp_header(std::span<const std::uint8_t, kTcpHeader> b) {
  TcpHeader h;
  h.sport = static_cast<Port>((b[0] << 8) | b[1]);
  h.dport = static_cast<Port>((b[2] << 8) | b[3]);
  for (int i = 0; i < 4; ++i) {
    h.seq = (h.seq << 8) | b[4 + i];
    h.ack = (h.ack << 8) | b[8 + i];
  }
  h.flags = b[13];
  h.window = static_cast<std::uint16_t>((b[14] << 8) | b[15]);
  return h;
}

std::uint32_t SimPacket::wire_size() const {
  std::uint32_t size = kIpHeader + payload_len;
  if (wrapped_tcp)
    size += kUdpHeader + kTcpHeader;
  else
    size += proto == Proto::Tcp ? kTcpHeader : kUdpHeader;
  if (cm) size += kCmSize;
  return size;
}

}  // namespace mpip
