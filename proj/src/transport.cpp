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

#include "mpip/transport.hpp"

#include <algorithm>
#include <cmath>

#include "mpip/transport_compat.hpp"

namespace mpip {

std::uint64_t payload_digest(int flow, std::uint64_t seq) {
  std::uint64_t z = (static_cast<std::uint64_t>(flow + 1) << 40) ^ seq;
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// FlowRecorder

FlowBucket& FlowRecorder::at(SimTime now) {
  const auto i = static_cast<std::size_t>(now / bucket_);
  if (buckets_.size() <= i) buckets_.resize(i + 1);
  return buckets_[i];
}

void FlowRecorder::goodput(SimTime now, std::uint8_t path, std::uint64_t bytes) {
  auto& b = at(now);
  b.bytes_by_path[path] += bytes;
  b.bytes += bytes;
  ++b.packets;
}

void FlowRecorder::delay(SimTime now, double delay_ms) {
  auto& b = at(now);
  b.delay_sum_ms += delay_ms;
  ++b.delay_samples;
}

void FlowRecorder::out_of_order(SimTime now) { ++at(now).out_of_order; }

void FlowRecorder::retransmit(SimTime now, bool timeout) {
  auto& b = at(now);
  if (timeout)
    ++b.retrans_timeout;
  else
    ++b.retrans_gap;
}

FlowBucket FlowRecorder::bucket(std::size_t i) const {
  return i < buckets_.size() ? buckets_[i] : FlowBucket{};
}

FlowBucket FlowRecorder::total(SimTime from, SimTime to) const {
  FlowBucket sum;
  const auto first = static_cast<std::size_t>(std::max<SimTime>(from, 0) / bucket_);
  const auto last = static_cast<std::size_t>((to + bucket_ - 1) / bucket_);
  for (auto i = first; i < std::min(last, buckets_.size()); ++i) {
    const auto& b = buckets_[i];
    for (const auto& [p, n] : b.bytes_by_path) sum.bytes_by_path[p] += n;
    sum.bytes += b.bytes;
    sum.packets += b.packets;
    sum.delay_sum_ms += b.delay_sum_ms;
    sum.delay_samples += b.delay_samples;
    sum.out_of_order += b.out_of_order;
    sum.retrans_gap += b.retrans_gap;
    sum.retrans_timeout += b.retrans_timeout;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// TcpSender

std::uint64_t TcpSender::data_end() const {
  return cfg_.bytes == 0 ? UINT64_MAX : data_start() + cfg_.bytes;
}

void TcpSender::start() {
  host_.schedule(cfg_.start, [this] { send_syn(); });
}

void TcpSender::send_syn() {
  if (established_) return;
  SimPacket p;
  p.uid = host_.next_uid();
  p.src = cfg_.local;
  p.dst = cfg_.remote;
  p.proto = Proto::Tcp;
  p.seq = cfg_.iss;
  p.tcp_flags = tcp_flag::kSyn;
  p.created_at = host_.now();
  p.flow = cfg_.flow;
  host_.send(std::move(p));
  const SimTime retry = rto_;
  rto_ = std::min(rto_ * 2, kMaxRto);
  host_.schedule(host_.now() + retry, [this] { send_syn(); });
}

void TcpSender::on_packet(const SimPacket& pkt) {
  if (pkt.proto != Proto::Tcp || !(pkt.tcp_flags & tcp_flag::kAck)) return;
  if (!established_) {
    if (!(pkt.tcp_flags & tcp_flag::kSyn) || pkt.ack != cfg_.iss + 1) return;
    established_ = true;
    rto_ = kInitialRto;
    snd_una_ = snd_nxt_ = max_sent_ = data_start();
    SimPacket ack;
    ack.uid = host_.next_uid();
    ack.src = cfg_.local;
    ack.dst = cfg_.remote;
    ack.proto = Proto::Tcp;
    ack.seq = static_cast<std::uint32_t>(snd_nxt_);
    ack.ack = pkt.seq + 1;
    ack.tcp_flags = tcp_flag::kAck;
    ack.created_at = host_.now();
    ack.flow = cfg_.flow;
    host_.send(std::move(ack));
    pump();
    return;
  }
  if (pkt.tcp_flags & tcp_flag::kSyn) return;
  // Widen the 32-bit ack relative to snd_una.
  const auto delta = static_cast<std::int32_t>(pkt.ack - static_cast<std::uint32_t>(snd_una_));
  if (delta < 0) return;
  const std::uint64_t ack = snd_una_ + static_cast<std::uint32_t>(delta);
  if (ack > max_sent_) return;
  on_ack(ack);
}

void TcpSender::on_ack(std::uint64_t ack) {
  const SimTime now = host_.now();
  if (ack > snd_una_) {
    if (timed_ && ack >= timed_->first) {
      const double sample = static_cast<double>(now - timed_->second);
      if (!srtt_) {
        srtt_ = sample;
        rttvar_ = sample / 2;
      } else {
        rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(*srtt_ - sample);
        srtt_ = 0.875 * *srtt_ + 0.125 * sample;
      }
      timed_.reset();
    }
    if (srtt_)
      rto_ = std::clamp(static_cast<SimTime>(*srtt_ + 4 * rttvar_), kMinRto, kMaxRto);
    snd_una_ = ack;
    if (snd_nxt_ < snd_una_) snd_nxt_ = snd_una_;
    dupacks_ = 0;
    if (recovering_) {
      if (ack >= recover_)
        recovering_ = false;
      else
        send_segment(snd_una_, true, false);
    }
    if (snd_una_ < snd_nxt_)
      arm_rto();
    else
      ++rto_generation_;
    pump();
    return;
  }
  if (ack == snd_una_ && snd_nxt_ > snd_una_) {
    ++dupacks_;
    if (dupacks_ == 3 && !recovering_) {
      recovering_ = true;
      recover_ = snd_nxt_;
      send_segment(snd_una_, true, false);
    }
  }
}

void TcpSender::pump() {
  if (!established_) return;
  const auto window_bytes = std::uint64_t{cfg_.window} * cfg_.mss;
  while (snd_nxt_ - snd_una_ < window_bytes && snd_nxt_ < data_end()) {
    const bool retransmit = snd_nxt_ < max_sent_;
    if (!retransmit && host_.now() >= cfg_.stop) break;
    if (!retransmit) after_timeout_ = false;
    const auto len = std::min<std::uint64_t>(cfg_.mss, data_end() - snd_nxt_);
    send_segment(snd_nxt_, retransmit, after_timeout_);
    snd_nxt_ += len;
  }
}

void TcpSender::send_segment(std::uint64_t seq, bool retransmit, bool timeout) {
  const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(cfg_.mss, data_end() - seq));
  SimPacket p;
  p.uid = host_.next_uid();
  p.src = cfg_.local;
  p.dst = cfg_.remote;
  p.proto = Proto::Tcp;
  p.seq = static_cast<std::uint32_t>(seq);
  p.tcp_flags = tcp_flag::kAck;
  p.payload_len = len;
  p.digest = payload_digest(cfg_.flow, seq);
  p.created_at = host_.now();
  p.flow = cfg_.flow;
  if (retransmit) {
    timed_.reset();
    rec_.retransmit(host_.now(), timeout);
    if (timeout)
      ++timeout_retx_;
    else
      ++gap_retx_;
  } else if (!timed_) {
    timed_ = {seq + len, host_.now()};
  }
  max_sent_ = std::max(max_sent_, seq + len);
  const bool idle = snd_una_ == snd_nxt_;
  host_.send(std::move(p));
  if (idle) arm_rto();
}

void TcpSender::arm_rto() {
  const auto gen = ++rto_generation_;
  host_.schedule(host_.now() + rto_, [this, gen] { on_rto(gen); });
}

void TcpSender::on_rto(std::uint64_t generation) {
  if (generation != rto_generation_ || snd_una_ >= max_sent_) return;
  rto_ = std::min(rto_ * 2, kMaxRto);
  after_timeout_ = true;
  recovering_ = false;
  dupacks_ = 0;
  snd_nxt_ = snd_una_;
  timed_.reset();
  pump();
  arm_rto();
}

// ---------------------------------------------------------------------------
// TcpReceiver

void TcpReceiver::send_ack(std::uint8_t flags) {
  SimPacket a;
  a.uid = host_.next_uid();
  a.src = local_;
  a.dst = *remote_;
  a.proto = Proto::Tcp;
  a.seq = 1;
  a.ack = rcv_nxt_;
  a.tcp_flags = flags;
  a.created_at = host_.now();
  a.flow = flow_;
  host_.send(std::move(a));
}

void TcpReceiver::on_packet(const SimPacket& pkt) {
  if (pkt.proto != Proto::Tcp) return;
  if ((pkt.tcp_flags & (tcp_flag::kSyn | tcp_flag::kAck)) == tcp_flag::kSyn) {
    if (!remote_) {
      remote_ = pkt.src;
      irs_ = pkt.seq;
      rcv_nxt_ = pkt.seq + 1;
    }
    if (pkt.seq == irs_) {
      SimPacket sa;
      sa.uid = host_.next_uid();
      sa.src = local_;
      sa.dst = *remote_;
      sa.proto = Proto::Tcp;
      sa.seq = 0;
      sa.ack = irs_ + 1;
      sa.tcp_flags = tcp_flag::kSyn | tcp_flag::kAck;
      sa.created_at = host_.now();
      sa.flow = flow_;
      host_.send(std::move(sa));
    }
    return;
  }
  if (!remote_ || pkt.payload_len == 0) return;

  const SimTime now = host_.now();
  if (pkt.seq == rcv_nxt_) {
    rec_.goodput(now, pkt.via_path, pkt.payload_len);
    delivered_ += pkt.payload_len;
    rcv_nxt_ += pkt.payload_len;
    for (auto it = ooo_segments_.begin(); it != ooo_segments_.end();) {
      if (it->first == rcv_nxt_) {
        rec_.goodput(now, it->second.second, it->second.first);
        delivered_ += it->second.first;
        rcv_nxt_ += it->second.first;
        it = ooo_segments_.erase(it);
      } else if (seq_lt(it->first, rcv_nxt_)) {
        it = ooo_segments_.erase(it);
      } else {
        ++it;
      }
    }
  } else if (seq_lt(rcv_nxt_, pkt.seq)) {
    ++ooo_;
    rec_.out_of_order(now);
    ooo_segments_.try_emplace(pkt.seq, pkt.payload_len, pkt.via_path);
  }
  send_ack(tcp_flag::kAck);
}

// ---------------------------------------------------------------------------
// CBR

SimTime CbrSource::interval() const {
  const double us = cfg_.size * 8.0 / (cfg_.rate_kbps * 1000.0) * 1e6;
  return std::max<SimTime>(1, static_cast<SimTime>(std::llround(us)));
}

void CbrSource::start() {
  host_.schedule(cfg_.start, [this] { emit(); });
}

void CbrSource::emit() {
  const SimTime now = host_.now();
  if (now >= cfg_.stop) return;
  SimPacket p;
  p.uid = host_.next_uid();
  p.src = cfg_.local;
  p.dst = cfg_.remote;
  p.proto = Proto::Udp;
  p.seq = seq_;
  p.payload_len = cfg_.size;
  p.digest = payload_digest(cfg_.flow, seq_);
  p.created_at = now;
  p.flow = cfg_.flow;
  ++seq_;
  host_.send(std::move(p));
  host_.schedule(now + interval(), [this] { emit(); });
}

void CbrSink::on_packet(const SimPacket& pkt) {
  if (pkt.proto != Proto::Udp) return;
  const SimTime now = host_.now();
  ++received_;
  rec_.goodput(now, pkt.via_path, pkt.payload_len);
  rec_.delay(now, static_cast<double>(now - pkt.created_at) / kUsPerMs);
  if (highest_ && pkt.seq < *highest_) {
    ++ooo_;
    rec_.out_of_order(now);
  } else {
    highest_ = pkt.seq;
  }
  if (!echo_) return;
  SimPacket r;
  r.uid = host_.next_uid();
  r.src = local_;
  r.dst = pkt.src;
  r.proto = Proto::Udp;
  r.seq = pkt.seq;
  r.payload_len = kEchoSize;
  r.created_at = now;
  r.flow = flow_;
  host_.send(std::move(r));
}

}  // namespace mpip
