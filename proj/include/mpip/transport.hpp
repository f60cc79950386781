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

// Traffic generators standing in for iperf: a fixed-window in-order
// transport with cumulative acks, and a constant-bit-rate datagram source.

#ifndef MPIP_TRANSPORT_HPP
#define MPIP_TRANSPORT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mpip/packet.hpp"

namespace mpip {

/// Per-flow measurements, bucketed by sim-time.
struct FlowBucket {
  /// In-order payload bytes handed to the application, by sender path ID.
  std::map<std::uint8_t, std::uint64_t> bytes_by_path;
  std::uint64_t bytes = 0;
  std::uint64_t packets = 0;
  double delay_sum_ms = 0;
  std::uint64_t delay_samples = 0;
  std::uint64_t out_of_order = 0;
  std::uint64_t retrans_gap = 0;
  std::uint64_t retrans_timeout = 0;
};

class FlowRecorder {
 public:
  explicit FlowRecorder(SimTime bucket = ms(100)) : bucket_(bucket) {}

  void goodput(SimTime now, std::uint8_t path, std::uint64_t bytes);
  void delay(SimTime now, double delay_ms);
  void out_of_order(SimTime now);
  void retransmit(SimTime now, bool timeout);

  SimTime bucket_width() const { return bucket_; }
  const std::vector<FlowBucket>& buckets() const { return buckets_; }
  /// Bucket covering [i*width, (i+1)*width); empty when nothing was recorded.
  FlowBucket bucket(std::size_t i) const;
  /// Sum of the buckets covering [from, to).
  FlowBucket total(SimTime from, SimTime to) const;

 private:
  FlowBucket& at(SimTime now);

  SimTime bucket_;
  std::vector<FlowBucket> buckets_;
};

class AppHost {
 public:
  virtual ~AppHost() = default;
  virtual SimTime now() const = 0;
  virtual void send(SimPacket pkt) = 0;
  virtual void schedule(SimTime at, std::function<void()> fn) = 0;
  virtual std::uint64_t next_uid() = 0;
};

class App {
 public:
  virtual ~App() = default;
  virtual void start() {}
  virtual void on_packet(const SimPacket& pkt) = 0;
};

struct TcpConfig {
  Endpoint local;
  Endpoint remote;
  std::uint32_t window = 64;
  std::uint32_t mss = 1460;
  /// 0 sends until stop.
  std::uint64_t bytes = 0;
  SimTime start = 0;
  SimTime stop = kForever;
  std::uint32_t iss = 0;
  int flow = -1;
};

/// Sending side: SYN setup, fixed window of segments, fast retransmit on three
/// duplicate acks with partial-ack recovery, and go-back-N on timeout.
class TcpSender : public App {
 public:
  static constexpr SimTime kMinRto = ms(200);
  static constexpr SimTime kInitialRto = kUsPerSec;
  static constexpr SimTime kMaxRto = 60 * kUsPerSec;

  TcpSender(AppHost& host, FlowRecorder& rec, const TcpConfig& cfg)
      : host_(host), rec_(rec), cfg_(cfg) {}

  void start() override;
  void on_packet(const SimPacket& pkt) override;

  bool established() const { return established_; }
  std::uint64_t acked_bytes() const { return snd_una_ - data_start(); }
  std::uint64_t gap_retransmits() const { return gap_retx_; }
  std::uint64_t timeout_retransmits() const { return timeout_retx_; }

 private:
  std::uint64_t data_start() const { return std::uint64_t{cfg_.iss} + 1; }
  std::uint64_t data_end() const;
  void send_syn();
  void pump();
  void send_segment(std::uint64_t seq, bool retransmit, bool timeout);
  void arm_rto();
  void on_rto(std::uint64_t generation);
  void on_ack(std::uint64_t ack);

  AppHost& host_;
  FlowRecorder& rec_;
  TcpConfig cfg_;
  bool established_ = false;
  std::uint64_t snd_una_ = 0;
  std::uint64_t snd_nxt_ = 0;
  std::uint64_t max_sent_ = 0;
  int dupacks_ = 0;
  bool recovering_ = false;
  bool after_timeout_ = false;
  std::uint64_t recover_ = 0;
  SimTime rto_ = kInitialRto;
  std::optional<double> srtt_;
  double rttvar_ = 0;
  std::optional<std::pair<std::uint64_t, SimTime>> timed_;
  std::uint64_t rto_generation_ = 0;
  std::uint64_t gap_retx_ = 0;
  std::uint64_t timeout_retx_ = 0;
};

/// Receiving side: acks every segment cumulatively and keeps out-of-order
/// segments until the gap fills.
class TcpReceiver : public App {
 public:
  TcpReceiver(AppHost& host, FlowRecorder& rec, Endpoint local, int flow)
      : host_(host), rec_(rec), local_(local), flow_(flow) {}

  void on_packet(const SimPacket& pkt) override;

  std::uint64_t delivered_bytes() const { return delivered_; }
  std::uint64_t out_of_order() const { return ooo_; }

 private:
  void send_ack(std::uint8_t flags);

  AppHost& host_;
  FlowRecorder& rec_;
  Endpoint local_;
  int flow_;
  std::optional<Endpoint> remote_;
  std::uint32_t irs_ = 0;
  std::uint32_t rcv_nxt_ = 0;
  std::map<std::uint32_t, std::pair<std::uint32_t, std::uint8_t>> ooo_segments_;
  std::uint64_t delivered_ = 0;
  std::uint64_t ooo_ = 0;
};

struct CbrConfig {
  Endpoint local;
  Endpoint remote;
  double rate_kbps = 0;
  std::uint32_t size = 0;
  SimTime start = 0;
  SimTime stop = kForever;
  int flow = -1;
};

class CbrSource : public App {
 public:
  CbrSource(AppHost& host, const CbrConfig& cfg) : host_(host), cfg_(cfg) {}

  /// Spacing between datagrams: size * 8 / rate.
  SimTime interval() const;
  void start() override;
  void on_packet(const SimPacket&) override {}
  std::uint64_t sent() const { return seq_; }

 private:
  void emit();

  AppHost& host_;
  CbrConfig cfg_;
  std::uint32_t seq_ = 0;
};

class CbrSink : public App {
 public:
  static constexpr std::uint32_t kEchoSize = 32;

  CbrSink(AppHost& host, FlowRecorder& rec, Endpoint local, bool echo, int flow)
      : host_(host), rec_(rec), local_(local), echo_(echo), flow_(flow) {}

  void on_packet(const SimPacket& pkt) override;

  std::uint64_t received() const { return received_; }
  std::uint64_t out_of_order() const { return ooo_; }

 private:
  AppHost& host_;
  FlowRecorder& rec_;
  Endpoint local_;
  bool echo_;
  int flow_;
  std::optional<std::uint32_t> highest_;
  std::uint64_t received_ = 0;
  std::uint64_t ooo_ = 0;
};

/// Content digest of one transport payload unit.
std::uint64_t payload_digest(int flow, std::uint64_t seq);

}  // namespace mpip

#endif  // MPIP_TRANSPORT_HPP
