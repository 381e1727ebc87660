// Copyright 2026 The voipqos Authors
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

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "voipqos/aqm.hpp"
#include "voipqos/fec.hpp"
#include "voipqos/metrics.hpp"
#include "voipqos/sim_time.hpp"

namespace voipqos::netsim {

enum class FlowId : std::uint32_t {};

constexpr std::uint32_t index_of(FlowId id) { return static_cast<std::uint32_t>(id); }

struct LinkConfig {
  double latency_ms = 0.0;
  double loss_rate = 0.0;
  double capacity_kbps = 2048.0;

  void validate() const;
  friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

struct BestEffort {
  friend bool operator==(const BestEffort&, const BestEffort&) = default;
};
/// Strict-priority service above background traffic, no policing.
struct ControlledLoad {
  friend bool operator==(const ControlledLoad&, const ControlledLoad&) = default;
};
/// Token-bucket reservation. Conforming packets share the priority queue;
/// non-conforming packets are demoted to best effort when the best-effort
/// queue is empty and dropped by the policer otherwise.
struct Guaranteed {
  double reserved_kbps = 26.0;
  int bucket_depth_pkts = 1;
  friend bool operator==(const Guaranteed&, const Guaranteed&) = default;
};

using ServiceClass = std::variant<BestEffort, ControlledLoad, Guaranteed>;

std::string_view service_name(const ServiceClass& s);

struct MediaFlowConfig {
  double rate_kbps = 26.0;
  double packet_interval_ms = 20.0;
  int priority = 1;
  /// Sender timing jitter: each packet leaves U[0, jitter_ms) after its slot.
  double jitter_ms = 2.0;
  ServiceClass service = BestEffort{};
  std::optional<FecConfig> fec;
  SimTime start{};
  std::optional<SimTime> stop;

  int packet_bytes() const;
  void validate(double link_capacity_kbps) const;
};

struct CbrSource {
  double rate_kbps = 0.0;
  int packet_bytes = 100;
  friend bool operator==(const CbrSource&, const CbrSource&) = default;
};

/// On/off source: every period (uniform in period_ms +/- period_jitter_ms) it
/// emits a burst of `burst_ms` at `rate_kbps`.
struct BurstSource {
  double rate_kbps = 0.0;
  double burst_ms = 0.0;
  double period_ms = 1000.0;
  double period_jitter_ms = 0.0;
  int packet_bytes = 100;
  double start_ms = 0.0;
  friend bool operator==(const BurstSource&, const BurstSource&) = default;
};

using BackgroundConfig = std::variant<CbrSource, BurstSource>;

struct SetLatency {
  double latency_ms = 0.0;
  friend bool operator==(const SetLatency&, const SetLatency&) = default;
};
struct SetLossRate {
  double loss_rate = 0.0;
  friend bool operator==(const SetLossRate&, const SetLossRate&) = default;
};
struct SetBufferSize {
  int capacity_pkts = 0;
  friend bool operator==(const SetBufferSize&, const SetBufferSize&) = default;
};
/// Targets the first CBR background source unless `source` names another.
struct SetBackgroundRate {
  double rate_kbps = 0.0;
  std::optional<std::uint32_t> source;
  friend bool operator==(const SetBackgroundRate&, const SetBackgroundRate&) = default;
};

using ChangeKind = std::variant<SetLatency, SetLossRate, SetBufferSize, SetBackgroundRate>;

struct NetworkChange {
  SimTime at{};
  ChangeKind change;

  std::string describe() const;
  friend bool operator==(const NetworkChange&, const NetworkChange&) = default;
};

struct WorldConfig {
  LinkConfig link;
  QueueConfig queue;
  std::vector<BackgroundConfig> background;
  std::vector<NetworkChange> timeline;
};

enum class PacketEvent : std::uint8_t { Sent, Delivered, DroppedLink, DroppedQueue, DroppedPolicer, Recovered };

std::string_view to_string(PacketEvent e);

struct TraceRecord {
  SimTime time{};
  FlowId flow{};
  PacketEvent event = PacketEvent::Sent;
  /// -1 when the event carries no delay.
  std::int64_t delay_ns = -1;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Per-flow packet counters. Includes FEC parity packets; `recovered`
/// counts data packets rebuilt from parity (they also appear as drops).
struct FlowCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_link = 0;
  std::uint64_t dropped_queue = 0;
  std::uint64_t dropped_policer = 0;
  std::uint64_t recovered = 0;

  std::uint64_t dropped() const { return dropped_link + dropped_queue + dropped_policer; }
  std::uint64_t in_flight() const { return sent - delivered - dropped(); }
};

enum class TraceScope : std::uint8_t { None, Media, All };

class SimWorld {
 public:
  SimWorld(WorldConfig config, std::uint64_t seed);

  SimTime now() const { return clock_; }
  std::uint64_t seed() const { return seed_; }

  /// Registers a media flow; the first packet leaves at cfg.start.
  FlowId add_media_flow(MediaFlowConfig cfg);
  /// Ends a media flow now: no further packets are emitted, pending FEC
  /// blocks are flushed.
  void stop_media_flow(FlowId id);

  std::size_t media_flow_count() const { return media_.size(); }
  const MediaFlowConfig& media_config(FlowId id) const;

  /// Processes every event with timestamp <= until in (time, insertion)
  /// order, then sets the clock to `until`.
  void advance(SimTime until);

  /// Applies a change immediately and queues a network notification for
  /// the controller. Shrinking the buffer below occupancy drops the excess.
  void apply_network_change(const ChangeKind& change);

  /// Notifications of network changes fired since the last call.
  std::vector<NetworkChange> take_fired_changes();

  // Mechanism configuration, used by QoS actions. These do not generate
  // network notifications.
  void set_queue_capacity(int capacity_pkts);
  void set_discipline(Discipline d);
  /// Throws AdmissionRefused when the total reservation would exceed link
  /// capacity.
  void configure_service_class(FlowId id, ServiceClass service);
  void set_fec(FlowId id, std::optional<FecConfig> fec);

  const LinkConfig& link() const { return cfg_.link; }
  const QueueConfig& queue() const { return cfg_.queue; }
  const std::vector<BackgroundConfig>& background() const { return cfg_.background; }

  double reserved_kbps() const;
  double reservation_headroom_kbps() const { return cfg_.link.capacity_kbps - reserved_kbps(); }

  std::size_t best_effort_occupancy() const { return be_queue_.size(); }
  std::size_t priority_occupancy() const { return prio_queue_.size(); }
  /// Packets on the wire: in service plus propagating.
  std::size_t in_transit() const { return (link_busy_ ? 1u : 0u) + propagating_; }
  const RedState& red_state() const { return red_; }

  const FlowCounters& counters(FlowId id) const;
  /// Counters summed over every background source.
  FlowCounters background_counters() const;

  /// Delay/loss/MOS of a media flow's data packets since the previous call.
  /// nullopt when nothing was delivered or dropped in the interval.
  std::optional<HeuristicSample> measure(FlowId id);

  void set_trace_scope(TraceScope scope) { trace_scope_ = scope; }
  const std::vector<TraceRecord>& trace() const { return trace_; }

  /// Fingerprint of the full event history (every processed packet event,
  /// media and background), for determinism checks.
  std::uint64_t history_hash() const { return history_hash_; }

 private:
  struct Packet {
    std::uint32_t flow = 0;  // media index, or background index when !media
    bool media = false;
    bool parity = false;
    std::uint32_t bytes = 0;
    int priority = 0;
    std::uint64_t seq = 0;
    std::uint64_t block = 0;
    SimTime sent{};
  };

  enum class EventType : std::uint8_t { MediaSend, BackgroundSend, BurstStart, ServiceDone, Deliver, Change };

  struct Event {
    SimTime time{};
    std::uint64_t order = 0;
    EventType type = EventType::MediaSend;
    std::uint32_t index = 0;
    std::uint64_t generation = 0;
    Packet packet{};

    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      return order > o.order;
    }
  };

  struct TokenBucket {
    double tokens_bytes = 0.0;
    SimTime last{};
  };

  struct MediaState {
    MediaFlowConfig cfg;
    FlowCounters counters;
    std::uint64_t next_slot = 0;
    std::uint64_t data_seq = 0;
    bool stopped = false;
    std::mt19937_64 loss_rng;
    std::mt19937_64 parity_loss_rng;
    std::mt19937_64 jitter_rng;
    TokenBucket bucket;
    FecDecoder decoder;
    std::uint64_t fec_block = 0;
    int fec_pos = 0;
    // Window accumulator for measure().
    std::vector<std::int64_t> window_delays;
    std::uint64_t window_delivered = 0;
    std::uint64_t window_dropped = 0;
    std::uint64_t window_recovered = 0;
    double last_delay_ms = 0.0;
  };

  struct BackgroundState {
    BackgroundConfig cfg;
    FlowCounters counters;
    std::uint64_t seq = 0;
    std::uint64_t generation = 0;
    SimTime burst_end{};
    std::mt19937_64 loss_rng;
    std::mt19937_64 burst_rng;
  };

  void push(Event e);
  void handle(const Event& e);
  void schedule_media_send(std::uint32_t idx);
  void on_media_send(std::uint32_t idx);
  void on_background_send(std::uint32_t idx, std::uint64_t generation);
  void on_burst_start(std::uint32_t idx);
  void on_service_done();
  void on_deliver(const Packet& p);
  void send_packet(Packet p, std::mt19937_64& loss_rng);
  void offer(const Packet& p);
  void offer_best_effort(const Packet& p);
  void start_service_if_idle();
  void record_drop(const Packet& p, PacketEvent kind);
  void note(const Packet& p, PacketEvent ev, std::int64_t delay_ns);
  void resolve_fec(const Packet& p, bool delivered, SimTime when);
  void trim_best_effort(std::size_t limit);
  FlowCounters& counters_of(const Packet& p);
  SimTime service_time(std::uint32_t bytes) const;
  SimTime typical_service() const { return service_time(100); }
  void restart_cbr(std::uint32_t idx);

  WorldConfig cfg_;
  std::uint64_t seed_;
  SimTime clock_{};
  std::uint64_t next_order_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;

  std::vector<MediaState> media_;
  std::vector<BackgroundState> bg_;

  std::deque<Packet> be_queue_;
  std::deque<Packet> prio_queue_;
  bool link_busy_ = false;
  std::size_t propagating_ = 0;
  Packet in_service_{};
  RedState red_;
  std::mt19937_64 red_rng_;

  std::vector<NetworkChange> fired_;
  TraceScope trace_scope_ = TraceScope::Media;
  std::vector<TraceRecord> trace_;
  std::uint64_t history_hash_ = 1469598103934665603ull;
};

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double uniform01(std::mt19937_64& rng);

/// Deterministic generator for (seed, stream, purpose).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose);

}  // namespace voipqos::netsim
