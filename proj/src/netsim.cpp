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

#include "voipqos/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "voipqos/error.hpp"
#include "voipqos/kernels.hpp"

namespace voipqos::netsim {

namespace {

constexpr std::uint64_t kNoBlock = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint32_t kBackgroundTraceBase = 1000;

enum Purpose : std::uint64_t {
  kMediaLoss = 1,
  kParityLoss = 2,
  kJitter = 3,
  kBackgroundLoss = 4,
  kBurst = 5,
  kRed = 6,
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::int64_t ms_to_ns(double ms) { return static_cast<std::int64_t>(std::llround(ms * 1e6)); }

}  // namespace

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

void LinkConfig::validate() const {
  if (!(latency_ms >= 0.0) || !std::isfinite(latency_ms)) throw InvalidInput("link.latency_ms must be >= 0");
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) throw InvalidInput("link.loss_rate must lie in [0, 1]");
  if (!(capacity_kbps > 0.0) || !std::isfinite(capacity_kbps)) throw InvalidInput("link.capacity_kbps must be > 0");
}

std::string_view service_name(const ServiceClass& s) {
  return std::visit(Overloaded{[](const BestEffort&) { return std::string_view("BestEffort"); },
                               [](const ControlledLoad&) { return std::string_view("ControlledLoad"); },
                               [](const Guaranteed&) { return std::string_view("Guaranteed"); }},
                    s);
}

int MediaFlowConfig::packet_bytes() const {
  return static_cast<int>(std::lround(rate_kbps * packet_interval_ms / 8.0));
}

void MediaFlowConfig::validate(double link_capacity_kbps) const {
  if (!(rate_kbps > 0.0)) throw InvalidInput("flow.rate_kbps must be > 0");
  if (!(packet_interval_ms > 0.0)) throw InvalidInput("flow.packet_interval_ms must be > 0");
  if (!(jitter_ms >= 0.0 && jitter_ms < packet_interval_ms)) {
    throw InvalidInput("flow.jitter_ms must lie in [0, packet_interval_ms)");
  }
  if (priority < 0) throw InvalidInput("flow.priority must be >= 0");
  if (packet_bytes() < 1) throw InvalidInput("flow: rate and interval give an empty packet");
  if (const auto* g = std::get_if<Guaranteed>(&service)) {
    if (!(g->reserved_kbps > 0.0) || g->reserved_kbps > link_capacity_kbps) {
      throw InvalidInput("flow: guaranteed reservation must lie in (0, link capacity]");
    }
    if (g->bucket_depth_pkts < 1) throw InvalidInput("flow: bucket_depth_pkts must be >= 1");
  }
  if (fec) fec->validate();
}

std::string NetworkChange::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const SetLatency& c) { os << "SetLatency " << c.latency_ms << " ms"; },
                        [&](const SetLossRate& c) { os << "SetLossRate " << c.loss_rate; },
                        [&](const SetBufferSize& c) { os << "SetBufferSize " << c.capacity_pkts << " pkts"; },
                        [&](const SetBackgroundRate& c) { os << "SetBackgroundRate " << c.rate_kbps << " kbps"; }},
             change);
  return os.str();
}

std::string_view to_string(PacketEvent e) {
  switch (e) {
    case PacketEvent::Sent:
      return "sent";
    case PacketEvent::Delivered:
      return "delivered";
    case PacketEvent::DroppedLink:
      return "dropped_link";
    case PacketEvent::DroppedQueue:
      return "dropped_queue";
    case PacketEvent::DroppedPolicer:
      return "dropped_policer";
    case PacketEvent::Recovered:
      return "recovered";
  }
  return "sent";
}

SimWorld::SimWorld(WorldConfig config, std::uint64_t seed)
    : cfg_(std::move(config)), seed_(seed), red_rng_(make_stream(seed, 0, kRed)) {
  cfg_.link.validate();
  cfg_.queue.validate();
  std::stable_sort(cfg_.timeline.begin(), cfg_.timeline.end(),
                   [](const NetworkChange& a, const NetworkChange& b) { return a.at < b.at; });

  for (std::uint32_t i = 0; i < cfg_.background.size(); ++i) {
    BackgroundState st;
    st.cfg = cfg_.background[i];
    st.loss_rng = make_stream(seed, kBackgroundTraceBase + i, kBackgroundLoss);
    st.burst_rng = make_stream(seed, kBackgroundTraceBase + i, kBurst);
    if (const auto* c = std::get_if<CbrSource>(&st.cfg)) {
      if (c->rate_kbps < 0.0 || c->packet_bytes < 1) throw InvalidInput("background cbr: invalid rate or size");
    } else if (const auto* b = std::get_if<BurstSource>(&st.cfg)) {
      if (b->rate_kbps < 0.0 || b->burst_ms < 0.0 || !(b->period_ms > 0.0) || b->period_jitter_ms < 0.0 ||
          b->period_jitter_ms >= b->period_ms || b->packet_bytes < 1) {
        throw InvalidInput("background burst: invalid parameters");
      }
    }
    bg_.push_back(std::move(st));
  }
  for (std::uint32_t i = 0; i < bg_.size(); ++i) {
    if (const auto* c = std::get_if<CbrSource>(&bg_[i].cfg)) {
      if (c->rate_kbps > 0.0) push({SimTime{}, 0, EventType::BackgroundSend, i, bg_[i].generation, {}});
    } else if (const auto* b = std::get_if<BurstSource>(&bg_[i].cfg)) {
      push({SimTime::from_ms(b->start_ms), 0, EventType::BurstStart, i, 0, {}});
    }
  }
  for (std::uint32_t i = 0; i < cfg_.timeline.size(); ++i) {
    push({cfg_.timeline[i].at, 0, EventType::Change, i, 0, {}});
  }
}

FlowId SimWorld::add_media_flow(MediaFlowConfig cfg) {
  cfg.validate(cfg_.link.capacity_kbps);
  const auto idx = static_cast<std::uint32_t>(media_.size());
  MediaState st;
  st.cfg = std::move(cfg);
  st.loss_rng = make_stream(seed_, idx, kMediaLoss);
  st.parity_loss_rng = make_stream(seed_, idx, kParityLoss);
  st.jitter_rng = make_stream(seed_, idx, kJitter);
  if (const auto* g = std::get_if<Guaranteed>(&st.cfg.service)) {
    if (reserved_kbps() + g->reserved_kbps > cfg_.link.capacity_kbps + 1e-9) {
      throw AdmissionRefused("guaranteed reservation exceeds link capacity");
    }
    st.bucket.tokens_bytes = g->bucket_depth_pkts * st.cfg.packet_bytes();
    st.bucket.last = st.cfg.start;
  }
  media_.push_back(std::move(st));
  if (media_.back().cfg.start < clock_) media_.back().cfg.start = clock_;
  schedule_media_send(idx);
  return FlowId{idx};
}

void SimWorld::stop_media_flow(FlowId id) {
  auto& st = media_.at(index_of(id));
  if (st.stopped) return;
  st.stopped = true;
  st.cfg.stop = clock_;
  if (st.fec_pos > 0) st.decoder.abandon_parity(st.fec_block);
  st.fec_pos = 0;
}

const MediaFlowConfig& SimWorld::media_config(FlowId id) const {
  if (index_of(id) >= media_.size()) throw NotFound("unknown flow");
  return media_[index_of(id)].cfg;
}

void SimWorld::push(Event e) {
  e.order = next_order_++;
  events_.push(std::move(e));
}

void SimWorld::advance(SimTime until) {
  while (!events_.empty() && events_.top().time <= until) {
    Event e = events_.top();
    events_.pop();
    clock_ = e.time;
    handle(e);
  }
  if (until > clock_) clock_ = until;
}

void SimWorld::handle(const Event& e) {
  switch (e.type) {
    case EventType::MediaSend:
      on_media_send(e.index);
      break;
    case EventType::BackgroundSend:
      on_background_send(e.index, e.generation);
      break;
    case EventType::BurstStart:
      on_burst_start(e.index);
      break;
    case EventType::ServiceDone:
      on_service_done();
      break;
    case EventType::Deliver:
      on_deliver(e.packet);
      break;
    case EventType::Change:
      apply_network_change(cfg_.timeline[e.index].change);
      break;
  }
}

void SimWorld::schedule_media_send(std::uint32_t idx) {
  MediaState& st = media_[idx];
  if (st.stopped) return;
  const std::int64_t interval = ms_to_ns(st.cfg.packet_interval_ms);
  std::int64_t t = st.cfg.start.ns() + static_cast<std::int64_t>(st.next_slot) * interval;
  if (st.cfg.jitter_ms > 0.0) {
    t += static_cast<std::int64_t>(uniform01(st.jitter_rng) * static_cast<double>(ms_to_ns(st.cfg.jitter_ms)));
  }
  const SimTime when = SimTime::from_ns(t);
  if (st.cfg.stop && when >= *st.cfg.stop) return;
  push({when, 0, EventType::MediaSend, idx, 0, {}});
}

void SimWorld::on_media_send(std::uint32_t idx) {
  MediaState& st = media_[idx];
  if (st.stopped) return;
  if (st.cfg.stop && clock_ >= *st.cfg.stop) {
    stop_media_flow(FlowId{idx});
    return;
  }
  Packet p;
  p.flow = idx;
  p.media = true;
  p.bytes = static_cast<std::uint32_t>(st.cfg.packet_bytes());
  p.priority = st.cfg.priority;
  p.seq = st.data_seq++;
  p.sent = clock_;
  p.block = kNoBlock;
  std::optional<std::uint64_t> parity_block;
  if (st.cfg.fec) {
    p.block = st.fec_block;
    st.decoder.on_data_sent(st.fec_block, st.cfg.fec->block_k);
    if (++st.fec_pos == st.cfg.fec->block_k) {
      parity_block = st.fec_block;
      st.decoder.on_parity_sent(st.fec_block);
      ++st.fec_block;
      st.fec_pos = 0;
    }
  }
  send_packet(p, st.loss_rng);
  if (parity_block) {
    Packet q = p;
    q.parity = true;
    q.seq = *parity_block;
    q.block = *parity_block;
    send_packet(q, media_[idx].parity_loss_rng);
  }
  ++media_[idx].next_slot;
  schedule_media_send(idx);
}

void SimWorld::on_background_send(std::uint32_t idx, std::uint64_t generation) {
  BackgroundState& st = bg_[idx];
  if (generation != st.generation) return;
  Packet p;
  p.flow = idx;
  p.media = false;
  p.priority = 0;
  p.seq = st.seq++;
  p.sent = clock_;
  p.block = kNoBlock;
  double rate = 0.0;
  if (const auto* c = std::get_if<CbrSource>(&st.cfg)) {
    p.bytes = static_cast<std::uint32_t>(c->packet_bytes);
    rate = c->rate_kbps;
  } else {
    const auto& b = std::get<BurstSource>(st.cfg);
    p.bytes = static_cast<std::uint32_t>(b.packet_bytes);
    rate = b.rate_kbps;
  }
  if (rate <= 0.0) return;
  send_packet(p, bg_[idx].loss_rng);

  const SimTime next = clock_ + SimTime::from_ns(ms_to_ns(p.bytes * 8.0 / rate));
  BackgroundState& again = bg_[idx];
  if (std::holds_alternative<BurstSource>(again.cfg) && next >= again.burst_end) return;
  push({next, 0, EventType::BackgroundSend, idx, generation, {}});
}

void SimWorld::on_burst_start(std::uint32_t idx) {
  BackgroundState& st = bg_[idx];
  const auto& b = std::get<BurstSource>(st.cfg);
  st.burst_end = clock_ + SimTime::from_ms(b.burst_ms);
  ++st.generation;
  if (b.rate_kbps > 0.0 && b.burst_ms > 0.0) push({clock_, 0, EventType::BackgroundSend, idx, st.generation, {}});
  const double jitter = b.period_jitter_ms * (2.0 * uniform01(st.burst_rng) - 1.0);
  push({clock_ + SimTime::from_ms(b.period_ms + jitter), 0, EventType::BurstStart, idx, 0, {}});
}

void SimWorld::send_packet(Packet p, std::mt19937_64& loss_rng) {
  counters_of(p).sent += 1;
  note(p, PacketEvent::Sent, -1);
  const double u = uniform01(loss_rng);
  if (u < cfg_.link.loss_rate) {
    record_drop(p, PacketEvent::DroppedLink);
    return;
  }
  offer(p);
}

void SimWorld::offer(const Packet& p) {
  if (p.media) {
    MediaState& st = media_[p.flow];
    if (std::holds_alternative<ControlledLoad>(st.cfg.service)) {
      if (prio_queue_.size() >= static_cast<std::size_t>(cfg_.queue.capacity_pkts)) {
        record_drop(p, PacketEvent::DroppedQueue);
      } else {
        prio_queue_.push_back(p);
      }
      start_service_if_idle();
      return;
    }
    if (const auto* g = std::get_if<Guaranteed>(&st.cfg.service)) {
      const double depth = static_cast<double>(g->bucket_depth_pkts) * st.cfg.packet_bytes();
      const double elapsed_ms = (clock_ - st.bucket.last).ms();
      st.bucket.tokens_bytes = std::min(depth, st.bucket.tokens_bytes + elapsed_ms * g->reserved_kbps / 8.0);
      st.bucket.last = clock_;
      if (st.bucket.tokens_bytes + 1e-9 >= p.bytes) {
        st.bucket.tokens_bytes -= p.bytes;
        if (prio_queue_.size() >= static_cast<std::size_t>(cfg_.queue.capacity_pkts)) {
          record_drop(p, PacketEvent::DroppedQueue);
        } else {
          prio_queue_.push_back(p);
        }
        start_service_if_idle();
        return;
      }
      if (!be_queue_.empty()) {
        record_drop(p, PacketEvent::DroppedPolicer);
        return;
      }
    }
  }
  offer_best_effort(p);
  start_service_if_idle();
}

void SimWorld::offer_best_effort(const Packet& p) {
  const std::size_t occ = be_queue_.size();
  const auto cap = static_cast<std::size_t>(cfg_.queue.capacity_pkts);
  const RedParams* params = nullptr;
  double weight = 0.0;
  if (const auto* r = std::get_if<Red>(&cfg_.queue.discipline)) {
    params = &r->params;
    weight = r->params.ewma_weight;
  } else if (const auto* w = std::get_if<Wred>(&cfg_.queue.discipline)) {
    const auto cls = std::min<std::size_t>(static_cast<std::size_t>(p.priority), w->classes.size() - 1);
    params = &w->classes[cls];
    weight = w->classes.front().ewma_weight;
  }
  if (params == nullptr) {
    if (occ >= cap) {
      record_drop(p, PacketEvent::DroppedQueue);
    } else {
      be_queue_.push_back(p);
    }
    return;
  }
  red_update_average(red_, weight, occ, clock_, typical_service());
  const double u = uniform01(red_rng_);
  const OfferResult res = red_decide(*params, red_.avg, occ, cfg_.queue.capacity_pkts, u);
  if (!res.enqueued) {
    record_drop(p, PacketEvent::DroppedQueue);
  } else {
    be_queue_.push_back(p);
  }
}

void SimWorld::start_service_if_idle() {
  if (link_busy_) return;
  if (!prio_queue_.empty()) {
    in_service_ = prio_queue_.front();
    prio_queue_.pop_front();
  } else if (!be_queue_.empty()) {
    in_service_ = be_queue_.front();
    be_queue_.pop_front();
    if (be_queue_.empty()) {
      red_.idle = true;
      red_.idle_since = clock_;
    }
  } else {
    return;
  }
  link_busy_ = true;
  push({clock_ + service_time(in_service_.bytes), 0, EventType::ServiceDone, 0, 0, {}});
}

void SimWorld::on_service_done() {
  link_busy_ = false;
  ++propagating_;
  push({clock_ + SimTime::from_ms(cfg_.link.latency_ms), 0, EventType::Deliver, 0, 0, in_service_});
  start_service_if_idle();
}

void SimWorld::on_deliver(const Packet& p) {
  --propagating_;
  counters_of(p).delivered += 1;
  const std::int64_t delay = (clock_ - p.sent).ns();
  note(p, PacketEvent::Delivered, delay);
  if (p.media && !p.parity) {
    MediaState& st = media_[p.flow];
    st.window_delays.push_back(delay);
    st.window_delivered += 1;
  }
  if (p.media && p.block != kNoBlock) resolve_fec(p, true, clock_);
}

void SimWorld::record_drop(const Packet& p, PacketEvent kind) {
  FlowCounters& c = counters_of(p);
  switch (kind) {
    case PacketEvent::DroppedLink:
      c.dropped_link += 1;
      break;
    case PacketEvent::DroppedQueue:
      c.dropped_queue += 1;
      break;
    case PacketEvent::DroppedPolicer:
      c.dropped_policer += 1;
      break;
    default:
      break;
  }
  note(p, kind, -1);
  if (p.media && !p.parity) media_[p.flow].window_dropped += 1;
  if (p.media && p.block != kNoBlock) resolve_fec(p, false, clock_);
}

void SimWorld::resolve_fec(const Packet& p, bool delivered, SimTime when) {
  MediaState& st = media_[p.flow];
  for (const auto& r : st.decoder.on_resolved(p.block, p.parity, p.seq, p.sent, delivered, when)) {
    st.counters.recovered += 1;
    const std::int64_t delay = (r.at - r.sent).ns();
    Packet rec = p;
    rec.parity = false;
    rec.seq = r.seq;
    note(rec, PacketEvent::Recovered, delay);
    st.window_recovered += 1;
    st.window_delays.push_back(delay);
  }
}

void SimWorld::note(const Packet& p, PacketEvent ev, std::int64_t delay_ns) {
  // FNV-1a over the full event history.
  auto mix = [this](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      history_hash_ ^= (v >> (8 * i)) & 0xffu;
      history_hash_ *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(clock_.ns()));
  mix((static_cast<std::uint64_t>(p.flow) << 8) | (p.media ? 1u : 0u) | (p.parity ? 2u : 0u) |
      (static_cast<std::uint64_t>(ev) << 4));
  mix(p.seq);

  if (trace_scope_ == TraceScope::None || p.parity) return;
  if (!p.media && trace_scope_ != TraceScope::All) return;
  const FlowId id{p.media ? p.flow : kBackgroundTraceBase + p.flow};
  trace_.push_back({clock_, id, ev, delay_ns});
}

void SimWorld::trim_best_effort(std::size_t limit) {
  while (be_queue_.size() > limit) {
    Packet p = be_queue_.back();
    be_queue_.pop_back();
    record_drop(p, PacketEvent::DroppedQueue);
  }
  while (prio_queue_.size() > limit) {
    Packet p = prio_queue_.back();
    prio_queue_.pop_back();
    record_drop(p, PacketEvent::DroppedQueue);
  }
}

FlowCounters& SimWorld::counters_of(const Packet& p) {
  return p.media ? media_[p.flow].counters : bg_[p.flow].counters;
}

SimTime SimWorld::service_time(std::uint32_t bytes) const {
  return SimTime::from_ns(ms_to_ns(bytes * 8.0 / cfg_.link.capacity_kbps));
}

void SimWorld::restart_cbr(std::uint32_t idx) {
  BackgroundState& st = bg_[idx];
  ++st.generation;
  const auto& c = std::get<CbrSource>(st.cfg);
  if (c.rate_kbps > 0.0) push({clock_, 0, EventType::BackgroundSend, idx, st.generation, {}});
}

void SimWorld::apply_network_change(const ChangeKind& change) {
  std::visit(Overloaded{[&](const SetLatency& c) {
                          LinkConfig l = cfg_.link;
                          l.latency_ms = c.latency_ms;
                          l.validate();
                          cfg_.link = l;
                        },
                        [&](const SetLossRate& c) {
                          LinkConfig l = cfg_.link;
                          l.loss_rate = c.loss_rate;
                          l.validate();
                          cfg_.link = l;
                        },
                        [&](const SetBufferSize& c) { set_queue_capacity(c.capacity_pkts); },
                        [&](const SetBackgroundRate& c) {
                          if (c.rate_kbps < 0.0) throw InvalidInput("background rate must be >= 0");
                          std::optional<std::uint32_t> target;
                          for (std::uint32_t i = 0; i < bg_.size(); ++i) {
                            if (!std::holds_alternative<CbrSource>(bg_[i].cfg)) continue;
                            if (!c.source || *c.source == i) {
                              target = i;
                              break;
                            }
                          }
                          if (!target) {
                            bg_.push_back(BackgroundState{});
                            target = static_cast<std::uint32_t>(bg_.size() - 1);
                            bg_.back().cfg = CbrSource{};
                            bg_.back().loss_rng = make_stream(seed_, kBackgroundTraceBase + *target, kBackgroundLoss);
                            bg_.back().burst_rng = make_stream(seed_, kBackgroundTraceBase + *target, kBurst);
                            cfg_.background.push_back(CbrSource{});
                          }
                          std::get<CbrSource>(bg_[*target].cfg).rate_kbps = c.rate_kbps;
                          cfg_.background[*target] = bg_[*target].cfg;
                          restart_cbr(*target);
                        }},
             change);
  fired_.push_back({clock_, change});
}

std::vector<NetworkChange> SimWorld::take_fired_changes() {
  std::vector<NetworkChange> out;
  out.swap(fired_);
  return out;
}

void SimWorld::set_queue_capacity(int capacity_pkts) {
  QueueConfig q = cfg_.queue;
  q.capacity_pkts = capacity_pkts;
  q.validate();
  cfg_.queue = q;
  trim_best_effort(static_cast<std::size_t>(capacity_pkts));
}

void SimWorld::set_discipline(Discipline d) {
  QueueConfig q = cfg_.queue;
  q.discipline = std::move(d);
  q.validate();
  cfg_.queue = std::move(q);
  red_ = RedState{};
  red_.idle = be_queue_.empty();
  red_.idle_since = clock_;
}

double SimWorld::reserved_kbps() const {
  double total = 0.0;
  for (const auto& m : media_) {
    if (m.stopped) continue;
    if (const auto* g = std::get_if<Guaranteed>(&m.cfg.service)) total += g->reserved_kbps;
  }
  return total;
}

void SimWorld::configure_service_class(FlowId id, ServiceClass service) {
  if (index_of(id) >= media_.size()) throw NotFound("unknown flow");
  MediaState& st = media_[index_of(id)];
  if (const auto* g = std::get_if<Guaranteed>(&service)) {
    if (!(g->reserved_kbps > 0.0) || g->bucket_depth_pkts < 1) throw InvalidInput("invalid guaranteed parameters");
    double others = reserved_kbps();
    if (const auto* cur = std::get_if<Guaranteed>(&st.cfg.service); cur != nullptr && !st.stopped) {
      others -= cur->reserved_kbps;
    }
    if (others + g->reserved_kbps > cfg_.link.capacity_kbps + 1e-9) {
      throw AdmissionRefused("reservation of " + std::to_string(g->reserved_kbps) + " kbps exceeds headroom " +
                             std::to_string(cfg_.link.capacity_kbps - others) + " kbps");
    }
    st.bucket.tokens_bytes = g->bucket_depth_pkts * st.cfg.packet_bytes();
    st.bucket.last = clock_;
  }
  st.cfg.service = service;
}

void SimWorld::set_fec(FlowId id, std::optional<FecConfig> fec) {
  if (index_of(id) >= media_.size()) throw NotFound("unknown flow");
  if (fec) fec->validate();
  MediaState& st = media_[index_of(id)];
  if (st.cfg.fec == fec) return;
  if (st.fec_pos > 0) st.decoder.abandon_parity(st.fec_block);
  if (st.fec_pos > 0) ++st.fec_block;
  st.fec_pos = 0;
  st.cfg.fec = fec;
}

const FlowCounters& SimWorld::counters(FlowId id) const {
  if (index_of(id) >= media_.size()) throw NotFound("unknown flow");
  return media_[index_of(id)].counters;
}

FlowCounters SimWorld::background_counters() const {
  FlowCounters sum;
  for (const auto& b : bg_) {
    sum.sent += b.counters.sent;
    sum.delivered += b.counters.delivered;
    sum.dropped_link += b.counters.dropped_link;
    sum.dropped_queue += b.counters.dropped_queue;
    sum.dropped_policer += b.counters.dropped_policer;
  }
  return sum;
}

std::optional<HeuristicSample> SimWorld::measure(FlowId id) {
  if (index_of(id) >= media_.size()) throw NotFound("unknown flow");
  MediaState& st = media_[index_of(id)];
  const std::uint64_t resolved = st.window_delivered + st.window_dropped;
  std::optional<HeuristicSample> out;
  if (resolved > 0) {
    double delay_ms = st.last_delay_ms;
    if (!st.window_delays.empty()) {
      const std::int64_t sum = kernels::sum_i64(st.window_delays);
      delay_ms = static_cast<double>(sum) / static_cast<double>(st.window_delays.size()) / 1e6;
      st.last_delay_ms = delay_ms;
    }
    const double lost = st.window_dropped > st.window_recovered
                            ? static_cast<double>(st.window_dropped - st.window_recovered)
                            : 0.0;
    out = make_sample(delay_ms, std::min(1.0, lost / static_cast<double>(resolved)));
  }
  st.window_delays.clear();
  st.window_delivered = 0;
  st.window_dropped = 0;
  st.window_recovered = 0;
  return out;
}

}  // namespace voipqos::netsim
