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

#include <cmath>

#include "doctest.h"
#include "voipqos/error.hpp"
#include "voipqos/netsim.hpp"

using namespace voipqos;
using namespace voipqos::netsim;

namespace {

WorldConfig plain(double latency, double loss = 0.0, double cap = 2048) {
  WorldConfig w;
  w.link = {latency, loss, cap};
  return w;
}

// Congested access link with periodic bursts.
WorldConfig bursty(int buffer) {
  WorldConfig w;
  w.link = {100, 0, 256};
  w.queue.capacity_pkts = buffer;
  w.background = {BurstSource{1024, 180, 900, 50, 100, 0}};
  return w;
}

HeuristicSample run_for(SimWorld& s, FlowId id, double seconds) {
  s.measure(id);
  s.advance(s.now() + SimTime::from_s(seconds));
  return *s.measure(id);
}

void check_conservation(const SimWorld& s, std::size_t flows) {
  std::uint64_t in_flight = s.background_counters().in_flight();
  for (std::uint32_t i = 0; i < flows; ++i) in_flight += s.counters(FlowId{i}).in_flight();
  CHECK(in_flight == s.in_transit() + s.best_effort_occupancy() + s.priority_occupancy());
}

}  // namespace

TEST_SUITE("netsim") {
  TEST_CASE("advance to now is a no-op") {
    SimWorld s(bursty(50), 4);
    s.add_media_flow({});
    s.advance(SimTime::from_s(3));
    const auto h = s.history_hash();
    const auto n = s.trace().size();
    s.advance(s.now());
    CHECK(s.history_hash() == h);
    CHECK(s.trace().size() == n);
  }

  TEST_CASE("uncongested delay is latency plus serialization") {
    SimWorld s(plain(100), 1);
    const auto id = s.add_media_flow({});
    const auto m = run_for(s, id, 30);
    const double serialization = 65 * 8 / 2048.0;
    CHECK(m.delay_ms == doctest::Approx(100 + serialization).epsilon(1e-6));
    CHECK(m.loss == 0.0);
  }

  TEST_CASE("configured loss is realized") {
    SimWorld s(plain(20, 0.30), 9);
    const auto id = s.add_media_flow({});
    CHECK(std::abs(run_for(s, id, 300).loss - 0.30) <= 0.015);

    SimWorld t(plain(20, 0.01), 9);
    const auto id2 = t.add_media_flow({});
    CHECK(std::abs(run_for(t, id2, 300).loss - 0.01) <= 0.004);
  }

  TEST_CASE("latency change shifts delay and notifies") {
    SimWorld s(plain(50), 2);
    const auto id = s.add_media_flow({});
    const double before = run_for(s, id, 10).delay_ms;
    s.apply_network_change(SetLatency{65});
    s.advance(s.now() + SimTime::from_s(1));
    const double after = run_for(s, id, 10).delay_ms;
    CHECK(after - before == doctest::Approx(15).epsilon(1e-6));
    const auto fired = s.take_fired_changes();
    REQUIRE(fired.size() == 1);
    CHECK(std::holds_alternative<SetLatency>(fired[0].change));
    CHECK(s.take_fired_changes().empty());
  }

  TEST_CASE("timeline changes fire at their time") {
    auto w = plain(50);
    w.timeline = {{SimTime::from_s(2), SetLossRate{0.1}}};
    SimWorld s(std::move(w), 1);
    s.advance(SimTime::from_s(1.9));
    CHECK(s.take_fired_changes().empty());
    s.advance(SimTime::from_s(2));
    CHECK(s.take_fired_changes().size() == 1);
    CHECK(s.link().loss_rate == 0.1);
  }

  TEST_CASE("buffer resize") {
    SimWorld s(bursty(200), 3);
    s.add_media_flow({});
    s.advance(SimTime::from_s(5));
    const auto h = s.history_hash();
    s.apply_network_change(SetBufferSize{200});
    CHECK(s.history_hash() == h);

    // Run until a burst has built a backlog, then shrink.
    std::uint64_t dropped_before = 0;
    for (int i = 0; i < 2000 && s.best_effort_occupancy() <= 20; ++i) s.advance(s.now() + SimTime::from_ms(5));
    REQUIRE(s.best_effort_occupancy() > 20);
    dropped_before = s.background_counters().dropped_queue + s.counters(FlowId{0}).dropped_queue;
    s.apply_network_change(SetBufferSize{20});
    CHECK(s.best_effort_occupancy() <= 20);
    CHECK(s.background_counters().dropped_queue + s.counters(FlowId{0}).dropped_queue > dropped_before);
    check_conservation(s, 1);
  }

  TEST_CASE("guaranteed flow on idle link is never policed") {
    SimWorld s(plain(20), 5);
    const auto id = s.add_media_flow({});
    s.configure_service_class(id, Guaranteed{26, 1});
    s.advance(SimTime::from_s(60));
    CHECK(s.counters(id).dropped_policer == 0);
    CHECK(s.counters(id).delivered > 2900);
  }

  TEST_CASE("reservations beyond capacity are refused") {
    SimWorld s(plain(20, 0, 1000), 5);
    const auto a = s.add_media_flow({});
    const auto b = s.add_media_flow({});
    s.configure_service_class(a, Guaranteed{600, 1});
    CHECK_THROWS_AS(s.configure_service_class(b, Guaranteed{600, 1}), AdmissionRefused);
    CHECK(s.reserved_kbps() == 600);
    s.configure_service_class(a, BestEffort{});
    CHECK_NOTHROW(s.configure_service_class(b, Guaranteed{600, 1}));
  }

  TEST_CASE("same seed gives same history") {
    auto go = [](std::uint64_t seed) {
      SimWorld s(bursty(60), seed);
      s.add_media_flow({});
      s.advance(SimTime::from_s(20));
      return std::pair{s.history_hash(), s.trace()};
    };
    const auto a = go(11), b = go(11), c = go(12);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    CHECK(a.first != c.first);
  }

  TEST_CASE("packets are conserved") {
    auto w = bursty(30);
    w.queue.discipline = Red{{10, 25, 0.1, 0.02}};
    SimWorld s(std::move(w), 8);
    s.add_media_flow({});
    MediaFlowConfig m2;
    m2.fec = FecConfig{};
    const auto id2 = s.add_media_flow(m2);
    s.configure_service_class(id2, ControlledLoad{});
    for (int i = 1; i <= 400; ++i) {
      s.advance(SimTime::from_ms(i * 37.0));
      check_conservation(s, 2);
    }
  }

  TEST_CASE("bigger buffer trades loss for delay") {
    double prev_delay = 0, prev_loss = 1;
    for (int cap : {10, 20, 40, 80, 160, 200}) {
      SimWorld s(bursty(cap), 1);
      const auto id = s.add_media_flow({});
      const auto m = run_for(s, id, 120);
      CHECK(m.delay_ms >= prev_delay);
      CHECK(m.loss <= prev_loss + 0.005);
      prev_delay = m.delay_ms;
      prev_loss = m.loss;
    }
    CHECK(prev_loss < 0.01);
  }

  TEST_CASE("measure without traffic") {
    SimWorld s(plain(20), 1);
    const auto id = s.add_media_flow({});
    CHECK_FALSE(s.measure(id).has_value());
    s.advance(SimTime::from_s(1));
    CHECK(s.measure(id).has_value());
    CHECK_FALSE(s.measure(id).has_value());
  }

  TEST_CASE("short clean link scores near the ceiling") {
    SimWorld s(plain(6), 1);
    const auto id = s.add_media_flow({});
    CHECK(run_for(s, id, 20).mos == doctest::Approx(4.4).epsilon(0.01));
  }

  TEST_CASE("invalid configs throw") {
    CHECK_THROWS_AS(SimWorld(plain(-1), 1), InvalidInput);
    CHECK_THROWS_AS(SimWorld(plain(1, 1.5), 1), InvalidInput);
    SimWorld s(plain(1), 1);
    MediaFlowConfig bad;
    bad.rate_kbps = 0;
    CHECK_THROWS_AS(s.add_media_flow(bad), InvalidInput);
    CHECK_THROWS_AS(s.counters(FlowId{7}), NotFound);
  }
}
