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

#include <random>

#include "doctest.h"
#include "voipqos/actions.hpp"
#include "voipqos/error.hpp"
#include "voipqos/harness.hpp"

using namespace voipqos;
using namespace voipqos::actions;
using netsim::FlowId;

namespace {

netsim::SimWorld world(int buffer = 50, double cap = 256) {
  netsim::WorldConfig w;
  w.link = {20, 0, cap};
  w.queue.capacity_pkts = buffer;
  return netsim::SimWorld(std::move(w), 1);
}

std::vector<std::pair<ScenarioCase, ActionKind>> order_of(const std::vector<ActionEntry>& es) {
  std::vector<std::pair<ScenarioCase, ActionKind>> out;
  for (const auto& e : es) out.emplace_back(e.scase, e.action.kind);
  return out;
}

}  // namespace

TEST_SUITE("actions") {
  TEST_CASE("default ordering per case") {
    using C = ScenarioCase;
    using K = ActionKind;
    const std::vector<std::pair<C, K>> expect = {
        {C::Case1, K::GuaranteedLoad}, {C::Case2, K::IncreaseBuffer}, {C::Case2, K::EnableRED},
        {C::Case2, K::EnableFEC},      {C::Case2, K::ControlledLoad}, {C::Case3, K::DecreaseBuffer},
        {C::Case3, K::EnableWRED},     {C::Case3, K::ControlledLoad}, {C::Case4, K::ControlledLoad},
        {C::Case4, K::EnableRED}};
    CHECK(order_of(default_ordering()) == expect);
    const auto seed = default_knowledge();
    CHECK(order_of(seed.entries) == expect);
    for (const auto& e : seed.entries) CHECK(e.h.delay_ms > 0);
  }

  TEST_CASE("conflict relation is symmetric and irreflexive") {
    int pairs = 0;
    for (auto a : kAllKinds) {
      CHECK_FALSE(conflicts(a, a));
      for (auto b : kAllKinds) {
        CHECK(conflicts(a, b) == conflicts(b, a));
        pairs += conflicts(a, b);
      }
    }
    CHECK(pairs == 6);
    CHECK(conflicts(ActionKind::IncreaseBuffer, ActionKind::DecreaseBuffer));
    CHECK(conflicts(ActionKind::ControlledLoad, ActionKind::GuaranteedLoad));
    CHECK(conflicts(ActionKind::EnableRED, ActionKind::EnableWRED));
    CHECK_FALSE(conflicts(ActionKind::EnableFEC, ActionKind::EnableRED));
  }

  TEST_CASE("names round trip") {
    for (auto k : kAllKinds) CHECK(parse_kind(to_string(k)) == k);
    for (auto c : kAllCases) CHECK(parse_case(to_string(c)) == c);
    CHECK_THROWS_AS(parse_kind("Teleport"), ParseError);
  }

  TEST_CASE("apply then stop restores the world") {
    auto s = world(50);
    const auto id = s.add_media_flow({});
    ActionEngine eng;
    const auto q0 = s.queue();
    const auto svc0 = s.media_config(id).service;

    for (const auto& a : {ActionId::increase_buffer(), ActionId::decrease_buffer(), ActionId::enable_red(),
                          ActionId::enable_wred(), ActionId::enable_fec(), ActionId::controlled_load(),
                          ActionId::guaranteed_load()}) {
      CAPTURE(a.name());
      CHECK(eng.apply(s, id, a).outcome == Outcome::Applied);
      CHECK(eng.active(id, a.kind));
      CHECK(eng.stop(s, id, a.kind).outcome == Outcome::Stopped);
      CHECK_FALSE(eng.active(id, a.kind));
      CHECK(s.queue() == q0);
      CHECK(s.media_config(id).service == svc0);
      CHECK_FALSE(s.media_config(id).fec.has_value());
    }
    CHECK(eng.stop(s, id, ActionKind::EnableFEC).outcome == Outcome::NoOp);
  }

  TEST_CASE("buffer steps accumulate and clamp") {
    auto s = world(50);
    const auto id = s.add_media_flow({});
    ActionEngine eng;
    eng.apply(s, id, ActionId::decrease_buffer());
    eng.apply(s, id, ActionId::decrease_buffer());
    CHECK(s.queue().capacity_pkts == 20);
    CHECK(eng.buffer_delta(id) == -30);
    CHECK(eng.apply(s, id, ActionId::decrease_buffer()).outcome == Outcome::Applied);
    CHECK(s.queue().capacity_pkts == 10);
    CHECK(eng.apply(s, id, ActionId::decrease_buffer()).outcome == Outcome::NoOp);
    // Raising the buffer stops the call's decrease first.
    CHECK(eng.apply(s, id, ActionId::increase_buffer()).outcome == Outcome::Applied);
    CHECK_FALSE(eng.active(id, ActionKind::DecreaseBuffer));
    CHECK(s.queue().capacity_pkts == 65);

    auto t = world(195);
    const auto id2 = t.add_media_flow({});
    CHECK(eng.apply(t, id2, ActionId::increase_buffer()).outcome == Outcome::Applied);
    CHECK(t.queue().capacity_pkts == 200);
    CHECK(eng.apply(t, id2, ActionId::increase_buffer()).outcome == Outcome::NoOp);
  }

  TEST_CASE("buffer floor respects red thresholds") {
    auto s = world(30);
    const auto id = s.add_media_flow({});
    ActionEngine eng;
    CHECK(eng.apply(s, id, ActionId::enable_red()).outcome == Outcome::Applied);
    CHECK(s.queue().capacity_pkts == 100);
    CHECK(eng.apply(s, id, ActionId::decrease_buffer()).outcome == Outcome::NoOp);
    eng.stop(s, id, ActionKind::EnableRED);
    CHECK(s.queue().capacity_pkts == 30);
    CHECK(std::holds_alternative<netsim::TailDrop>(s.queue().discipline));
  }

  TEST_CASE("conflicting service is replaced and repeats are no-ops") {
    auto s = world();
    const auto id = s.add_media_flow({});
    ActionEngine eng;
    eng.apply(s, id, ActionId::guaranteed_load());
    CHECK(eng.apply(s, id, ActionId::guaranteed_load()).outcome == Outcome::NoOp);
    const auto r = eng.apply(s, id, ActionId::controlled_load());
    CHECK(r.outcome == Outcome::Applied);
    CHECK_FALSE(eng.active(id, ActionKind::GuaranteedLoad));
    CHECK(std::holds_alternative<netsim::ControlledLoad>(s.media_config(id).service));
    CHECK(s.reserved_kbps() == 0);
    eng.stop_all(s, id);
    CHECK(eng.active_kinds(id).empty());
    CHECK(std::holds_alternative<netsim::BestEffort>(s.media_config(id).service));
  }

  TEST_CASE("admission matches a brute-force ledger") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      auto s = world(50, 200);
      std::vector<FlowId> ids;
      for (int i = 0; i < 4; ++i) ids.push_back(s.add_media_flow({}));
      ActionEngine eng;
      std::vector<double> held(4, 0.0);
      for (int step = 0; step < 30; ++step) {
        const std::size_t f = rng() % 4;
        const double want = 10.0 * static_cast<double>(1 + rng() % 12);
        if (rng() % 3 == 0) {
          eng.stop(s, ids[f], ActionKind::GuaranteedLoad);
          held[f] = 0;
          continue;
        }
        double others = 0;
        for (std::size_t j = 0; j < 4; ++j) others += j == f ? 0 : held[j];
        const bool admit = held[f] > 0 ? false : others + want <= 200.0 + 1e-9;
        const auto r = eng.apply(s, ids[f], ActionId::guaranteed_load(want));
        if (held[f] > 0) {
          CHECK(r.outcome == Outcome::NoOp);
        } else {
          CHECK((r.outcome == Outcome::Applied) == admit);
          if (admit) held[f] = want;
        }
        double total = 0;
        for (double h : held) total += h;
        CHECK(s.reserved_kbps() == doctest::Approx(total));
      }
    }
  }

  TEST_CASE("refused reservation changes nothing") {
    auto s = world(50, 30);
    const auto a = s.add_media_flow({});
    const auto b = s.add_media_flow({});
    ActionEngine eng;
    CHECK(eng.apply(s, a, ActionId::guaranteed_load()).outcome == Outcome::Applied);
    eng.apply(s, b, ActionId::controlled_load());
    const auto r = eng.apply(s, b, ActionId::guaranteed_load());
    CHECK(r.outcome == Outcome::Failed);
    CHECK(eng.active(b, ActionKind::ControlledLoad));
    CHECK(std::holds_alternative<netsim::ControlledLoad>(s.media_config(b).service));
    eng.stop(s, a, ActionKind::GuaranteedLoad);
    CHECK(eng.apply(s, b, ActionId::guaranteed_load()).outcome == Outcome::Applied);
  }

  TEST_CASE("invalid action parameters") {
    CHECK_THROWS_AS(ActionId::increase_buffer(0).validate(), InvalidInput);
    CHECK_THROWS_AS(ActionId::enable_red({60, 50, 0.1, 0.002}).validate(), InvalidInput);
    CHECK_THROWS_AS(ActionId::guaranteed_load(-1).validate(), InvalidInput);
  }

  TEST_CASE("calibration reproduces the shipped estimates") {
    const auto fresh = harness::calibrate(1);
    const auto shipped = default_knowledge();
    REQUIRE(fresh.entries.size() == shipped.entries.size());
    for (std::size_t i = 0; i < fresh.entries.size(); ++i) {
      CAPTURE(to_string(fresh.entries[i].action.kind));
      CHECK(fresh.entries[i].h == shipped.entries[i].h);
    }
  }
}
