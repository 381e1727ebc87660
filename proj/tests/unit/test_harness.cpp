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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "voipqos/error.hpp"
#include "voipqos/harness.hpp"

using namespace voipqos;
using namespace voipqos::harness;
using nlohmann::json;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("voipqos_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario small() {
  Scenario s;
  s.name = "small";
  s.duration_s = 40;
  s.link = {60, 0.02, 256};
  s.queue.capacity_pkts = 40;
  s.background = {netsim::BurstSource{768, 200, 1500, 100, 100, 0}};
  s.timeline = {{SimTime::from_s(20), netsim::SetLossRate{0.08}}};
  s.calls = {CallSpec{}};
  return s;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("presets") {
    const auto names = preset_names();
    for (const char* n : {"table1-s1", "table1-s2", "table1-s3", "table1-s4", "table4-bg1", "table4-bg10",
                          "table7-singlecall", "fig7-twocall", "fig10-learning"}) {
      CHECK(std::find(names.begin(), names.end(), n) != names.end());
    }
    CHECK_FALSE(preset("nope").has_value());
    const auto s1 = *preset("table1-s1");
    const auto s2 = *preset("table1-s2");
    CHECK(s1.queue.capacity_pkts > s2.queue.capacity_pkts);
    CHECK(preset("table1-s3")->link.loss_rate == doctest::Approx(0.3));
    CHECK(preset("fig7-twocall")->calls.size() == 2);
    const auto f10 = *preset("fig10-learning");
    REQUIRE(f10.calls.size() == 2);
    CHECK(f10.calls[1].start_s == *f10.calls[0].end_s);
    for (const auto& n : names) CHECK_NOTHROW(preset(n)->validate());
  }

  TEST_CASE("scenario files round trip") {
    const auto dir = temp_dir("roundtrip");
    std::filesystem::create_directories(dir);
    for (const auto& n : preset_names()) {
      const auto s = *preset(n);
      const auto path = dir / (n + ".json");
      std::ofstream(path) << to_json(s).dump(2);
      CHECK(load_scenario(path.string()) == s);
      CHECK(scenario_from_json(to_json(s)) == s);
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("parse errors name the field") {
    auto j = to_json(small());
    auto expect = [](json bad, const std::string& field) {
      try {
        scenario_from_json(bad);
        FAIL("accepted: " << field);
      } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(field) != std::string::npos);
      }
    };
    auto a = j;
    a["link"]["loss_rate"] = 1.5;
    expect(a, "loss_rate");
    auto b = j;
    b["calls"][0]["start_s"] = 3.0;
    expect(b, "calls[0].start_s");
    auto c = j;
    c.erase("duration_s");
    expect(c, "duration_s");
    auto d = j;
    d["timeline"][0]["type"] = "earthquake";
    expect(d, "timeline[0]");
    auto e = j;
    e["version"] = 2;
    expect(e, "version");
    auto f = j;
    f["queue"]["discipline"] = {{"type", "red"}, {"min_th", 30}, {"max_th", 90}, {"max_p", 0.1}, {"w_q", 0.002}};
    expect(f, "queue");
    CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), IoError);
    CHECK_THROWS_AS(parse_mode("fast"), ParseError);
  }

  TEST_CASE("runs are deterministic per seed") {
    const auto a = run(small(), {.seed = 5});
    const auto b = run(small(), {.seed = 5});
    const auto c = run(small(), {.seed = 6});
    CHECK(trace_csv(a) == trace_csv(b));
    CHECK(transitions_csv(a) == transitions_csv(b));
    CHECK(timeseries_csv(a) == timeseries_csv(b));
    CHECK(a.summary == b.summary);
    CHECK(trace_csv(a) != trace_csv(c));
  }

  TEST_CASE("control beats baseline under heavy loss") {
    const auto s = *preset("table1-s4");
    const auto base = run(s, {.seed = 1, .mode = Mode::Baseline});
    const auto ctl = run(s, {.seed = 1, .mode = Mode::Control});
    CHECK(ctl.summary["calls"][0]["avg_loss"].get<double>() < base.summary["calls"][0]["avg_loss"].get<double>());
    CHECK(base.summary["transitions"]["d2"] == 0);
    CHECK(base.summary["episodes"].empty());
  }

  TEST_CASE("summary agrees with trace.csv") {
    const auto r = run(small(), {.seed = 2});
    std::istringstream in(trace_csv(r));
    std::string line;
    std::getline(in, line);
    CHECK(line == "time_ms,flow_id,event,delay_ms");
    std::map<std::string, std::uint64_t> count;
    std::int64_t delay_ns = 0;
    std::uint64_t delay_n = 0;
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) f.push_back(cell);
      if (f.size() == 3) f.emplace_back();
      REQUIRE(f.size() == 4);
      CHECK(f[1] == "0");
      ++count[f[2]];
      if (f[2] == "delivered" || f[2] == "recovered") {
        delay_ns += parse_ms_to_ns(f[3]);
        ++delay_n;
      }
    }
    const auto& cj = r.summary["calls"][0];
    const std::uint64_t dropped = count["dropped_link"] + count["dropped_queue"] + count["dropped_policer"];
    CHECK(cj["sent"].get<std::uint64_t>() == count["sent"]);
    CHECK(cj["delivered"].get<std::uint64_t>() == count["delivered"]);
    CHECK(cj["recovered"].get<std::uint64_t>() == count["recovered"]);
    const double loss = static_cast<double>(dropped - std::min(dropped, count["recovered"])) /
                        static_cast<double>(count["delivered"] + dropped);
    CHECK(cj["avg_loss"].get<double>() == doctest::Approx(loss).epsilon(1e-12));
    CHECK(cj["avg_delay_ms"].get<double>() ==
          doctest::Approx(static_cast<double>(delay_ns) / static_cast<double>(delay_n) / 1e6).epsilon(1e-12));
    CHECK(cj["mos"].get<double>() ==
          doctest::Approx(estimate_mos(cj["avg_delay_ms"].get<double>(), loss)).epsilon(1e-12));
  }

  TEST_CASE("a scenario without calls writes header-only tables") {
    auto s = small();
    s.calls.clear();
    const auto r = run(s, {});
    const auto dir = temp_dir("empty");
    write_outputs(r, dir);
    CHECK(slurp(dir / "trace.csv") == "time_ms,flow_id,event,delay_ms\n");
    CHECK(slurp(dir / "states.csv") == "state_id,call_id,entering,opened_ms,closed_ms,avg_delay,avg_loss,mos,category\n");
    CHECK(slurp(dir / "transitions.csv") ==
          "at_ms,call_id,kind,cause,action,outcome,stop,from_state,to_state,detail\n");
    CHECK(slurp(dir / "timeseries.csv") ==
          "time_ms,call_id,state_id,delay_ms,loss,mos,g_delay_ms,g_loss,g_mos,window_ok,g_ok\n");
    CHECK(json::parse(slurp(dir / "summary.json"))["calls"].empty());
    CHECK(json::parse(slurp(dir / "kb.json"))["version"] == 1);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("unwritable output directory") {
    const auto blocker = temp_dir("blocker");
    std::ofstream(blocker) << "file";
    const auto r = run(small(), {});
    CHECK_THROWS_AS(write_outputs(r, blocker / "sub"), IoError);
    std::filesystem::remove_all(blocker);
  }

  TEST_CASE("calibrate mode carries the measured knowledge") {
    auto s = small();
    const auto r = run(s, {.mode = Mode::Calibrate});
    REQUIRE(r.calibrated.has_value());
    CHECK(r.calibrated->entries.size() == actions::default_knowledge().entries.size());
    CHECK(r.kb->entries(actions::ScenarioCase::Case2).size() == 4);
    CHECK(emit_seed_table(*r.calibrated).find("ControlledLoad") != std::string::npos);
  }
}
