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

// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "../common/refine_oracle.hpp"
#include "voipqos/controller.hpp"
#include "voipqos/harness.hpp"
#include "voipqos/metrics.hpp"
#include "voipqos/netsim.hpp"

using namespace voipqos;
using harness::Mode;
using harness::RunOptions;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double call_metric(const harness::RunResult& r, const char* key, std::size_t call = 0) {
  return r.summary["calls"][call][key].get<double>();
}

Verdict buffer_tradeoff() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s1 = harness::run(*harness::preset("table1-s1"), {.seed = seed, .mode = Mode::Baseline});
    const auto s2 = harness::run(*harness::preset("table1-s2"), {.seed = seed, .mode = Mode::Baseline});
    const double d1 = call_metric(s1, "avg_delay_ms"), d2 = call_metric(s2, "avg_delay_ms");
    const double l1 = call_metric(s1, "avg_loss"), l2 = call_metric(s2, "avg_loss");
    ok = ok && d1 >= 2 * d2 && l2 >= 0.01 && l1 == 0.0;
    if (seed == 1) detail = fmt("seed 1: s1 %.1f ms / %.4f, s2 %.1f ms / %.4f", d1, l1, d2, l2);
  }
  return {ok, detail + " (seeds 1-3)"};
}

Verdict red_trend() {
  const auto lo = harness::run(*harness::preset("table4-bg1"), {.seed = 1, .mode = Mode::Baseline});
  const auto hi = harness::run(*harness::preset("table4-bg10"), {.seed = 1, .mode = Mode::Baseline});
  const double ll = call_metric(lo, "avg_loss"), lh = call_metric(hi, "avg_loss");
  const double dl = call_metric(lo, "avg_delay_ms"), dh = call_metric(hi, "avg_delay_ms");
  return {lh > ll && dl <= 100 && dh <= 100, fmt("bg1 %.1f ms / %.4f, bg10 %.1f ms / %.4f", dl, ll, dh, lh)};
}

double loss_with(const harness::Scenario& s, const netsim::ServiceClass& svc, std::uint64_t seed) {
  netsim::SimWorld w(s.world(), seed);
  w.set_trace_scope(netsim::TraceScope::None);
  auto flow = s.calls.at(0).flow();
  flow.service = svc;
  const auto id = w.add_media_flow(flow);
  w.advance(SimTime::from_s(s.duration_s));
  return w.measure(id)->loss;
}

Verdict service_ordering() {
  std::string detail;
  bool ok = true;
  for (const char* name : {"table1-s3", "table1-s4"}) {
    const auto s = *harness::preset(name);
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const double cl = loss_with(s, netsim::ControlledLoad{}, seed);
      const double gl = loss_with(s, netsim::Guaranteed{s.calls[0].rate_kbps, 1}, seed);
      wins += cl <= gl;
    }
    ok = ok && wins >= 9;
    detail += std::string(name) + " " + std::to_string(wins) + "/10 ";
  }
  return {ok, detail};
}

Verdict single_call() {
  const auto r = harness::run(*harness::preset("table7-singlecall"), {.seed = 1});
  const double d = call_metric(r, "avg_delay_ms"), l = call_metric(r, "avg_loss"), m = call_metric(r, "mos");
  const double post = call_metric(r, "post_convergence_fraction");
  const bool ok = d <= 180 && l <= 0.05 && m >= 2 && post >= 0.8 &&
                  r.summary["calls"][0]["post_convergence_windows"].get<int>() > 0;
  return {ok, fmt("delay %.1f ms, loss %.4f, MOS %.2f, post-convergence %.2f", d, l, m, post)};
}

Verdict multi_call() {
  const auto r = harness::run(*harness::preset("fig7-twocall"), {.seed = 1});
  const int d3 = r.summary["transitions"]["d3"].get<int>();
  const auto& pc = r.summary["post_coordination"];
  if (d3 < 1 || pc.is_null() || pc["loss"].is_null()) return {false, "no coordination transition"};
  const double l = pc["loss"].get<double>(), m = pc["mos"].get<double>();
  return {l <= 0.05 && m >= 2, "d3 " + std::to_string(d3) + fmt(", post-coordination loss %.4f, MOS %.2f", l, m)};
}

Verdict learning() {
  auto s = *harness::preset("fig10-learning");
  const auto full = harness::run(s, {.seed = 1});
  const auto& eps = full.summary["episodes"];
  // One episode per call.
  const nlohmann::json* e1 = nullptr;
  const nlohmann::json* e2 = nullptr;
  for (const auto& e : eps) {
    if (e["call_id"] == 0 && !e1) e1 = &e;
    if (e["call_id"] == 1 && !e2) e2 = &e;
  }
  if (!e1 || !e2 || (*e1)["time_to_satisfaction_s"].is_null() || (*e2)["time_to_satisfaction_s"].is_null()) {
    return {false, "an episode never reached the constraints"};
  }
  const double t1 = (*e1)["time_to_satisfaction_s"].get<double>();
  const double t2 = (*e2)["time_to_satisfaction_s"].get<double>();
  const auto fa = actions::parse_kind((*e1)["final_action"].get<std::string>());
  const auto fc = actions::parse_case((*e1)["final_case"].get<std::string>());

  // Replay up to the start of episode 2 to read the knowledge it started from.
  const double start2 = (*e2)["start_ms"].get<double>() / 1000.0;
  s.duration_s = start2;
  for (auto& c : s.calls) {
    if (c.end_s && *c.end_s > start2) c.end_s = start2;
  }
  std::erase_if(s.calls, [&](const auto& c) { return c.start_s >= start2; });
  std::erase_if(s.timeline, [&](const auto& ch) { return ch.at.s() >= start2; });
  const auto prefix = harness::run(s, {.seed = 1});
  const int rank = prefix.kb->rank_of(fc, fa);
  const bool ok = t2 <= 0.5 * t1 && rank == 1;
  return {ok, fmt("TTS1 %.0f s, TTS2 %.0f s", t1, t2) + ", " + std::string(actions::to_string(fa)) + " rank " +
                  std::to_string(rank) + " in " + std::string(actions::to_string(fc)) + " at episode 2 start"};
}

Verdict refine_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t cases = 0;
  const auto bad = oracle::exhaustive(4, cases);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {bad == 0 && secs < 10.0,
          std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches, " + fmt("%.2f s", secs)};
}

Verdict emodel_anchors() {
  bool ok = emodel::mos_from_r(0) == 1.0 && emodel::mos_from_r(100) == 4.5;
  const double m0 = estimate_mos(0, 0);
  ok = ok && m0 >= 4.3 && m0 <= 4.5;
  for (double d = 0; d <= 1000; d += 5) {
    for (double l = 0; l <= 1.0; l += 0.01) {
      ok = ok && estimate_mos(d + 5, l) <= estimate_mos(d, l) && estimate_mos(d, std::min(1.0, l + 0.01)) <= estimate_mos(d, l);
    }
  }
  return {ok, fmt("MOS(0,0) %.4f", m0)};
}

Verdict loss_calibration() {
  netsim::WorldConfig w;
  w.link = {20, 0.30, 2048};
  netsim::SimWorld s(w, 1);
  const auto id = s.add_media_flow({});
  s.advance(SimTime::from_s(300));
  const auto& c = s.counters(id);
  const double loss = s.measure(id)->loss;
  const auto n = c.delivered + c.dropped();
  return {n >= 10000 && std::abs(loss - 0.30) <= 0.015,
          fmt("measured %.4f over ", loss) + std::to_string(n) + " packets"};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const auto base = std::filesystem::temp_directory_path() / "voipqos_acceptance_det";
  std::string a, b;
  for (int i = 0; i < 2; ++i) {
    const auto dir = base / std::to_string(i);
    harness::write_outputs(harness::run(*harness::preset("table7-singlecall"), {.seed = 7}), dir);
    (i == 0 ? a : b) = read_file(dir / "trace.csv");
  }
  std::filesystem::remove_all(base);
  return {!a.empty() && a == b, std::to_string(a.size()) + " bytes"};
}

Verdict trace_validity() {
  std::size_t runs = 0, problems = 0;
  std::string first;
  for (const auto& name : harness::preset_names()) {
    for (Mode m : {Mode::Control, Mode::Baseline}) {
      const auto r = harness::run(*harness::preset(name), {.seed = 1, .mode = m});
      const auto errs = controller::validate_trace(*r.ctl);
      ++runs;
      problems += errs.size();
      if (!errs.empty() && first.empty()) first = name + ": " + errs.front();
    }
  }
  return {problems == 0, std::to_string(runs) + " runs, " + std::to_string(problems) + " problems" +
                             (first.empty() ? "" : " (" + first + ")")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"buffer-tradeoff", buffer_tradeoff},   {"red-congestion-trend", red_trend},
      {"service-class-ordering", service_ordering}, {"single-call-closed-loop", single_call},
      {"multi-call-coordination", multi_call}, {"learning-convergence", learning},
      {"refine-oracle", refine_oracle},       {"emodel-anchors", emodel_anchors},
      {"loss-calibration", loss_calibration}, {"determinism", determinism},
      {"trace-validity", trace_validity},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
