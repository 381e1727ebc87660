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

#include "voipqos/harness.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "voipqos/error.hpp"

namespace voipqos::harness {

using nlohmann::json;
using controller::Controller;
using netsim::FlowId;

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Calibrate:
      return "calibrate";
    case Mode::Control:
      return "control";
    case Mode::Baseline:
      return "baseline";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "calibrate") return Mode::Calibrate;
  if (s == "control") return Mode::Control;
  if (s == "baseline") return Mode::Baseline;
  throw ParseError("mode: expected calibrate, control or baseline, got '" + std::string(s) + "'");
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct FlowTally {
  std::uint64_t sent = 0, delivered = 0, dropped_link = 0, dropped_queue = 0, dropped_policer = 0, recovered = 0;
  std::int64_t delay_sum_ns = 0;
  std::uint64_t delay_count = 0;

  std::uint64_t dropped() const { return dropped_link + dropped_queue + dropped_policer; }
  double avg_delay_ms() const {
    return delay_count == 0 ? 0.0 : static_cast<double>(delay_sum_ns) / static_cast<double>(delay_count) / 1e6;
  }
  double loss() const {
    const auto resolved = delivered + dropped();
    if (resolved == 0) return 0.0;
    const auto lost = dropped() > recovered ? dropped() - recovered : 0;
    return static_cast<double>(lost) / static_cast<double>(resolved);
  }
  void add(const netsim::TraceRecord& r) {
    switch (r.event) {
      case netsim::PacketEvent::Sent:
        ++sent;
        break;
      case netsim::PacketEvent::Delivered:
        ++delivered;
        delay_sum_ns += r.delay_ns;
        ++delay_count;
        break;
      case netsim::PacketEvent::DroppedLink:
        ++dropped_link;
        break;
      case netsim::PacketEvent::DroppedQueue:
        ++dropped_queue;
        break;
      case netsim::PacketEvent::DroppedPolicer:
        ++dropped_policer;
        break;
      case netsim::PacketEvent::Recovered:
        ++recovered;
        delay_sum_ns += r.delay_ns;
        ++delay_count;
        break;
    }
  }
};

json weighted(const std::map<std::uint32_t, FlowTally>& tallies, const std::vector<double>& weights) {
  std::vector<double> w, d, l, m;
  for (const auto& [id, t] : tallies) {
    if (t.delivered + t.dropped() == 0) continue;
    w.push_back(weights.at(id));
    d.push_back(t.avg_delay_ms());
    l.push_back(t.loss());
    m.push_back(estimate_mos(t.avg_delay_ms(), t.loss()));
  }
  if (w.empty()) return nullptr;
  const auto means = kernels::weighted_means(w, d, l, m);
  return {{"delay_ms", means.delay_ms}, {"loss", means.loss}, {"mos", means.mos}};
}

json summarize(const RunResult& r, const std::vector<double>& weights) {
  json s;
  s["version"] = 1;
  s["scenario"] = r.scenario.name;
  s["seed"] = r.seed;
  s["mode"] = to_string(r.mode);
  s["learning"] = r.learning;
  s["calls"] = json::array();
  s["episodes"] = json::array();
  if (!r.ctl) {
    s["constraints_satisfied"] = true;
    return s;
  }
  const auto& ctl = *r.ctl;

  std::map<std::uint32_t, FlowTally> tally;
  for (const auto& c : ctl.calls()) tally[netsim::index_of(c.id)];
  for (const auto& rec : r.world->trace()) tally[netsim::index_of(rec.flow)].add(rec);

  std::optional<SimTime> first_d3;
  std::map<std::string, int> kinds{{"d1", 0}, {"d2", 0}, {"d3", 0}};
  for (const auto& c : ctl.calls()) {
    for (const auto& st : c.states) {
      if (st.entering == controller::Entering::Delta1) ++kinds["d1"];
      if (st.entering == controller::Entering::Delta2) ++kinds["d2"];
      if (st.entering == controller::Entering::Delta3) {
        ++kinds["d3"];
        if (!first_d3 || st.opened < *first_d3) first_d3 = st.opened;
      }
    }
  }

  bool all_ok = true;
  for (const auto& c : ctl.calls()) {
    const auto id = netsim::index_of(c.id);
    const auto& t = tally[id];
    json cj;
    cj["call_id"] = id;
    cj["weight"] = c.weight;
    cj["sent"] = t.sent;
    cj["delivered"] = t.delivered;
    cj["dropped_link"] = t.dropped_link;
    cj["dropped_queue"] = t.dropped_queue;
    cj["dropped_policer"] = t.dropped_policer;
    cj["recovered"] = t.recovered;
    cj["avg_delay_ms"] = t.avg_delay_ms();
    cj["avg_loss"] = t.loss();
    cj["mos"] = estimate_mos(t.avg_delay_ms(), t.loss());
    const bool ok = c.constraints.satisfied(make_sample(t.avg_delay_ms(), t.loss()));
    cj["constraints_ok"] = ok;
    all_ok = all_ok && ok;

    // Convergence point: close of the first episode opened after the last
    // network change the call saw.
    const SimTime end = c.states.back().closed.value_or(r.world->now());
    std::optional<SimTime> last_change;
    for (const auto& ch : r.scenario.timeline) {
      if (ch.at >= c.started && ch.at <= end) last_change = ch.at;
    }
    const SimTime anchor = last_change.value_or(c.started);
    std::optional<SimTime> from;
    bool found = false;
    for (const auto& ep : ctl.episodes()) {
      if (ep.call != c.id || ep.started < anchor) continue;
      found = true;
      from = ep.closed;  // nullopt: never converged
      break;
    }
    if (!found) from = last_change ? anchor + SimTime::from_s(r.scenario.window_s) : c.started;

    std::uint64_t windows = 0, ok_windows = 0, post = 0, post_ok = 0;
    for (const auto& w : ctl.windows()) {
      if (w.call != c.id || !w.window) continue;
      const bool wok = c.constraints.satisfied(*w.window);
      ++windows;
      ok_windows += wok;
      if (from && w.at > *from) {
        ++post;
        post_ok += wok;
      }
    }
    cj["windows"] = windows;
    cj["satisfied_windows"] = ok_windows;
    cj["satisfaction_fraction"] = windows ? static_cast<double>(ok_windows) / static_cast<double>(windows) : 0.0;
    cj["post_convergence_from_ms"] = from ? json(from->ms()) : json(nullptr);
    cj["post_convergence_windows"] = post;
    cj["post_convergence_fraction"] = post ? static_cast<double>(post_ok) / static_cast<double>(post) : 0.0;
    s["calls"].push_back(cj);
  }

  for (const auto& ep : ctl.episodes()) {
    json e;
    e["call_id"] = netsim::index_of(ep.call);
    e["start_ms"] = ep.started.ms();
    e["end_ms"] = ep.closed ? json(ep.closed->ms()) : json(nullptr);
    const auto tts = ep.time_to_satisfaction_s();
    e["time_to_satisfaction_s"] = tts ? json(*tts) : json(nullptr);
    e["final_action"] = ep.final_action ? json(actions::to_string(*ep.final_action)) : json(nullptr);
    e["final_case"] = ep.final_case ? json(actions::to_string(*ep.final_case)) : json(nullptr);
    e["exhausted"] = ep.exhausted;
    json segs = json::array();
    for (const auto& sg : ep.segments) {
      json applied = json::array();
      for (auto a : sg.applied) applied.push_back(actions::to_string(a));
      segs.push_back({{"case", actions::to_string(sg.scase)}, {"applied", applied}});
    }
    e["segments"] = segs;
    s["episodes"].push_back(e);
  }

  s["transitions"] = kinds;
  s["weighted"] = weighted(tally, weights);
  if (first_d3) {
    std::map<std::uint32_t, FlowTally> post;
    for (const auto& rec : r.world->trace()) {
      if (rec.time >= *first_d3) post[netsim::index_of(rec.flow)].add(rec);
    }
    json pc = weighted(post, weights);
    if (!pc.is_null()) pc["from_ms"] = first_d3->ms();
    s["post_coordination"] = pc;
  } else {
    s["post_coordination"] = nullptr;
  }
  s["constraints_satisfied"] = all_ok;
  return s;
}

}  // namespace

bool RunResult::constraints_satisfied() const { return summary.value("constraints_satisfied", false); }

RunResult run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  RunResult r;
  r.scenario = scenario;
  r.mode = options.mode;
  r.seed = options.seed;
  r.learning = options.learning.value_or(scenario.learning);
  const Constraints k = scenario.constraints.value_or(Constraints{});

  if (options.mode == Mode::Calibrate) {
    r.calibrated = calibrate(options.seed);
    r.kb = std::make_unique<knowledge::KnowledgeBase>(*r.calibrated, k);
    r.world = std::make_unique<netsim::SimWorld>(scenario.world(), options.seed);
    r.summary = summarize(r, {});
    return r;
  }

  r.world = std::make_unique<netsim::SimWorld>(scenario.world(), options.seed);
  r.kb = std::make_unique<knowledge::KnowledgeBase>(
      options.kb ? *options.kb : knowledge::KnowledgeBase(actions::default_knowledge(), k));
  auto copts = options.controller;
  copts.act = options.mode == Mode::Control;
  copts.learning = r.learning;
  copts.window_s = scenario.window_s;
  r.ctl = std::make_unique<Controller>(*r.world, *r.kb, copts);

  const auto window = SimTime::from_s(scenario.window_s);
  const auto duration = SimTime::from_s(scenario.duration_s);
  std::vector<std::optional<FlowId>> ids(scenario.calls.size());
  std::vector<double> weights;
  for (SimTime t{}; t < duration; t = t + window) {
    for (std::size_t i = 0; i < scenario.calls.size(); ++i) {
      if (!ids[i] && SimTime::from_s(scenario.calls[i].start_s) <= t) {
        ids[i] = r.ctl->add_call(scenario.calls[i].flow(), scenario.calls[i].weight, k);
        weights.resize(netsim::index_of(*ids[i]) + 1, 1.0);
        weights[netsim::index_of(*ids[i])] = scenario.calls[i].weight;
      }
    }
    const SimTime next = std::min(t + window, duration);
    r.world->advance(next);
    r.ctl->tick();
    for (std::size_t i = 0; i < scenario.calls.size(); ++i) {
      if (!ids[i]) continue;
      const SimTime end = scenario.calls[i].end_s ? SimTime::from_s(*scenario.calls[i].end_s) : duration;
      if (end <= next) r.ctl->end_call(*ids[i]);
    }
  }
  r.summary = summarize(r, weights);
  return r;
}

Scenario calibration_scenario(actions::ScenarioCase c) {
  switch (c) {
    case actions::ScenarioCase::Case1:
      return *preset("calib-case1");
    case actions::ScenarioCase::Case2:
      return *preset("table1-s2");
    case actions::ScenarioCase::Case3:
      return *preset("table1-s1");
    case actions::ScenarioCase::Case4:
      return *preset("table1-s3");
  }
  return *preset("table1-s1");
}

actions::KnowledgeSeed calibrate(std::uint64_t seed) {
  constexpr double kWarmupS = 30.0;
  constexpr double kSettleS = 5.0;
  constexpr double kMeasureS = 30.0;
  actions::KnowledgeSeed out;
  out.conflicts = actions::default_conflicts();
  for (auto entry : actions::default_ordering()) {
    const Scenario sc = calibration_scenario(entry.scase);
    netsim::SimWorld world(sc.world(), seed);
    world.set_trace_scope(netsim::TraceScope::None);
    actions::ActionEngine engine;
    const FlowId id = world.add_media_flow(sc.calls.front().flow());
    world.advance(SimTime::from_s(kWarmupS));
    world.measure(id);
    engine.apply(world, id, entry.action);
    world.advance(SimTime::from_s(kWarmupS + kSettleS));
    world.measure(id);
    world.advance(SimTime::from_s(kWarmupS + kSettleS + kMeasureS));
    const auto m = world.measure(id);
    if (m) entry.h = {m->delay_ms, m->loss};
    out.entries.push_back(entry);
  }
  return out;
}

std::string emit_seed_table(const actions::KnowledgeSeed& seed) {
  std::ostringstream os;
  os << "// Generated by `voipqos calibrate --emit-seed`. Do not edit by hand.\n";
  os << "// case, action, delay_ms, loss\n";
  char buf[256];
  for (const auto& e : seed.entries) {
    std::snprintf(buf, sizeof buf, "{ScenarioCase::%s, ActionKind::%s, %.17g, %.17g},\n",
                  std::string(actions::to_string(e.scase)).c_str(), std::string(e.action.name()).c_str(),
                  e.h.delay_ms, e.h.loss);
    os << buf;
  }
  return os.str();
}

std::string trace_csv(const RunResult& r) {
  std::string out = "time_ms,flow_id,event,delay_ms\n";
  if (!r.world) return out;
  for (const auto& t : r.world->trace()) {
    out += format_ms(t.time.ns());
    out += ',';
    out += std::to_string(netsim::index_of(t.flow));
    out += ',';
    out += netsim::to_string(t.event);
    out += ',';
    if (t.delay_ns >= 0) out += format_ms(t.delay_ns);
    out += '\n';
  }
  return out;
}

std::string states_csv(const RunResult& r) {
  std::string out = "state_id,call_id,entering,opened_ms,closed_ms,avg_delay,avg_loss,mos,category\n";
  if (!r.ctl) return out;
  for (const auto& c : r.ctl->calls()) {
    for (const auto& s : c.states) {
      const auto g = s.g.samples ? s.g.as_sample() : HeuristicSample{0.0, 0.0, estimate_mos(0.0, 0.0)};
      out += std::to_string(s.state_id) + "," + std::to_string(netsim::index_of(s.call)) + "," +
             std::string(controller::to_string(s.entering)) + "," + format_ms(s.opened.ns()) + "," +
             (s.closed ? format_ms(s.closed->ns()) : std::string()) + "," + fmt("%.3f", g.delay_ms) + "," +
             fmt("%.6f", g.loss) + "," + fmt("%.3f", g.mos) + "," +
             (s.g.samples ? std::string(to_string(s.category)) : std::string()) + "\n";
    }
  }
  return out;
}

std::string transitions_csv(const RunResult& r) {
  std::string out = "at_ms,call_id,kind,cause,action,outcome,stop,from_state,to_state,detail\n";
  if (!r.ctl) return out;
  // State-opening network and heuristic transitions come from the states;
  // action-level records from the controller log.
  struct Row {
    SimTime at;
    std::uint64_t order;
    std::string line;
  };
  std::vector<Row> rows;
  std::uint64_t order = 0;
  for (const auto& c : r.ctl->calls()) {
    for (std::size_t i = 1; i < c.states.size(); ++i) {
      const auto& s = c.states[i];
      if (s.entering != controller::Entering::Delta1) continue;
      rows.push_back({s.opened, order++,
                      format_ms(s.opened.ns()) + "," + std::to_string(netsim::index_of(s.call)) + ",d1," +
                          csv_quote(s.cause) + ",,,0," + std::to_string(c.states[i - 1].state_id) + "," +
                          std::to_string(s.state_id) + ","});
    }
  }
  for (const auto& t : r.ctl->transitions()) {
    const auto& rec = t.record;
    rows.push_back({rec.at, order++,
                    format_ms(rec.at.ns()) + "," + std::to_string(netsim::index_of(rec.call)) + "," +
                        std::string(actions::to_string(rec.kind)) + "," + csv_quote(t.cause) + "," +
                        (rec.action ? std::string(rec.action->name()) : std::string()) + "," +
                        std::string(actions::to_string(rec.outcome)) + "," + (rec.stop ? "1" : "0") + "," +
                        std::to_string(t.from_state) + "," + std::to_string(t.to_state) + "," +
                        csv_quote(rec.detail)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.at < b.at; });
  for (const auto& row : rows) out += row.line + "\n";
  return out;
}

std::string timeseries_csv(const RunResult& r) {
  std::string out = "time_ms,call_id,state_id,delay_ms,loss,mos,g_delay_ms,g_loss,g_mos,window_ok,g_ok\n";
  if (!r.ctl) return out;
  for (const auto& w : r.ctl->windows()) {
    const auto& k = r.ctl->call(w.call).constraints;
    out += format_ms(w.at.ns()) + "," + std::to_string(netsim::index_of(w.call)) + "," + std::to_string(w.state_id) +
           ",";
    if (w.window) {
      out += fmt("%.17g", w.window->delay_ms) + "," + fmt("%.17g", w.window->loss) + "," +
             fmt("%.17g", w.window->mos) + ",";
    } else {
      out += ",,,";
    }
    out += fmt("%.17g", w.g.delay_ms) + "," + fmt("%.17g", w.g.loss) + "," + fmt("%.17g", w.g.mos) + ",";
    out += w.window ? (k.satisfied(*w.window) ? "1" : "0") : "";
    out += std::string(",") + (w.satisfied ? "1" : "0") + "\n";
  }
  return out;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto put = [&](const char* name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    f << body;
    if (!f) throw IoError("write failed for " + (dir / name).string());
  };
  put("trace.csv", trace_csv(r));
  put("states.csv", states_csv(r));
  put("transitions.csv", transitions_csv(r));
  put("timeseries.csv", timeseries_csv(r));
  put("kb.json", (r.kb ? r.kb->to_json() : json::object()).dump(2) + "\n");
  put("summary.json", r.summary.dump(2) + "\n");
}

}  // namespace voipqos::harness
