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
#include <fstream>
#include <sstream>

#include "voipqos/error.hpp"
#include "voipqos/harness.hpp"

namespace voipqos::harness {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Field access with the dotted path in the error message.
template <class T>
T req(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(path + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(path + "." + key + ": wrong type");
  }
}

template <class T>
T opt(const json& j, const char* key, T fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return req<T>(j, key, path);
}

bool on_grid(double t, double window) {
  const double k = t / window;
  return std::abs(k - std::round(k)) < 1e-9;
}

json red_json(const netsim::RedParams& p) {
  return {{"min_th", p.min_th}, {"max_th", p.max_th}, {"max_p", p.max_p}, {"ewma_weight", p.ewma_weight}};
}

netsim::RedParams red_from(const json& j, const std::string& path) {
  netsim::RedParams p;
  p.min_th = req<double>(j, "min_th", path);
  p.max_th = req<double>(j, "max_th", path);
  p.max_p = req<double>(j, "max_p", path);
  p.ewma_weight = opt<double>(j, "ewma_weight", p.ewma_weight, path);
  return p;
}

json discipline_json(const netsim::Discipline& d) {
  return std::visit(Overloaded{[](const netsim::TailDrop&) { return json{{"type", "taildrop"}}; },
                               [](const netsim::Red& r) {
                                 json j = red_json(r.params);
                                 j["type"] = "red";
                                 return j;
                               },
                               [](const netsim::Wred& w) {
                                 json c = json::array();
                                 for (const auto& p : w.classes) c.push_back(red_json(p));
                                 return json{{"type", "wred"}, {"classes", c}};
                               }},
                    d);
}

netsim::Discipline discipline_from(const json& j, const std::string& path) {
  const auto type = req<std::string>(j, "type", path);
  if (type == "taildrop") return netsim::TailDrop{};
  if (type == "red") return netsim::Red{red_from(j, path)};
  if (type == "wred") {
    netsim::Wred w;
    const auto& classes = j.at("classes");
    for (std::size_t i = 0; i < classes.size(); ++i) {
      w.classes.push_back(red_from(classes[i], path + ".classes[" + std::to_string(i) + "]"));
    }
    return w;
  }
  throw ParseError(path + ".type: unknown discipline '" + type + "'");
}

json background_json(const netsim::BackgroundConfig& b) {
  return std::visit(Overloaded{[](const netsim::CbrSource& c) {
                                 return json{{"type", "cbr"}, {"rate_kbps", c.rate_kbps},
                                             {"packet_bytes", c.packet_bytes}};
                               },
                               [](const netsim::BurstSource& s) {
                                 return json{{"type", "burst"},
                                             {"rate_kbps", s.rate_kbps},
                                             {"burst_ms", s.burst_ms},
                                             {"period_ms", s.period_ms},
                                             {"period_jitter_ms", s.period_jitter_ms},
                                             {"packet_bytes", s.packet_bytes},
                                             {"start_ms", s.start_ms}};
                               }},
                    b);
}

netsim::BackgroundConfig background_from(const json& j, const std::string& path) {
  const auto type = req<std::string>(j, "type", path);
  if (type == "cbr") {
    netsim::CbrSource c;
    c.rate_kbps = req<double>(j, "rate_kbps", path);
    c.packet_bytes = opt<int>(j, "packet_bytes", c.packet_bytes, path);
    return c;
  }
  if (type == "burst") {
    netsim::BurstSource b;
    b.rate_kbps = req<double>(j, "rate_kbps", path);
    b.burst_ms = req<double>(j, "burst_ms", path);
    b.period_ms = req<double>(j, "period_ms", path);
    b.period_jitter_ms = opt<double>(j, "period_jitter_ms", 0.0, path);
    b.packet_bytes = opt<int>(j, "packet_bytes", b.packet_bytes, path);
    b.start_ms = opt<double>(j, "start_ms", 0.0, path);
    return b;
  }
  throw ParseError(path + ".type: unknown background source '" + type + "'");
}

json change_json(const netsim::NetworkChange& c) {
  json j{{"at_s", c.at.s()}};
  std::visit(Overloaded{[&](const netsim::SetLatency& x) {
                          j["type"] = "latency";
                          j["latency_ms"] = x.latency_ms;
                        },
                        [&](const netsim::SetLossRate& x) {
                          j["type"] = "loss";
                          j["loss_rate"] = x.loss_rate;
                        },
                        [&](const netsim::SetBufferSize& x) {
                          j["type"] = "buffer";
                          j["capacity_pkts"] = x.capacity_pkts;
                        },
                        [&](const netsim::SetBackgroundRate& x) {
                          j["type"] = "background";
                          j["rate_kbps"] = x.rate_kbps;
                          if (x.source) j["source"] = *x.source;
                        }},
             c.change);
  return j;
}

netsim::NetworkChange change_from(const json& j, const std::string& path) {
  netsim::NetworkChange c;
  c.at = SimTime::from_s(req<double>(j, "at_s", path));
  const auto type = req<std::string>(j, "type", path);
  if (type == "latency") {
    c.change = netsim::SetLatency{req<double>(j, "latency_ms", path)};
  } else if (type == "loss") {
    c.change = netsim::SetLossRate{req<double>(j, "loss_rate", path)};
  } else if (type == "buffer") {
    c.change = netsim::SetBufferSize{req<int>(j, "capacity_pkts", path)};
  } else if (type == "background") {
    netsim::SetBackgroundRate b{req<double>(j, "rate_kbps", path), std::nullopt};
    if (j.contains("source")) b.source = req<std::uint32_t>(j, "source", path);
    c.change = b;
  } else {
    throw ParseError(path + ".type: unknown change '" + type + "'");
  }
  return c;
}

}  // namespace

netsim::MediaFlowConfig CallSpec::flow() const {
  netsim::MediaFlowConfig f;
  f.rate_kbps = rate_kbps;
  f.packet_interval_ms = packet_interval_ms;
  f.priority = priority;
  f.jitter_ms = jitter_ms;
  return f;
}

netsim::WorldConfig Scenario::world() const {
  return {link, queue, background, timeline};
}

void Scenario::validate() const {
  auto wrap = [](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const InvalidInput& e) {
      throw ParseError(field + ": " + e.what());
    }
  };
  if (name.empty()) throw ParseError("name: must not be empty");
  if (!(duration_s > 0.0)) throw ParseError("duration_s: must be > 0");
  if (!(window_s > 0.0)) throw ParseError("window_s: must be > 0");
  wrap("link", [&] { link.validate(); });
  wrap("queue", [&] { queue.validate(); });
  if (constraints) wrap("constraints", [&] { constraints->validate(); });
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const std::string f = "timeline[" + std::to_string(i) + "]";
    if (timeline[i].at.ns() < 0 || timeline[i].at > SimTime::from_s(duration_s)) {
      throw ParseError(f + ".at_s: outside the scenario");
    }
    if (i > 0 && timeline[i].at < timeline[i - 1].at) throw ParseError(f + ".at_s: timeline not sorted");
    std::visit(Overloaded{[&](const netsim::SetLatency& x) {
                            if (!(x.latency_ms >= 0.0)) throw ParseError(f + ".latency_ms: must be >= 0");
                          },
                          [&](const netsim::SetLossRate& x) {
                            if (!(x.loss_rate >= 0.0 && x.loss_rate <= 1.0)) {
                              throw ParseError(f + ".loss_rate: must lie in [0, 1]");
                            }
                          },
                          [&](const netsim::SetBufferSize& x) {
                            if (x.capacity_pkts < 1) throw ParseError(f + ".capacity_pkts: must be >= 1");
                          },
                          [&](const netsim::SetBackgroundRate& x) {
                            if (!(x.rate_kbps >= 0.0)) throw ParseError(f + ".rate_kbps: must be >= 0");
                          }},
               timeline[i].change);
  }
  for (std::size_t i = 0; i < calls.size(); ++i) {
    const std::string f = "calls[" + std::to_string(i) + "]";
    const auto& c = calls[i];
    wrap(f, [&] { c.flow().validate(link.capacity_kbps); });
    if (!(c.weight > 0.0)) throw ParseError(f + ".weight: must be > 0");
    if (c.start_s < 0.0 || c.start_s >= duration_s) throw ParseError(f + ".start_s: outside the scenario");
    if (!on_grid(c.start_s, window_s)) throw ParseError(f + ".start_s: must be a multiple of window_s");
    if (c.end_s) {
      if (*c.end_s <= c.start_s || *c.end_s > duration_s) throw ParseError(f + ".end_s: outside the call's range");
      if (!on_grid(*c.end_s, window_s)) throw ParseError(f + ".end_s: must be a multiple of window_s");
    }
  }
}

json to_json(const Scenario& s) {
  json j;
  j["version"] = kScenarioVersion;
  j["name"] = s.name;
  j["duration_s"] = s.duration_s;
  j["window_s"] = s.window_s;
  j["learning"] = s.learning;
  j["link"] = {{"latency_ms", s.link.latency_ms},
               {"loss_rate", s.link.loss_rate},
               {"capacity_kbps", s.link.capacity_kbps}};
  j["queue"] = {{"capacity_pkts", s.queue.capacity_pkts}, {"discipline", discipline_json(s.queue.discipline)}};
  j["background"] = json::array();
  for (const auto& b : s.background) j["background"].push_back(background_json(b));
  j["timeline"] = json::array();
  for (const auto& c : s.timeline) j["timeline"].push_back(change_json(c));
  j["calls"] = json::array();
  for (const auto& c : s.calls) {
    json cj{{"rate_kbps", c.rate_kbps}, {"packet_interval_ms", c.packet_interval_ms}, {"priority", c.priority},
            {"jitter_ms", c.jitter_ms},  {"weight", c.weight},                         {"start_s", c.start_s}};
    if (c.end_s) cj["end_s"] = *c.end_s;
    j["calls"].push_back(cj);
  }
  if (s.constraints) {
    j["constraints"] = {{"delay_max_ms", s.constraints->delay_max_ms},
                        {"loss_max", s.constraints->loss_max},
                        {"mos_min", s.constraints->mos_min}};
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("scenario: expected an object");
  const int version = req<int>(j, "version", "scenario");
  if (version != kScenarioVersion) throw ParseError("version: unsupported value " + std::to_string(version));
  Scenario s;
  s.name = req<std::string>(j, "name", "scenario");
  s.duration_s = req<double>(j, "duration_s", "scenario");
  s.window_s = opt<double>(j, "window_s", s.window_s, "scenario");
  s.learning = opt<bool>(j, "learning", s.learning, "scenario");
  if (j.contains("link")) {
    const auto& l = j.at("link");
    s.link.latency_ms = opt<double>(l, "latency_ms", s.link.latency_ms, "link");
    s.link.loss_rate = opt<double>(l, "loss_rate", s.link.loss_rate, "link");
    s.link.capacity_kbps = opt<double>(l, "capacity_kbps", s.link.capacity_kbps, "link");
  }
  if (j.contains("queue")) {
    const auto& q = j.at("queue");
    s.queue.capacity_pkts = opt<int>(q, "capacity_pkts", s.queue.capacity_pkts, "queue");
    if (q.contains("discipline")) s.queue.discipline = discipline_from(q.at("discipline"), "queue.discipline");
  }
  if (j.contains("background")) {
    const auto& b = j.at("background");
    for (std::size_t i = 0; i < b.size(); ++i) {
      s.background.push_back(background_from(b[i], "background[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("timeline")) {
    const auto& t = j.at("timeline");
    for (std::size_t i = 0; i < t.size(); ++i) s.timeline.push_back(change_from(t[i], "timeline[" + std::to_string(i) + "]"));
  }
  if (j.contains("calls")) {
    const auto& cs = j.at("calls");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string p = "calls[" + std::to_string(i) + "]";
      CallSpec c;
      c.rate_kbps = opt<double>(cs[i], "rate_kbps", c.rate_kbps, p);
      c.packet_interval_ms = opt<double>(cs[i], "packet_interval_ms", c.packet_interval_ms, p);
      c.priority = opt<int>(cs[i], "priority", c.priority, p);
      c.jitter_ms = opt<double>(cs[i], "jitter_ms", c.jitter_ms, p);
      c.weight = opt<double>(cs[i], "weight", c.weight, p);
      c.start_s = opt<double>(cs[i], "start_s", c.start_s, p);
      if (cs[i].contains("end_s")) c.end_s = req<double>(cs[i], "end_s", p);
      s.calls.push_back(c);
    }
  }
  if (j.contains("constraints")) {
    const auto& c = j.at("constraints");
    Constraints k;
    k.delay_max_ms = opt<double>(c, "delay_max_ms", k.delay_max_ms, "constraints");
    k.loss_max = opt<double>(c, "loss_max", k.loss_max, "constraints");
    k.mos_min = opt<double>(c, "mos_min", k.mos_min, "constraints");
    s.constraints = k;
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

netsim::NetworkChange at(double s, netsim::ChangeKind k) { return {SimTime::from_s(s), k}; }

// Shared bursty access link: 256 kbps bottleneck, 180 ms bursts at 1 Mbps
// roughly every 0.9 s.
Scenario access_link(std::string name, int buffer, double loss) {
  Scenario s;
  s.name = std::move(name);
  s.duration_s = 120.0;
  s.link = {100.0, loss, 256.0};
  s.queue.capacity_pkts = buffer;
  s.background = {netsim::BurstSource{1024.0, 180.0, 900.0, 50.0, 100, 0.0}};
  s.calls = {CallSpec{}};
  return s;
}

Scenario red_background(std::string name, double bg_kbps) {
  Scenario s;
  s.name = std::move(name);
  s.duration_s = 120.0;
  s.link = {20.0, 0.0, 1000.0};
  s.queue.capacity_pkts = 200;
  s.queue.discipline = netsim::Red{{50.0, 100.0, 0.1, 0.002}};
  s.background = {netsim::CbrSource{bg_kbps, 100}, netsim::CbrSource{1000.0, 100}};
  s.calls = {CallSpec{}};
  return s;
}

Scenario table7() {
  Scenario s;
  s.name = "table7-singlecall";
  s.duration_s = 420.0;
  s.link = {50.0, 0.0, 256.0};
  s.queue.capacity_pkts = 60;
  s.background = {netsim::BurstSource{768.0, 200.0, 1500.0, 100.0, 100, 0.0}};
  s.timeline = {at(60, netsim::SetLatency{65.0}), at(120, netsim::SetLatency{80.0}),
                at(180, netsim::SetLatency{120.0}), at(240, netsim::SetLossRate{0.01}),
                at(300, netsim::SetLossRate{0.07})};
  s.calls = {CallSpec{}};
  return s;
}

Scenario two_call() {
  Scenario s;
  s.name = "fig7-twocall";
  s.duration_s = 300.0;
  s.link = {50.0, 0.0, 256.0};
  s.queue.capacity_pkts = 60;
  s.background = {netsim::BurstSource{768.0, 200.0, 1500.0, 100.0, 100, 0.0}};
  s.timeline = {at(60, netsim::SetLatency{100.0}), at(120, netsim::SetLatency{150.0})};
  s.calls = {CallSpec{}, CallSpec{}};
  return s;
}

Scenario fig10() {
  Scenario s;
  s.name = "fig10-learning";
  s.duration_s = 300.0;
  s.link = {50.0, 0.0, 2048.0};
  s.queue.capacity_pkts = 50;
  s.timeline = {at(30, netsim::SetLossRate{0.08}), at(120, netsim::SetLossRate{0.0}),
                at(180, netsim::SetLossRate{0.08}), at(270, netsim::SetLossRate{0.0})};
  CallSpec a;
  a.end_s = 150.0;
  CallSpec b;
  b.start_s = 150.0;
  s.calls = {a, b};
  return s;
}

Scenario video() {
  Scenario s;
  s.name = "video";
  s.duration_s = 150.0;
  s.link = {50.0, 0.0, 2048.0};
  s.queue.capacity_pkts = 50;
  s.timeline = {at(30, netsim::SetLossRate{0.02}), at(60, netsim::SetLossRate{0.04}),
                at(90, netsim::SetLossRate{0.06})};
  CallSpec v;
  v.rate_kbps = 512.0;
  s.calls = {v};
  return s;
}

Scenario mild() {
  Scenario s;
  s.name = "calib-case1";
  s.duration_s = 60.0;
  s.link = {100.0, 0.005, 256.0};
  s.queue.capacity_pkts = 50;
  s.background = {netsim::CbrSource{128.0, 100}};
  s.calls = {CallSpec{}};
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"table1-s1",         "table1-s2",    "table1-s3",      "table1-s4", "table4-bg1", "table4-bg10",
          "table7-singlecall", "fig7-twocall", "fig10-learning", "video",     "calib-case1"};
}

std::optional<Scenario> preset(const std::string& name) {
  if (name == "table1-s1") return access_link(name, 200, 0.0);
  if (name == "table1-s2") return access_link(name, 20, 0.0);
  if (name == "table1-s3") return access_link(name, 200, 0.30);
  if (name == "table1-s4") return access_link(name, 20, 0.30);
  if (name == "table4-bg1") return red_background(name, 1.0);
  if (name == "table4-bg10") return red_background(name, 10.0);
  if (name == "table7-singlecall") return table7();
  if (name == "fig7-twocall") return two_call();
  if (name == "fig10-learning") return fig10();
  if (name == "video") return video();
  if (name == "calib-case1") return mild();
  return std::nullopt;
}

Scenario load_scenario(const std::string& name_or_path) {
  if (auto p = preset(name_or_path)) return *p;
  std::ifstream in(name_or_path);
  if (!in) throw IoError("cannot open scenario '" + name_or_path + "' (not a preset either)");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(name_or_path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace voipqos::harness
