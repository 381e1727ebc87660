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

#include "voipqos/controller.hpp"

#include <algorithm>
#include <cmath>

#include "voipqos/error.hpp"

namespace voipqos::controller {

using actions::TransitionKind;

std::string_view to_string(Entering e) {
  switch (e) {
    case Entering::Start:
      return "start";
    case Entering::Delta1:
      return "d1";
    case Entering::Delta2:
      return "d2";
    case Entering::Delta3:
      return "d3";
    case Entering::Goal:
      return "goal";
  }
  return "?";
}

GlobalCheck check_global(std::span<const HeuristicSample> samples, std::span<const double> weights,
                         const Constraints& c) {
  if (samples.size() != weights.size()) throw InvalidInput("check_global: samples and weights differ in length");
  GlobalCheck out;
  if (samples.empty()) return out;
  std::vector<double> d, l, m;
  d.reserve(samples.size());
  l.reserve(samples.size());
  m.reserve(samples.size());
  for (const auto& s : samples) {
    d.push_back(s.delay_ms);
    l.push_back(s.loss);
    m.push_back(s.mos);
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidInput("check_global: weights must be > 0");
  }
  out.means = kernels::weighted_means(weights, d, l, m);
  out.ok = c.delay_ok(out.means.delay_ms) && c.loss_ok(out.means.loss) && c.mos_ok(out.means.mos);
  return out;
}

Controller::Controller(netsim::SimWorld& world, knowledge::KnowledgeBase& kb, ControllerOptions options)
    : world_(world), kb_(kb), opts_(options) {}

Controller::Call& Controller::mut(CallId id) {
  for (auto& c : calls_) {
    if (c.id == id) return c;
  }
  throw NotFound("unknown call");
}

const Controller::Call& Controller::call(CallId id) const {
  for (const auto& c : calls_) {
    if (c.id == id) return c;
  }
  throw NotFound("unknown call");
}

CallId Controller::add_call(netsim::MediaFlowConfig flow, double weight, Constraints constraints) {
  if (!(weight > 0.0)) throw InvalidInput("call weight must be > 0");
  constraints.validate();
  flow.start = world_.now();
  const CallId id = world_.add_media_flow(std::move(flow));
  Call c;
  c.id = id;
  c.weight = weight;
  c.constraints = constraints;
  c.started = world_.now();
  calls_.push_back(std::move(c));
  open_state(calls_.back(), Entering::Start, "call initiation");
  return id;
}

void Controller::end_call(CallId id) {
  Call& c = mut(id);
  if (c.ended) return;
  for (auto& rec : engine_.stop_all(world_, id, TransitionKind::Delta2)) log(c, std::move(rec), "call", 0);
  world_.stop_media_flow(id);
  open_state(c, Entering::Goal, "call termination");
  c.states.back().closed = world_.now();
  c.ended = true;
  c.episode.reset();
}

CallState& Controller::open_state(Call& c, Entering kind, std::string cause) {
  const SimTime now = world_.now();
  if (!c.states.empty()) c.states.back().closed = now;
  CallState s;
  s.state_id = next_state_id_++;
  s.call = c.id;
  s.opened = now;
  s.entering = kind;
  s.cause = std::move(cause);
  if (!c.states.empty()) s.category = c.states.back().category;
  c.states.push_back(std::move(s));
  c.drift_count = 0;
  return c.states.back();
}

void Controller::log(Call& c, actions::TransitionRecord rec, std::string cause, std::uint64_t to_state) {
  Transition t;
  t.g_at_decision = c.states.size() > 1 && to_state != 0 ? c.states[c.states.size() - 2].g.as_sample()
                                                         : c.current().g.as_sample();
  t.from_state = to_state != 0 && c.states.size() > 1 ? c.states[c.states.size() - 2].state_id : c.current().state_id;
  t.record = std::move(rec);
  t.cause = std::move(cause);
  t.to_state = to_state;
  t.constraints = c.constraints;
  transitions_.push_back(std::move(t));
}

namespace {

void absorb(CallState& s, const HeuristicSample& m) {
  s.g = update_window(s.g, m.delay_ms, m.loss);
  s.sample = m;
  s.category = classify(s.g.as_sample());
}

}  // namespace

void Controller::observe(Call& c, const std::optional<HeuristicSample>& m, bool network_fired,
                         const std::string& why) {
  if (network_fired) {
    absorb(open_state(c, Entering::Delta1, "network: " + why), *m);
    if (c.episode && c.exhausted_logged) c.replan = true;
    return;
  }
  CallState& s = c.states.back();
  if (s.g.samples == 0) {
    absorb(s, *m);
    return;
  }
  if (classify(*m) != s.category) {
    absorb(open_state(c, Entering::Delta1, "heuristics: category " + std::string(to_string(classify(*m)))), *m);
    return;
  }
  const double d_tol = std::max(opts_.drift_fraction * s.g.avg_delay_ms, opts_.drift_floor_delay_ms);
  const double l_tol = std::max(opts_.drift_fraction * s.g.avg_loss, opts_.drift_floor_loss);
  const bool drifted = std::abs(m->delay_ms - s.g.avg_delay_ms) > d_tol || std::abs(m->loss - s.g.avg_loss) > l_tol;
  if (drifted && ++c.drift_count >= opts_.drift_windows) {
    absorb(open_state(c, Entering::Delta1, "heuristics: drift"), *m);
    return;
  }
  if (!drifted) c.drift_count = 0;
  absorb(s, *m);
}

std::vector<ActionKind> Controller::plan_for(ScenarioCase sc) const {
  std::vector<ActionKind> plan;
  std::set<ActionKind> taken;
  while (auto e = kb_.select_next(sc, taken)) {
    plan.push_back(e->action.kind);
    taken.insert(e->action.kind);
  }
  return plan;
}

void Controller::start_segment(Call& c, ScenarioCase sc) {
  episodes_[*c.episode].segments.push_back({sc, plan_for(sc), {}});
  c.tried.clear();
  c.repeats = 0;
  c.exhausted_logged = false;
  c.replan = false;
}

void Controller::ensure_episode(Call& c, ScenarioCase sc) {
  if (!c.episode) {
    Episode ep;
    ep.call = c.id;
    ep.started = world_.now();
    episodes_.push_back(std::move(ep));
    c.episode = episodes_.size() - 1;
    c.last_action.reset();
    c.last_case.reset();
    start_segment(c, sc);
    return;
  }
  if (episodes_[*c.episode].segments.back().scase != sc || c.replan) start_segment(c, sc);
}

void Controller::close_episode(Call& c) {
  Episode& ep = episodes_[*c.episode];
  ep.closed = world_.now();
  ep.final_action = c.last_action;
  ep.final_case = c.last_case;
  if (opts_.learning && c.last_action && c.last_case && kb_.find(*c.last_case, *c.last_action)) {
    kb_.refine(*c.last_case, *c.last_action);
  }
  c.episode.reset();
  c.tried.clear();
  c.last_action.reset();
  c.last_case.reset();
  c.repeats = 0;
}

bool Controller::try_apply(Call& c, ActionKind kind, const actions::ActionId& a, TransitionKind tk,
                           const std::string& cause) {
  const HeuristicSample before = c.current().g.as_sample();
  auto rec = engine_.apply(world_, c.id, a, tk);
  if (rec.outcome != actions::Outcome::Applied) {
    log(c, std::move(rec), cause, 0);
    return false;
  }
  const Entering e = tk == TransitionKind::Delta3 ? Entering::Delta3 : Entering::Delta2;
  const auto id = open_state(c, e, cause + ": " + std::string(actions::to_string(kind))).state_id;
  log(c, std::move(rec), cause, id);
  c.last_action = kind;
  c.last_case = episodes_[*c.episode].segments.back().scase;
  c.pending_acquire = true;
  c.before_action = before;
  if (tk == TransitionKind::Delta2) episodes_[*c.episode].segments.back().applied.push_back(kind);
  return true;
}

void Controller::step_call(Call& c) {
  const CallState& s = c.current();
  if (s.g.samples == 0) return;
  const HeuristicSample g = s.g.as_sample();
  const bool sat = c.constraints.satisfied(g);
  c.status = sat ? CallStatus::Accepted : CallStatus::Degraded;

  if (c.pending_acquire) {
    if (opts_.learning && c.last_action && c.last_case && kb_.find(*c.last_case, *c.last_action)) {
      kb_.acquire(*c.last_case, *c.last_action, {g.delay_ms, g.loss});
    }
    c.pending_acquire = false;
  }
  if (sat) {
    if (c.episode) close_episode(c);
    return;
  }

  const ScenarioCase sc = knowledge::detect_case(g.delay_ms, g.loss, c.constraints);
  ensure_episode(c, sc);
  PlanSegment& seg = episodes_[*c.episode].segments.back();

  // Keep stepping the buffer while it pays off.
  if (c.last_action && c.last_case == sc && !seg.applied.empty() && seg.applied.back() == *c.last_action &&
      c.repeats < opts_.max_buffer_repeats) {
    const auto k = *c.last_action;
    bool improving = false;
    if (k == ActionKind::IncreaseBuffer) {
      improving = c.before_action.loss - g.loss > opts_.drift_floor_loss && c.constraints.delay_ok(g.delay_ms);
    } else if (k == ActionKind::DecreaseBuffer) {
      improving =
          c.before_action.delay_ms - g.delay_ms > opts_.drift_floor_delay_ms && c.constraints.loss_ok(g.loss);
    }
    if (improving) {
      if (const auto* e = kb_.find(sc, k); e && try_apply(c, k, e->action, TransitionKind::Delta2, "action")) {
        ++c.repeats;
        return;
      }
    }
  }

  for (auto k : seg.plan) {
    if (c.tried.count(k)) continue;
    c.tried.insert(k);
    const auto* e = kb_.find(sc, k);
    if (e == nullptr) continue;
    const actions::ActionId a = e->action;
    if (try_apply(c, k, a, TransitionKind::Delta2, "action")) {
      c.repeats = 0;
      return;
    }
  }
  if (!c.exhausted_logged) {
    episodes_[*c.episode].exhausted = true;
    c.exhausted_logged = true;
    actions::TransitionRecord rec;
    rec.kind = TransitionKind::Delta2;
    rec.at = world_.now();
    rec.call = c.id;
    rec.outcome = actions::Outcome::NoOp;
    rec.detail = "no untried action for " + std::string(actions::to_string(sc));
    log(c, std::move(rec), "exhausted", 0);
  }
}

void Controller::coordinate() {
  std::vector<Call*> accepted, degraded;
  for (auto& c : calls_) {
    if (c.ended || c.current().g.samples == 0) continue;
    (c.constraints.satisfied(c.current().g.as_sample()) ? accepted : degraded).push_back(&c);
  }
  if (degraded.empty()) return;
  for (Call* c : accepted) {
    if (engine_.active_kinds(c->id).empty()) continue;
    auto recs = engine_.stop_all(world_, c->id, TransitionKind::Delta3);
    const auto id = open_state(*c, Entering::Delta3, "coordination: released").state_id;
    for (auto& r : recs) log(*c, std::move(r), "coordination", id);
    c->coordinated = true;
  }
  for (Call* c : degraded) {
    const HeuristicSample g = c->current().g.as_sample();
    const ScenarioCase sc = knowledge::detect_case(g.delay_ms, g.loss, c->constraints);
    const auto best = kb_.select_one_of(sc);
    if (!best || engine_.active(c->id, best->action.kind)) continue;
    if (c->pending_acquire) {
      if (opts_.learning && c->last_action && c->last_case && kb_.find(*c->last_case, *c->last_action)) {
        kb_.acquire(*c->last_case, *c->last_action, {g.delay_ms, g.loss});
      }
      c->pending_acquire = false;
    }
    ensure_episode(*c, sc);
    c->tried.insert(best->action.kind);
    if (try_apply(*c, best->action.kind, best->action, TransitionKind::Delta3, "coordination")) {
      c->coordinated = true;
      c->status = CallStatus::Degraded;
    }
  }
}

void Controller::tick() {
  const auto fired = world_.take_fired_changes();
  std::string why;
  for (const auto& f : fired) {
    if (!why.empty()) why += "; ";
    why += f.describe();
  }

  std::vector<HeuristicSample> samples;
  std::vector<double> weights;
  for (auto& c : calls_) {
    c.coordinated = false;
    if (c.ended) continue;
    const auto m = world_.measure(c.id);
    if (m) observe(c, m, !fired.empty(), why);
    const CallState& s = c.current();
    WindowRecord w;
    w.at = world_.now();
    w.call = c.id;
    w.state_id = s.state_id;
    w.window = m;
    if (s.g.samples > 0) {
      w.g = s.g.as_sample();
      w.satisfied = c.constraints.satisfied(w.g);
      samples.push_back(w.g);
      weights.push_back(c.weight);
    }
    windows_.push_back(w);
  }

  if (!samples.empty()) {
    const auto gc = check_global(samples, weights);
    global_.push_back({world_.now(), samples.size(), gc.means, gc.ok});
    if (opts_.act && samples.size() >= 2 && !gc.ok && cooldown_ == 0) {
      coordinate();
      cooldown_ = opts_.coordination_cooldown_windows;
    } else if (cooldown_ > 0) {
      --cooldown_;
    }
  }

  for (auto& c : calls_) {
    if (c.ended || c.coordinated) continue;
    if (!opts_.act) {
      if (c.current().g.samples > 0) {
        c.status = c.constraints.satisfied(c.current().g.as_sample()) ? CallStatus::Accepted : CallStatus::Degraded;
      }
      continue;
    }
    step_call(c);
  }
}

std::vector<std::string> validate_trace(const Controller& ctl) {
  std::vector<std::string> errors;
  auto err = [&](std::uint32_t call, const std::string& msg) {
    errors.push_back("call " + std::to_string(call) + ": " + msg);
  };
  for (const auto& c : ctl.calls()) {
    const auto id = netsim::index_of(c.id);
    if (c.states.empty()) {
      err(id, "no states");
      continue;
    }
    if (c.states.front().entering != Entering::Start) err(id, "first state is not Start");
    for (std::size_t i = 0; i < c.states.size(); ++i) {
      const auto& s = c.states[i];
      if (i > 0 && s.entering == Entering::Start) err(id, "second Start state");
      if (s.entering == Entering::Goal && i + 1 != c.states.size()) err(id, "Goal is not the last state");
      if (i > 0) {
        const auto& p = c.states[i - 1];
        if (s.opened < p.opened) err(id, "states out of order");
        if (!p.closed || *p.closed != s.opened) err(id, "state intervals overlap or leave a gap");
      }
    }
    if (c.ended && c.states.back().entering != Entering::Goal) err(id, "ended call without Goal");
  }
  for (const auto& t : ctl.transitions()) {
    const auto& r = t.record;
    if (r.stop || r.outcome != actions::Outcome::Applied) continue;
    const auto& g = t.g_at_decision;
    const auto& k = t.constraints;
    const bool holds = g.delay_ms <= k.delay_max_ms && g.loss <= k.loss_max && g.mos >= k.mos_min;
    if (holds) {
      err(netsim::index_of(r.call), "action " + std::string(r.action ? r.action->name() : "?") + " applied at " +
                                        format_ms(r.at.ns()) + " ms while constraints held");
    }
    if (r.kind == TransitionKind::Delta1) err(netsim::index_of(r.call), "action recorded as d1");
  }
  for (const auto& ep : ctl.episodes()) {
    for (const auto& seg : ep.segments) {
      std::size_t pos = 0;
      for (auto k : seg.applied) {
        auto it = std::find(seg.plan.begin(), seg.plan.end(), k);
        if (it == seg.plan.end()) {
          err(netsim::index_of(ep.call), "applied action outside plan");
          continue;
        }
        const auto idx = static_cast<std::size_t>(it - seg.plan.begin());
        if (idx < pos) err(netsim::index_of(ep.call), "actions applied out of plan order");
        pos = idx;
      }
    }
  }
  return errors;
}

}  // namespace voipqos::controller
