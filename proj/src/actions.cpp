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

#include "voipqos/actions.hpp"

#include <algorithm>
#include <cmath>

#include "voipqos/error.hpp"

namespace voipqos::actions {

namespace {

struct SeedRow {
  ScenarioCase scase;
  ActionKind kind;
  double delay_ms;
  double loss;
};

constexpr SeedRow kSeed[] = {
#include "knowledge_seed.inc"
};

struct KindName {
  ActionKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {ActionKind::IncreaseBuffer, "IncreaseBuffer"}, {ActionKind::DecreaseBuffer, "DecreaseBuffer"},
    {ActionKind::EnableRED, "EnableRED"},           {ActionKind::EnableWRED, "EnableWRED"},
    {ActionKind::EnableFEC, "EnableFEC"},           {ActionKind::ControlledLoad, "ControlledLoad"},
    {ActionKind::GuaranteedLoad, "GuaranteedLoad"},
};

int threshold_floor(const netsim::Discipline& d) {
  return static_cast<int>(std::ceil(netsim::max_threshold(d)));
}

}  // namespace

std::string_view to_string(ActionKind k) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == k) return kn.name;
  }
  return "?";
}

ActionKind parse_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  throw ParseError("unknown action '" + std::string(name) + "'");
}

std::string_view to_string(ScenarioCase c) {
  switch (c) {
    case ScenarioCase::Case1:
      return "Case1";
    case ScenarioCase::Case2:
      return "Case2";
    case ScenarioCase::Case3:
      return "Case3";
    case ScenarioCase::Case4:
      return "Case4";
  }
  return "?";
}

ScenarioCase parse_case(std::string_view name) {
  for (auto c : kAllCases) {
    if (to_string(c) == name) return c;
  }
  throw ParseError("unknown case '" + std::string(name) + "'");
}

std::string_view to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::Delta1:
      return "d1";
    case TransitionKind::Delta2:
      return "d2";
    case TransitionKind::Delta3:
      return "d3";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Applied:
      return "applied";
    case Outcome::Stopped:
      return "stopped";
    case Outcome::NoOp:
      return "noop";
    case Outcome::Failed:
      return "failed";
  }
  return "?";
}

void ActionId::validate() const {
  switch (kind) {
    case ActionKind::IncreaseBuffer:
    case ActionKind::DecreaseBuffer:
      if (step_pkts < 1) throw InvalidInput("buffer step must be >= 1");
      break;
    case ActionKind::EnableRED:
      red.validate(kBufferMaxPkts);
      break;
    case ActionKind::EnableWRED:
      if (wred.empty()) throw InvalidInput("WRED needs at least one parameter set");
      for (const auto& p : wred) p.validate(kBufferMaxPkts);
      break;
    case ActionKind::EnableFEC:
      fec.validate();
      break;
    case ActionKind::ControlledLoad:
      break;
    case ActionKind::GuaranteedLoad:
      if (reserved_kbps < 0.0 || bucket_depth_pkts < 1) throw InvalidInput("invalid guaranteed parameters");
      break;
  }
}

ActionId ActionId::increase_buffer(int step) {
  ActionId a;
  a.kind = ActionKind::IncreaseBuffer;
  a.step_pkts = step;
  return a;
}

ActionId ActionId::decrease_buffer(int step) {
  ActionId a;
  a.kind = ActionKind::DecreaseBuffer;
  a.step_pkts = step;
  return a;
}

ActionId ActionId::enable_red(netsim::RedParams p) {
  ActionId a;
  a.kind = ActionKind::EnableRED;
  a.red = p;
  return a;
}

ActionId ActionId::enable_red_narrow() { return enable_red({30.0, 40.0, 0.1, 0.002}); }

ActionId ActionId::enable_wred() {
  ActionId a;
  a.kind = ActionKind::EnableWRED;
  a.wred = {{20.0, 60.0, 0.2, 0.002}, {50.0, 100.0, 0.05, 0.002}};
  return a;
}

ActionId ActionId::enable_fec(netsim::FecConfig f) {
  ActionId a;
  a.kind = ActionKind::EnableFEC;
  a.fec = f;
  return a;
}

ActionId ActionId::controlled_load() {
  ActionId a;
  a.kind = ActionKind::ControlledLoad;
  return a;
}

ActionId ActionId::guaranteed_load(double reserved_kbps, int depth) {
  ActionId a;
  a.kind = ActionKind::GuaranteedLoad;
  a.reserved_kbps = reserved_kbps;
  a.bucket_depth_pkts = depth;
  return a;
}

std::vector<ConflictSet> default_conflicts() {
  return {{{ActionKind::IncreaseBuffer, ActionKind::DecreaseBuffer}},
          {{ActionKind::ControlledLoad, ActionKind::GuaranteedLoad}},
          {{ActionKind::EnableRED, ActionKind::EnableWRED}}};
}

std::vector<ActionEntry> default_ordering() {
  using C = ScenarioCase;
  std::vector<ActionEntry> out;
  auto add = [&](C c, std::initializer_list<ActionId> list) {
    int rank = 1;
    for (const auto& a : list) out.push_back({a, c, rank++, {}});
  };
  add(C::Case1, {ActionId::guaranteed_load()});
  add(C::Case2, {ActionId::increase_buffer(), ActionId::enable_red(), ActionId::enable_fec(),
                 ActionId::controlled_load()});
  add(C::Case3, {ActionId::decrease_buffer(), ActionId::enable_wred(), ActionId::controlled_load()});
  add(C::Case4, {ActionId::controlled_load(), ActionId::enable_red_narrow()});
  return out;
}

KnowledgeSeed default_knowledge() {
  KnowledgeSeed seed;
  seed.entries = default_ordering();
  for (auto& e : seed.entries) {
    for (const auto& row : kSeed) {
      if (row.scase == e.scase && row.kind == e.action.kind) e.h = {row.delay_ms, row.loss};
    }
  }
  seed.conflicts = default_conflicts();
  return seed;
}

bool conflicts(const std::vector<ConflictSet>& sets, ActionKind a, ActionKind b) {
  if (a == b) return false;
  for (const auto& s : sets) {
    const bool has_a = std::find(s.members.begin(), s.members.end(), a) != s.members.end();
    const bool has_b = std::find(s.members.begin(), s.members.end(), b) != s.members.end();
    if (has_a && has_b) return true;
  }
  return false;
}

bool ActionEngine::active(netsim::FlowId call, ActionKind kind) const {
  auto it = active_.find(netsim::index_of(call));
  return it != active_.end() && it->second.count(kind) > 0;
}

std::vector<ActionKind> ActionEngine::active_kinds(netsim::FlowId call) const {
  std::vector<ActionKind> out;
  auto it = active_.find(netsim::index_of(call));
  if (it == active_.end()) return out;
  for (const auto& [k, _] : it->second) out.push_back(k);
  return out;
}

int ActionEngine::buffer_delta(netsim::FlowId call) const {
  int d = 0;
  auto it = active_.find(netsim::index_of(call));
  if (it == active_.end()) return 0;
  for (const auto& [_, a] : it->second) d += a.buffer_delta;
  return d;
}

TransitionRecord ActionEngine::apply_buffer(netsim::SimWorld& world, netsim::FlowId call, const ActionId& action,
                                            TransitionRecord rec) {
  const int cur = world.queue().capacity_pkts;
  const int lo = std::max(kBufferMinPkts, threshold_floor(world.queue().discipline));
  const int sign = action.kind == ActionKind::IncreaseBuffer ? 1 : -1;
  const int target = std::clamp(cur + sign * action.step_pkts, lo, std::max(lo, kBufferMaxPkts));
  if (target == cur) {
    rec.outcome = Outcome::NoOp;
    rec.detail += "buffer clamped at " + std::to_string(cur);
    return rec;
  }
  world.set_queue_capacity(target);
  auto& slot = active_[netsim::index_of(call)][action.kind];
  slot.action = action;
  slot.buffer_delta += target - cur;
  rec.outcome = Outcome::Applied;
  rec.detail += "buffer " + std::to_string(cur) + " -> " + std::to_string(target);
  return rec;
}

TransitionRecord ActionEngine::apply(netsim::SimWorld& world, netsim::FlowId call, const ActionId& action,
                                     TransitionKind kind) {
  action.validate();
  TransitionRecord rec;
  rec.kind = kind;
  rec.at = world.now();
  rec.call = call;
  rec.action = action;
  const auto& flow = world.media_config(call);

  const bool repeatable = action.kind == ActionKind::IncreaseBuffer || action.kind == ActionKind::DecreaseBuffer;
  if (!repeatable && active(call, action.kind)) {
    rec.outcome = Outcome::NoOp;
    rec.detail = "already active";
    return rec;
  }

  double reserve = 0.0;
  if (action.kind == ActionKind::GuaranteedLoad) {
    reserve = action.reserved_kbps > 0.0 ? action.reserved_kbps : flow.rate_kbps;
    double own = 0.0;
    if (const auto* g = std::get_if<netsim::Guaranteed>(&flow.service)) own = g->reserved_kbps;
    const double headroom = world.reservation_headroom_kbps() + own;
    if (reserve > headroom + 1e-9) {
      rec.outcome = Outcome::Failed;
      rec.detail = "admission refused: need " + std::to_string(reserve) + " kbps, headroom " +
                   std::to_string(headroom) + " kbps";
      return rec;
    }
  }

  for (auto other : active_kinds(call)) {
    if (conflicts(action.kind, other)) {
      stop(world, call, other, kind);
      rec.detail += "stopped " + std::string(to_string(other)) + "; ";
    }
  }

  if (repeatable) return apply_buffer(world, call, action, std::move(rec));

  Active slot;
  slot.action = action;
  switch (action.kind) {
    case ActionKind::EnableRED:
    case ActionKind::EnableWRED: {
      netsim::Discipline d = action.kind == ActionKind::EnableRED ? netsim::Discipline{netsim::Red{action.red}}
                                                                  : netsim::Discipline{netsim::Wred{action.wred}};
      slot.prev_discipline = world.queue().discipline;
      const int need = threshold_floor(d);
      if (world.queue().capacity_pkts < need) {
        slot.capacity_raise = need - world.queue().capacity_pkts;
        world.set_queue_capacity(need);
      }
      world.set_discipline(d);
      slot.installed = std::move(d);
      rec.detail += "discipline installed";
      if (slot.capacity_raise > 0) rec.detail += ", buffer raised by " + std::to_string(slot.capacity_raise);
      break;
    }
    case ActionKind::EnableFEC:
      slot.prev_fec = flow.fec;
      world.set_fec(call, action.fec);
      rec.detail += "fec k=" + std::to_string(action.fec.block_k);
      break;
    case ActionKind::ControlledLoad:
      slot.prev_service = flow.service;
      world.configure_service_class(call, netsim::ControlledLoad{});
      rec.detail += "controlled load";
      break;
    case ActionKind::GuaranteedLoad:
      slot.prev_service = flow.service;
      world.configure_service_class(call, netsim::Guaranteed{reserve, action.bucket_depth_pkts});
      rec.detail += "reserved " + std::to_string(reserve) + " kbps";
      break;
    default:
      break;
  }
  active_[netsim::index_of(call)][action.kind] = std::move(slot);
  rec.outcome = Outcome::Applied;
  return rec;
}

TransitionRecord ActionEngine::stop(netsim::SimWorld& world, netsim::FlowId call, ActionKind kind,
                                    TransitionKind tkind) {
  TransitionRecord rec;
  rec.kind = tkind;
  rec.at = world.now();
  rec.call = call;
  rec.stop = true;
  auto cit = active_.find(netsim::index_of(call));
  if (cit == active_.end() || cit->second.count(kind) == 0) {
    ActionId a;
    a.kind = kind;
    rec.action = a;
    rec.outcome = Outcome::NoOp;
    rec.detail = "not active";
    return rec;
  }
  Active slot = std::move(cit->second.at(kind));
  cit->second.erase(kind);
  rec.action = slot.action;

  switch (kind) {
    case ActionKind::IncreaseBuffer:
    case ActionKind::DecreaseBuffer: {
      const int cur = world.queue().capacity_pkts;
      const int lo = std::max(1, threshold_floor(world.queue().discipline));
      const int target = std::max(lo, cur - slot.buffer_delta);
      world.set_queue_capacity(target);
      rec.detail = "buffer " + std::to_string(cur) + " -> " + std::to_string(target);
      break;
    }
    case ActionKind::EnableRED:
    case ActionKind::EnableWRED:
      if (world.queue().discipline == slot.installed && slot.prev_discipline) {
        world.set_discipline(*slot.prev_discipline);
        rec.detail = "discipline restored";
      }
      if (slot.capacity_raise > 0) {
        const int lo = std::max(1, threshold_floor(world.queue().discipline));
        world.set_queue_capacity(std::max(lo, world.queue().capacity_pkts - slot.capacity_raise));
      }
      break;
    case ActionKind::EnableFEC:
      world.set_fec(call, slot.prev_fec ? *slot.prev_fec : std::nullopt);
      rec.detail = "fec off";
      break;
    case ActionKind::ControlledLoad:
    case ActionKind::GuaranteedLoad:
      world.configure_service_class(call, slot.prev_service ? *slot.prev_service : netsim::BestEffort{});
      rec.detail = "service restored";
      break;
  }
  rec.outcome = Outcome::Stopped;
  return rec;
}

std::vector<TransitionRecord> ActionEngine::stop_all(netsim::SimWorld& world, netsim::FlowId call,
                                                     TransitionKind tkind) {
  std::vector<TransitionRecord> out;
  for (auto k : active_kinds(call)) out.push_back(stop(world, call, k, tkind));
  return out;
}

}  // namespace voipqos::actions
