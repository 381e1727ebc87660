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

#include "voipqos/knowledge.hpp"

#include <algorithm>
#include <tuple>

#include "voipqos/error.hpp"

namespace voipqos::knowledge {

using nlohmann::json;

double penalty(const HEstimate& h, const Constraints& c) { return h.delay_ms / c.delay_max_ms + h.loss / c.loss_max; }

QualityCategory category_of(const HEstimate& h) { return classify(make_sample(h.delay_ms, h.loss)); }

bool worse(const HEstimate& a, const HEstimate& b, const Constraints& c) {
  const auto ca = category_of(a);
  const auto cb = category_of(b);
  if (ca != cb) return better(cb, ca);
  return penalty(a, c) > penalty(b, c);
}

ScenarioCase detect_case(double delay_ms, double loss, const Constraints& c) {
  const bool d = c.delay_ok(delay_ms);
  const bool l = c.loss_ok(loss);
  if (d && l) return ScenarioCase::Case1;
  if (d) return ScenarioCase::Case2;
  if (l) return ScenarioCase::Case3;
  return ScenarioCase::Case4;
}

namespace {

const std::vector<ActionEntry> kEmpty;

// Smaller is preferred.
auto selection_key(const ActionEntry& e, const Constraints& c) {
  return std::make_tuple(-static_cast<int>(category_of(e.h)), penalty(e.h, c), e.rank, e.action.name());
}

}  // namespace

KnowledgeBase::KnowledgeBase(const actions::KnowledgeSeed& seed, Constraints constraints)
    : conflicts_(seed.conflicts), constraints_(constraints) {
  constraints_.validate();
  for (const auto& e : seed.entries) {
    auto& list = live(e.scase);
    for (const auto& other : list) {
      if (other.action.kind == e.action.kind) throw InvalidInput("duplicate action in case");
    }
    list.push_back(e);
  }
  for (auto& [c, list] : cases_) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  }
  check_invariants();
}

const std::vector<ActionEntry>& KnowledgeBase::entries(ScenarioCase c) const {
  auto it = cases_.find(c);
  return it == cases_.end() ? kEmpty : it->second;
}

const std::vector<ActionEntry>& KnowledgeBase::tombstones(ScenarioCase c) const {
  auto it = deleted_.find(c);
  return it == deleted_.end() ? kEmpty : it->second;
}

const ActionEntry* KnowledgeBase::find(ScenarioCase c, ActionKind k) const {
  for (const auto& e : entries(c)) {
    if (e.action.kind == k) return &e;
  }
  return nullptr;
}

int KnowledgeBase::rank_of(ScenarioCase c, ActionKind k) const {
  const auto* e = find(c, k);
  return e ? e->rank : 0;
}

std::optional<ActionEntry> KnowledgeBase::select_one_of(ScenarioCase c) const { return select_next(c, {}); }

std::optional<ActionEntry> KnowledgeBase::select_next(ScenarioCase c, const std::set<ActionKind>& tried) const {
  const ActionEntry* best = nullptr;
  for (const auto& e : entries(c)) {
    if (tried.count(e.action.kind)) continue;
    if (best == nullptr || selection_key(e, constraints_) < selection_key(*best, constraints_)) best = &e;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

void KnowledgeBase::acquire(ScenarioCase c, ActionKind k, const HEstimate& measured) {
  make_sample(measured.delay_ms, measured.loss);  // validates
  for (auto& e : live(c)) {
    if (e.action.kind == k) {
      e.h = measured;
      ++revision_;
      return;
    }
  }
  throw NotFound("action " + std::string(actions::to_string(k)) + " not in " + std::string(actions::to_string(c)));
}

RefineReport KnowledgeBase::refine(ScenarioCase c, ActionKind a_current) {
  auto& list = live(c);
  auto cur = std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.action.kind == a_current; });
  if (cur == list.end()) {
    throw NotFound("action " + std::string(actions::to_string(a_current)) + " not in " +
                   std::string(actions::to_string(c)));
  }
  const HEstimate h_cur = cur->h;
  RefineReport report;

  // Visit in pre-refinement rank order; ranks are read live.
  std::vector<ActionKind> order;
  for (const auto& e : list) order.push_back(e.action.kind);

  auto entry = [&](ActionKind k) -> ActionEntry& {
    return *std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.action.kind == k; });
  };
  for (auto k : order) {
    if (k == a_current) continue;
    ActionEntry& a = entry(k);
    ActionEntry& me = entry(a_current);
    if (a.rank >= me.rank || !worse(a.h, h_cur, constraints_)) continue;
    if (conflicts(k, a_current)) {
      me.rank = a.rank;
      report.deleted.push_back(k);
      auto it = std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.action.kind == k; });
      deleted_[c].push_back(*it);
      list.erase(it);
    } else {
      std::swap(a.rank, me.rank);
      report.swapped.push_back(k);
    }
  }
  if (report.changed()) {
    compact(c);
    ++revision_;
  }
  return report;
}

void KnowledgeBase::compact(ScenarioCase c) {
  auto& list = live(c);
  std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  int r = 1;
  for (auto& e : list) e.rank = r++;
}

void KnowledgeBase::check_invariants() const {
  for (const auto& [c, list] : cases_) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].rank != static_cast<int>(i) + 1) throw Error("ranks not contiguous in " + std::string(to_string(c)));
      if (list[i].scase != c) throw Error("entry filed under the wrong case");
      for (std::size_t j = 0; j < i; ++j) {
        if (list[j].action.kind == list[i].action.kind) throw Error("duplicate action in case");
      }
    }
  }
}

json action_to_json(const ActionId& a) {
  json params = json::object();
  auto red = [](const netsim::RedParams& p) {
    return json{{"min_th", p.min_th}, {"max_th", p.max_th}, {"max_p", p.max_p}, {"ewma_weight", p.ewma_weight}};
  };
  switch (a.kind) {
    case ActionKind::IncreaseBuffer:
    case ActionKind::DecreaseBuffer:
      params["step_pkts"] = a.step_pkts;
      break;
    case ActionKind::EnableRED:
      params = red(a.red);
      break;
    case ActionKind::EnableWRED:
      params["classes"] = json::array();
      for (const auto& p : a.wred) params["classes"].push_back(red(p));
      break;
    case ActionKind::EnableFEC:
      params["block_k"] = a.fec.block_k;
      params["parity"] = a.fec.parity;
      break;
    case ActionKind::ControlledLoad:
      break;
    case ActionKind::GuaranteedLoad:
      params["reserved_kbps"] = a.reserved_kbps;
      params["bucket_depth_pkts"] = a.bucket_depth_pkts;
      break;
  }
  return json{{"action", a.name()}, {"params", params}};
}

ActionId action_from_json(const json& j) {
  try {
    ActionId a;
    a.kind = actions::parse_kind(j.at("action").get<std::string>());
    const json params = j.value("params", json::object());
    auto red = [](const json& p) {
      netsim::RedParams r;
      r.min_th = p.at("min_th").get<double>();
      r.max_th = p.at("max_th").get<double>();
      r.max_p = p.at("max_p").get<double>();
      r.ewma_weight = p.value("ewma_weight", r.ewma_weight);
      return r;
    };
    switch (a.kind) {
      case ActionKind::IncreaseBuffer:
      case ActionKind::DecreaseBuffer:
        a.step_pkts = params.value("step_pkts", actions::kBufferStepPkts);
        break;
      case ActionKind::EnableRED:
        a.red = red(params);
        break;
      case ActionKind::EnableWRED:
        for (const auto& p : params.at("classes")) a.wred.push_back(red(p));
        break;
      case ActionKind::EnableFEC:
        a.fec.block_k = params.value("block_k", 4);
        a.fec.parity = params.value("parity", 1);
        break;
      case ActionKind::ControlledLoad:
        break;
      case ActionKind::GuaranteedLoad:
        a.reserved_kbps = params.value("reserved_kbps", 0.0);
        a.bucket_depth_pkts = params.value("bucket_depth_pkts", 1);
        break;
    }
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw ParseError(std::string("action: ") + e.what());
  }
}

namespace {

json entry_to_json(const ActionEntry& e) {
  json j = action_to_json(e.action);
  j["rank"] = e.rank;
  j["h_est"] = {{"delay_ms", e.h.delay_ms}, {"loss", e.h.loss}};
  return j;
}

ActionEntry entry_from_json(const json& j, ScenarioCase c) {
  ActionEntry e;
  e.action = action_from_json(j);
  e.scase = c;
  e.rank = j.at("rank").get<int>();
  e.h.delay_ms = j.at("h_est").at("delay_ms").get<double>();
  e.h.loss = j.at("h_est").at("loss").get<double>();
  return e;
}

json conflicts_to_json(const std::vector<ConflictSet>& sets) {
  json out = json::array();
  for (const auto& s : sets) {
    json m = json::array();
    for (auto k : s.members) m.push_back(actions::to_string(k));
    out.push_back(m);
  }
  return out;
}

}  // namespace

json KnowledgeBase::to_json() const {
  json j;
  j["version"] = 1;
  j["revision"] = revision_;
  j["cases"] = json::object();
  j["tombstones"] = json::object();
  for (auto c : actions::kAllCases) {
    json list = json::array();
    for (const auto& e : entries(c)) list.push_back(entry_to_json(e));
    j["cases"][std::string(actions::to_string(c))] = list;
    json dead = json::array();
    for (const auto& e : tombstones(c)) dead.push_back(entry_to_json(e));
    j["tombstones"][std::string(actions::to_string(c))] = dead;
  }
  j["conflicts"] = conflicts_to_json(conflicts_);
  return j;
}

KnowledgeBase KnowledgeBase::from_json(const json& j) {
  try {
    if (j.value("version", 0) != 1) throw ParseError("kb: unsupported version");
    actions::KnowledgeSeed seed;
    for (const auto& [name, list] : j.at("cases").items()) {
      const auto c = actions::parse_case(name);
      for (const auto& e : list) seed.entries.push_back(entry_from_json(e, c));
    }
    for (const auto& s : j.at("conflicts")) {
      ConflictSet cs;
      for (const auto& m : s) cs.members.push_back(actions::parse_kind(m.get<std::string>()));
      if (cs.members.size() < 2) throw ParseError("kb: conflict set needs at least two members");
      seed.conflicts.push_back(cs);
    }
    KnowledgeBase kb(seed);
    kb.revision_ = j.value("revision", std::uint64_t{0});
    if (j.contains("tombstones")) {
      for (const auto& [name, list] : j.at("tombstones").items()) {
        const auto c = actions::parse_case(name);
        for (const auto& e : list) kb.deleted_[c].push_back(entry_from_json(e, c));
      }
    }
    return kb;
  } catch (const json::exception& e) {
    throw ParseError(std::string("kb: ") + e.what());
  }
}

json seed_to_json(const actions::KnowledgeSeed& seed) { return KnowledgeBase(seed).to_json(); }

}  // namespace voipqos::knowledge
