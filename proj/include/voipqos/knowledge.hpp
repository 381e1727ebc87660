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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "voipqos/actions.hpp"
#include "voipqos/metrics.hpp"

namespace voipqos::knowledge {

using actions::ActionEntry;
using actions::ActionId;
using actions::ActionKind;
using actions::ConflictSet;
using actions::HEstimate;
using actions::ScenarioCase;

/// delay/180 + loss/0.05; each term is 1 at its threshold.
double penalty(const HEstimate& h, const Constraints& c = {});

QualityCategory category_of(const HEstimate& h);

/// Category first, penalty within a category.
bool worse(const HEstimate& a, const HEstimate& b, const Constraints& c = {});

ScenarioCase detect_case(double delay_ms, double loss, const Constraints& c = {});

struct RefineReport {
  std::vector<ActionKind> swapped;  // partners a_current swapped ranks with, in order
  std::vector<ActionKind> deleted;
  bool changed() const { return !swapped.empty() || !deleted.empty(); }
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(const actions::KnowledgeSeed& seed, Constraints constraints = {});

  /// Live entries of a case in rank order.
  const std::vector<ActionEntry>& entries(ScenarioCase c) const;
  const std::vector<ActionEntry>& tombstones(ScenarioCase c) const;
  const std::vector<ConflictSet>& conflict_sets() const { return conflicts_; }
  std::uint64_t revision() const { return revision_; }
  const Constraints& constraints() const { return constraints_; }

  const ActionEntry* find(ScenarioCase c, ActionKind k) const;
  /// 0 when absent.
  int rank_of(ScenarioCase c, ActionKind k) const;

  /// Entry with the best h estimate; ties go to lower rank, then name.
  std::optional<ActionEntry> select_one_of(ScenarioCase c) const;
  /// Best entry not in `tried`; nullopt once every entry has been tried.
  std::optional<ActionEntry> select_next(ScenarioCase c, const std::set<ActionKind>& tried) const;

  /// h of the entry becomes the measured g. Throws NotFound.
  void acquire(ScenarioCase c, ActionKind k, const HEstimate& measured);

  /// Re-ranks entries ranked above `a_current` whose h is worse than its h:
  /// conflicting ones are replaced and deleted, others swap ranks with it.
  /// Throws NotFound when a_current is not in the case.
  RefineReport refine(ScenarioCase c, ActionKind a_current);

  bool conflicts(ActionKind a, ActionKind b) const { return actions::conflicts(conflicts_, a, b); }

  /// Asserts rank contiguity and uniqueness; throws Error on violation.
  void check_invariants() const;

  nlohmann::json to_json() const;
  static KnowledgeBase from_json(const nlohmann::json& j);

 private:
  std::vector<ActionEntry>& live(ScenarioCase c) { return cases_[c]; }
  void compact(ScenarioCase c);

  std::map<ScenarioCase, std::vector<ActionEntry>> cases_;
  std::map<ScenarioCase, std::vector<ActionEntry>> deleted_;
  std::vector<ConflictSet> conflicts_;
  Constraints constraints_{};
  std::uint64_t revision_ = 0;
};

nlohmann::json action_to_json(const ActionId& a);
ActionId action_from_json(const nlohmann::json& j);

/// Seed in kb.json shape, revision 0.
nlohmann::json seed_to_json(const actions::KnowledgeSeed& seed);

}  // namespace voipqos::knowledge
