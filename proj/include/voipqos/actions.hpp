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
#include <string>
#include <string_view>
#include <vector>

#include "voipqos/netsim.hpp"

namespace voipqos::actions {

enum class ActionKind : std::uint8_t {
  IncreaseBuffer,
  DecreaseBuffer,
  EnableRED,
  EnableWRED,
  EnableFEC,
  ControlledLoad,
  GuaranteedLoad,
};

inline constexpr ActionKind kAllKinds[] = {ActionKind::IncreaseBuffer, ActionKind::DecreaseBuffer,
                                           ActionKind::EnableRED,      ActionKind::EnableWRED,
                                           ActionKind::EnableFEC,      ActionKind::ControlledLoad,
                                           ActionKind::GuaranteedLoad};

std::string_view to_string(ActionKind k);
/// Throws ParseError on an unknown name.
ActionKind parse_kind(std::string_view name);

inline constexpr int kBufferStepPkts = 15;
inline constexpr int kBufferMinPkts = 10;
inline constexpr int kBufferMaxPkts = 200;

/// A QoS mechanism with its parameters. Only the fields relevant to `kind`
/// are meaningful; the factories below fill them.
struct ActionId {
  ActionKind kind = ActionKind::IncreaseBuffer;
  int step_pkts = kBufferStepPkts;
  netsim::RedParams red{};
  std::vector<netsim::RedParams> wred;
  netsim::FecConfig fec{};
  /// 0 reserves the flow's own codec rate.
  double reserved_kbps = 0.0;
  int bucket_depth_pkts = 1;

  std::string_view name() const { return to_string(kind); }
  void validate() const;
  friend bool operator==(const ActionId&, const ActionId&) = default;

  static ActionId increase_buffer(int step = kBufferStepPkts);
  static ActionId decrease_buffer(int step = kBufferStepPkts);
  static ActionId enable_red(netsim::RedParams p = {});
  /// Tight thresholds, used when delay and loss are both violated.
  static ActionId enable_red_narrow();
  /// Stricter set for background (priority 0), default set for media.
  static ActionId enable_wred();
  static ActionId enable_fec(netsim::FecConfig f = {});
  static ActionId controlled_load();
  static ActionId guaranteed_load(double reserved_kbps = 0.0, int depth = 1);
};

/// Derived from delay and loss against the local thresholds only.
enum class ScenarioCase : std::uint8_t { Case1 = 1, Case2 = 2, Case3 = 3, Case4 = 4 };

inline constexpr ScenarioCase kAllCases[] = {ScenarioCase::Case1, ScenarioCase::Case2, ScenarioCase::Case3,
                                             ScenarioCase::Case4};

std::string_view to_string(ScenarioCase c);
ScenarioCase parse_case(std::string_view name);

/// Predicted (delay, loss) after applying an action.
struct HEstimate {
  double delay_ms = 0.0;
  double loss = 0.0;
  friend bool operator==(const HEstimate&, const HEstimate&) = default;
};

struct ActionEntry {
  ActionId action;
  ScenarioCase scase = ScenarioCase::Case1;
  int rank = 1;
  HEstimate h{};
  friend bool operator==(const ActionEntry&, const ActionEntry&) = default;
};

struct ConflictSet {
  std::vector<ActionKind> members;
  friend bool operator==(const ConflictSet&, const ConflictSet&) = default;
};

struct KnowledgeSeed {
  std::vector<ActionEntry> entries;
  std::vector<ConflictSet> conflicts;
};

/// The analysis-phase ordering per case with calibrated h estimates.
KnowledgeSeed default_knowledge();
/// The three mutually exclusive groups: buffer direction, service class,
/// queue discipline.
std::vector<ConflictSet> default_conflicts();
/// Default entries per case, h left at zero. Calibration fills h.
std::vector<ActionEntry> default_ordering();

bool conflicts(const std::vector<ConflictSet>& sets, ActionKind a, ActionKind b);
inline bool conflicts(ActionKind a, ActionKind b) { return conflicts(default_conflicts(), a, b); }

enum class TransitionKind : std::uint8_t { Delta1 = 1, Delta2 = 2, Delta3 = 3 };
std::string_view to_string(TransitionKind k);

enum class Outcome : std::uint8_t { Applied, Stopped, NoOp, Failed };
std::string_view to_string(Outcome o);

struct TransitionRecord {
  TransitionKind kind = TransitionKind::Delta2;
  SimTime at{};
  netsim::FlowId call{};
  std::optional<ActionId> action;
  bool stop = false;
  Outcome outcome = Outcome::NoOp;
  std::string detail;
};

/// Tracks which mechanisms each call turned on and what they displaced, so
/// a stop undoes only that call's contribution.
class ActionEngine {
 public:
  TransitionRecord apply(netsim::SimWorld& world, netsim::FlowId call, const ActionId& action,
                         TransitionKind kind = TransitionKind::Delta2);
  TransitionRecord stop(netsim::SimWorld& world, netsim::FlowId call, ActionKind kind,
                        TransitionKind tkind = TransitionKind::Delta2);
  std::vector<TransitionRecord> stop_all(netsim::SimWorld& world, netsim::FlowId call,
                                         TransitionKind tkind = TransitionKind::Delta3);

  bool active(netsim::FlowId call, ActionKind kind) const;
  std::vector<ActionKind> active_kinds(netsim::FlowId call) const;

  /// Net buffer change this call holds (packets).
  int buffer_delta(netsim::FlowId call) const;

 private:
  struct Active {
    ActionId action;
    int buffer_delta = 0;
    int capacity_raise = 0;
    std::optional<netsim::Discipline> prev_discipline;
    netsim::Discipline installed = netsim::TailDrop{};
    std::optional<netsim::ServiceClass> prev_service;
    std::optional<std::optional<netsim::FecConfig>> prev_fec;
  };

  TransitionRecord apply_buffer(netsim::SimWorld& world, netsim::FlowId call, const ActionId& action,
                                TransitionRecord rec);

  std::map<std::uint32_t, std::map<ActionKind, Active>> active_;
};

}  // namespace voipqos::actions
