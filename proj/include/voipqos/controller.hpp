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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "voipqos/actions.hpp"
#include "voipqos/kernels.hpp"
#include "voipqos/knowledge.hpp"
#include "voipqos/metrics.hpp"
#include "voipqos/netsim.hpp"

namespace voipqos::controller {

using actions::ActionKind;
using actions::ScenarioCase;
using CallId = netsim::FlowId;

enum class Entering : std::uint8_t { Start, Delta1, Delta2, Delta3, Goal };
std::string_view to_string(Entering e);

struct CallState {
  std::uint64_t state_id = 0;
  CallId call{};
  SimTime opened{};
  std::optional<SimTime> closed;
  Entering entering = Entering::Start;
  std::string cause;
  WindowStats g{};
  /// Last window absorbed into g.
  HeuristicSample sample{};
  QualityCategory category = QualityCategory::Excellent;
};

enum class CallStatus : std::uint8_t { Accepted, Degraded };

/// One pass over a case's ordering, frozen when the case was entered.
struct PlanSegment {
  ScenarioCase scase = ScenarioCase::Case1;
  std::vector<ActionKind> plan;
  std::vector<ActionKind> applied;  // delta-2 applications in order, repeats included
};

struct Episode {
  CallId call{};
  SimTime started{};
  std::optional<SimTime> closed;
  std::vector<PlanSegment> segments;
  std::optional<ActionKind> final_action;
  std::optional<ScenarioCase> final_case;
  bool exhausted = false;

  std::optional<double> time_to_satisfaction_s() const {
    if (!closed) return std::nullopt;
    return (*closed - started).s();
  }
};

/// Everything the controller did or saw at a decision point.
struct Transition {
  actions::TransitionRecord record;
  /// "network", "heuristics", "action", "coordination", "exhausted", "call".
  std::string cause;
  std::uint64_t from_state = 0;
  std::uint64_t to_state = 0;  // 0 when no state was opened
  /// g of the call's current state when the decision was taken.
  HeuristicSample g_at_decision{};
  Constraints constraints{};
};

struct WindowRecord {
  SimTime at{};
  CallId call{};
  std::uint64_t state_id = 0;
  /// Raw window measurement; nullopt when the window carried no packets.
  std::optional<HeuristicSample> window;
  /// Running g of the current state after the window.
  HeuristicSample g{};
  bool satisfied = true;
};

struct GlobalRecord {
  SimTime at{};
  std::size_t calls = 0;
  kernels::WeightedMeans means{};
  bool ok = true;
};

struct GlobalCheck {
  bool ok = true;
  kernels::WeightedMeans means{};
};

/// Weighted means of delay, loss and MOS over the calls' samples, checked
/// against one shared set of thresholds.
GlobalCheck check_global(std::span<const HeuristicSample> samples, std::span<const double> weights,
                         const Constraints& c = {});

struct ControllerOptions {
  /// false: observe and record only (baseline runs).
  bool act = true;
  bool learning = true;
  double window_s = kDefaultWindowSeconds;
  double drift_fraction = 0.2;
  double drift_floor_delay_ms = 5.0;
  double drift_floor_loss = 0.005;
  int drift_windows = 2;
  int coordination_cooldown_windows = 2;
  int max_buffer_repeats = 6;
  double emergency_weight = 2.0;
};

class Controller {
 public:
  struct Call {
    CallId id{};
    Constraints constraints{};
    double weight = 1.0;
    std::vector<CallState> states;
    CallStatus status = CallStatus::Accepted;
    bool ended = false;
    SimTime started{};

    // Observation.
    int drift_count = 0;
    bool replan = false;
    bool coordinated = false;

    // Current episode, index into episodes_.
    std::optional<std::size_t> episode;
    std::set<ActionKind> tried;
    std::optional<ActionKind> last_action;
    std::optional<ScenarioCase> last_case;
    bool pending_acquire = false;
    int repeats = 0;
    HeuristicSample before_action{};
    bool exhausted_logged = false;

    const CallState& current() const { return states.back(); }
  };

  Controller(netsim::SimWorld& world, knowledge::KnowledgeBase& kb, ControllerOptions options = {});

  /// Starts a media flow now and opens its Start state.
  CallId add_call(netsim::MediaFlowConfig flow, double weight = 1.0, Constraints constraints = {});
  /// Stops every action of the call, ends its flow and opens the Goal state.
  void end_call(CallId id);

  /// One control iteration at the end of a window: observe, coordinate,
  /// then per-call steps. The world must already be advanced to now.
  void tick();

  const std::vector<Call>& calls() const { return calls_; }
  const Call& call(CallId id) const;
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<Episode>& episodes() const { return episodes_; }
  const std::vector<WindowRecord>& windows() const { return windows_; }
  const std::vector<GlobalRecord>& global_log() const { return global_; }
  const ControllerOptions& options() const { return opts_; }
  const actions::ActionEngine& engine() const { return engine_; }

 private:
  Call& mut(CallId id);
  CallState& open_state(Call& c, Entering kind, std::string cause);
  void observe(Call& c, const std::optional<HeuristicSample>& m, bool network_fired, const std::string& why);
  void step_call(Call& c);
  void coordinate();
  bool try_apply(Call& c, ActionKind kind_hint, const actions::ActionId& a, actions::TransitionKind tk,
                 const std::string& cause);
  void close_episode(Call& c);
  void ensure_episode(Call& c, ScenarioCase sc);
  void start_segment(Call& c, ScenarioCase sc);
  std::vector<ActionKind> plan_for(ScenarioCase sc) const;
  void log(Call& c, actions::TransitionRecord rec, std::string cause, std::uint64_t to_state);

  netsim::SimWorld& world_;
  knowledge::KnowledgeBase& kb_;
  ControllerOptions opts_;
  actions::ActionEngine engine_;
  std::vector<Call> calls_;
  std::vector<Transition> transitions_;
  std::vector<Episode> episodes_;
  std::vector<WindowRecord> windows_;
  std::vector<GlobalRecord> global_;
  std::uint64_t next_state_id_ = 1;
  int cooldown_ = 0;
};

/// Independent checks over a finished run: state ordering per call, entering
/// kinds, no action applied while the deciding g satisfied the constraints,
/// delta-2 order within each plan segment. Returns one message per problem.
std::vector<std::string> validate_trace(const Controller& ctl);

}  // namespace voipqos::controller
