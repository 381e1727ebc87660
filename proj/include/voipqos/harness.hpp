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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "voipqos/actions.hpp"
#include "voipqos/controller.hpp"
#include "voipqos/knowledge.hpp"
#include "voipqos/netsim.hpp"

namespace voipqos::harness {

inline constexpr int kScenarioVersion = 1;

struct CallSpec {
  double rate_kbps = 26.0;
  double packet_interval_ms = 20.0;
  int priority = 1;
  double jitter_ms = 2.0;
  double weight = 1.0;
  double start_s = 0.0;
  /// Defaults to the end of the scenario.
  std::optional<double> end_s;

  netsim::MediaFlowConfig flow() const;
  friend bool operator==(const CallSpec&, const CallSpec&) = default;
};

struct Scenario {
  std::string name;
  double duration_s = 60.0;
  double window_s = kDefaultWindowSeconds;
  bool learning = true;
  netsim::LinkConfig link{};
  netsim::QueueConfig queue{};
  std::vector<netsim::BackgroundConfig> background;
  std::vector<netsim::NetworkChange> timeline;
  std::vector<CallSpec> calls;
  std::optional<Constraints> constraints;

  /// Throws ParseError naming the offending field.
  void validate() const;
  netsim::WorldConfig world() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

std::vector<std::string> preset_names();
std::optional<Scenario> preset(const std::string& name);
/// A preset name, or a path to a scenario file.
Scenario load_scenario(const std::string& name_or_path);

enum class Mode : std::uint8_t { Calibrate, Control, Baseline };
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

struct RunOptions {
  std::uint64_t seed = 1;
  Mode mode = Mode::Control;
  /// Overrides the scenario's learning flag.
  std::optional<bool> learning;
  /// Starting knowledge; default_knowledge() when unset.
  std::optional<knowledge::KnowledgeBase> kb;
  controller::ControllerOptions controller{};
};

struct RunResult {
  Scenario scenario;
  Mode mode = Mode::Control;
  std::uint64_t seed = 1;
  bool learning = true;
  std::unique_ptr<netsim::SimWorld> world;
  std::unique_ptr<knowledge::KnowledgeBase> kb;
  std::unique_ptr<controller::Controller> ctl;
  nlohmann::json summary;
  /// Calibrate mode only.
  std::optional<actions::KnowledgeSeed> calibrated;

  /// Every call's run average satisfies its constraints.
  bool constraints_satisfied() const;
};

RunResult run(const Scenario& scenario, const RunOptions& options);

/// Case -> scenario used to measure that case's actions.
Scenario calibration_scenario(actions::ScenarioCase c);
/// Applies every catalog entry once on its case's scenario and records the
/// measured (delay, loss) as h.
actions::KnowledgeSeed calibrate(std::uint64_t seed = 1);
/// C++ initializer rows for the shipped seed table.
std::string emit_seed_table(const actions::KnowledgeSeed& seed);

std::string trace_csv(const RunResult& r);
std::string states_csv(const RunResult& r);
std::string transitions_csv(const RunResult& r);
std::string timeseries_csv(const RunResult& r);

/// trace.csv, states.csv, transitions.csv, timeseries.csv, kb.json,
/// summary.json. Throws IoError.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

}  // namespace voipqos::harness
