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

#include <cstddef>
#include <cstdint>
#include <deque>
#include <variant>
#include <vector>

#include "voipqos/sim_time.hpp"

namespace voipqos::netsim {

/// Classic average-queue RED parameters. Thresholds are in packets.
struct RedParams {
  double min_th = 50.0;
  double max_th = 100.0;
  double max_p = 0.1;
  double ewma_weight = 0.002;

  void validate(int capacity_pkts) const;
  friend bool operator==(const RedParams&, const RedParams&) = default;
};

struct TailDrop {
  friend bool operator==(const TailDrop&, const TailDrop&) = default;
};
struct Red {
  RedParams params;
  friend bool operator==(const Red&, const Red&) = default;
};
/// Weighted RED: one parameter set per priority class (index = class,
/// classes past the end use the last set) over a shared average, random drop.
struct Wred {
  std::vector<RedParams> classes;
  friend bool operator==(const Wred&, const Wred&) = default;
};

using Discipline = std::variant<TailDrop, Red, Wred>;

struct QueueConfig {
  int capacity_pkts = 50;
  Discipline discipline = TailDrop{};

  /// Throws InvalidInput on capacity < 1 or a threshold set that does not fit.
  void validate() const;
  friend bool operator==(const QueueConfig&, const QueueConfig&) = default;
};

/// Largest max_th across the discipline's parameter sets (0 for tail drop).
double max_threshold(const Discipline& d);

/// Probability of an early drop at average queue `avg`: 0 below min_th,
/// linear up to max_p at max_th, 1 above max_th.
double red_drop_probability(const RedParams& p, double avg);

enum class DropReason : std::uint8_t { Overflow, Early, Forced };

struct OfferResult {
  bool enqueued = true;
  DropReason reason = DropReason::Overflow;
  double drop_probability = 0.0;
};

/// Decision for one arrival given an already-updated average and a uniform
/// draw in [0, 1). Pure; used by ActiveQueue and directly by tests.
OfferResult red_decide(const RedParams& p, double avg, std::size_t occupancy, int capacity_pkts, double uniform);

/// EWMA state of a RED/WRED queue.
struct RedState {
  double avg = 0.0;
  bool idle = true;
  SimTime idle_since{};
};

/// Advances the average for an arrival seeing `occupancy` packets. When the
/// queue has been idle the average decays as if `typical_service` sized
/// slots had passed with an empty queue.
void red_update_average(RedState& state, double ewma_weight, std::size_t occupancy, SimTime now,
                        SimTime typical_service);

}  // namespace voipqos::netsim
