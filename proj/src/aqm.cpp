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

#include "voipqos/aqm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voipqos/error.hpp"

namespace voipqos::netsim {

void RedParams::validate(int capacity_pkts) const {
  if (!(min_th >= 0.0) || !(min_th < max_th)) throw InvalidInput("red: require 0 <= min_th < max_th");
  if (max_th > capacity_pkts) {
    throw InvalidInput("red: max_th " + std::to_string(max_th) + " exceeds capacity_pkts " +
                       std::to_string(capacity_pkts));
  }
  if (!(max_p > 0.0 && max_p <= 1.0)) throw InvalidInput("red: max_p must lie in (0, 1]");
  if (!(ewma_weight > 0.0 && ewma_weight <= 1.0)) throw InvalidInput("red: ewma_weight must lie in (0, 1]");
}

void QueueConfig::validate() const {
  if (capacity_pkts < 1) throw InvalidInput("queue.capacity_pkts must be >= 1");
  if (const auto* r = std::get_if<Red>(&discipline)) {
    r->params.validate(capacity_pkts);
  } else if (const auto* w = std::get_if<Wred>(&discipline)) {
    if (w->classes.empty()) throw InvalidInput("wred: at least one parameter set required");
    for (const auto& p : w->classes) p.validate(capacity_pkts);
  }
}

double max_threshold(const Discipline& d) {
  if (const auto* r = std::get_if<Red>(&d)) return r->params.max_th;
  if (const auto* w = std::get_if<Wred>(&d)) {
    double m = 0.0;
    for (const auto& p : w->classes) m = std::max(m, p.max_th);
    return m;
  }
  return 0.0;
}

double red_drop_probability(const RedParams& p, double avg) {
  if (avg < p.min_th) return 0.0;
  if (avg > p.max_th) return 1.0;
  return p.max_p * (avg - p.min_th) / (p.max_th - p.min_th);
}

OfferResult red_decide(const RedParams& p, double avg, std::size_t occupancy, int capacity_pkts, double uniform) {
  OfferResult r;
  r.drop_probability = red_drop_probability(p, avg);
  if (avg > p.max_th) {
    r.enqueued = false;
    r.reason = DropReason::Forced;
  } else if (r.drop_probability > 0.0 && uniform < r.drop_probability) {
    r.enqueued = false;
    r.reason = DropReason::Early;
  } else if (occupancy >= static_cast<std::size_t>(capacity_pkts)) {
    r.enqueued = false;
    r.reason = DropReason::Overflow;
  }
  return r;
}

void red_update_average(RedState& state, double ewma_weight, std::size_t occupancy, SimTime now,
                        SimTime typical_service) {
  if (occupancy == 0 && state.idle) {
    const double slots = static_cast<double>((now - state.idle_since).ns()) /
                         static_cast<double>(std::max<std::int64_t>(1, typical_service.ns()));
    if (slots > 0.0) state.avg *= std::pow(1.0 - ewma_weight, slots);
    state.idle = false;
  }
  state.avg = (1.0 - ewma_weight) * state.avg + ewma_weight * static_cast<double>(occupancy);
}

}  // namespace voipqos::netsim
