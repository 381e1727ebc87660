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
#include <string_view>

namespace voipqos {

/// One (delay, loss, MOS) observation. `mos` is always derived from the
/// other two fields through estimate_mos(); use make_sample() to build one.
struct HeuristicSample {
  double delay_ms = 0.0;
  double loss = 0.0;
  double mos = 0.0;

  friend bool operator==(const HeuristicSample&, const HeuristicSample&) = default;
};

enum class QualityCategory : std::uint8_t { Poor = 0, Average = 1, Good = 2, Excellent = 3 };

std::string_view to_string(QualityCategory c);

/// True when `a` is strictly better than `b`.
constexpr bool better(QualityCategory a, QualityCategory b) {
  return static_cast<int>(a) > static_cast<int>(b);
}

struct Constraints {
  double delay_max_ms = 180.0;
  double loss_max = 0.05;
  double mos_min = 2.0;

  /// Throws InvalidInput unless every threshold is strictly positive.
  void validate() const;

  bool delay_ok(double delay_ms) const { return delay_ms <= delay_max_ms; }
  bool loss_ok(double loss) const { return loss <= loss_max; }
  bool mos_ok(double mos) const { return mos >= mos_min; }
  bool satisfied(const HeuristicSample& s) const {
    return delay_ok(s.delay_ms) && loss_ok(s.loss) && mos_ok(s.mos);
  }

  friend bool operator==(const Constraints&, const Constraints&) = default;
};

namespace emodel {
inline constexpr double kR0 = 93.2;
inline constexpr double kDelayKnee = 177.3;
inline constexpr double kBpl = 25.0;  // packet-loss robustness, percent
inline constexpr double kIeBase = 0.0;

/// Transmission rating for a one-way delay and a loss fraction.
double r_factor(double delay_ms, double loss);

/// R -> MOS mapping, clamped to [1, 4.5].
double mos_from_r(double r);
}  // namespace emodel

/// MOS from the simplified E-model. Throws InvalidInput on negative delay or
/// loss outside [0, 1].
double estimate_mos(double delay_ms, double loss);

/// Validated sample with MOS filled in.
HeuristicSample make_sample(double delay_ms, double loss);

QualityCategory classify_delay(double delay_ms);
QualityCategory classify_loss(double loss);
QualityCategory classify_mos(double mos);

/// Worst of the three per-metric bands.
QualityCategory classify(const HeuristicSample& sample);

/// Running arithmetic mean of per-window measurements.
struct WindowStats {
  double window_s = 5.0;
  double avg_delay_ms = 0.0;
  double avg_loss = 0.0;
  std::uint64_t samples = 0;

  HeuristicSample as_sample() const { return make_sample(avg_delay_ms, avg_loss); }
};

inline constexpr double kDefaultWindowSeconds = 5.0;

WindowStats update_window(WindowStats stats, double interval_delay_ms, double interval_loss);

}  // namespace voipqos
