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

#include "voipqos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernels/emodel_formula.hpp"
#include "voipqos/error.hpp"

namespace voipqos {

std::string_view to_string(QualityCategory c) {
  switch (c) {
    case QualityCategory::Excellent:
      return "Excellent";
    case QualityCategory::Good:
      return "Good";
    case QualityCategory::Average:
      return "Average";
    case QualityCategory::Poor:
      return "Poor";
  }
  return "Poor";
}

void Constraints::validate() const {
  if (!(delay_max_ms > 0.0) || !(loss_max > 0.0) || !(mos_min > 0.0)) {
    throw InvalidInput("constraint thresholds must be strictly positive");
  }
}

namespace {

void check_inputs(double delay_ms, double loss) {
  if (!std::isfinite(delay_ms) || delay_ms < 0.0) {
    throw InvalidInput("delay_ms must be a finite value >= 0, got " + std::to_string(delay_ms));
  }
  if (!std::isfinite(loss) || loss < 0.0 || loss > 1.0) {
    throw InvalidInput("loss must lie in [0, 1], got " + std::to_string(loss));
  }
}

}  // namespace

namespace emodel {

double r_factor(double delay_ms, double loss) {
  check_inputs(delay_ms, loss);
  return detail::r_factor_formula(delay_ms, loss);
}

double mos_from_r(double r) { return detail::mos_formula(r); }

}  // namespace emodel

double estimate_mos(double delay_ms, double loss) {
  check_inputs(delay_ms, loss);
  return detail::mos_formula(detail::r_factor_formula(delay_ms, loss));
}

HeuristicSample make_sample(double delay_ms, double loss) {
  return HeuristicSample{delay_ms, loss, estimate_mos(delay_ms, loss)};
}

// Band edges written with <= / >= belong to the better category.
QualityCategory classify_delay(double delay_ms) {
  if (delay_ms <= 100.0) return QualityCategory::Excellent;
  if (delay_ms <= 150.0) return QualityCategory::Good;
  if (delay_ms <= 180.0) return QualityCategory::Average;
  return QualityCategory::Poor;
}

QualityCategory classify_loss(double loss) {
  if (loss <= 0.01) return QualityCategory::Excellent;
  if (loss <= 0.02) return QualityCategory::Good;
  if (loss <= 0.05) return QualityCategory::Average;
  return QualityCategory::Poor;
}

QualityCategory classify_mos(double mos) {
  if (mos >= 4.0) return QualityCategory::Excellent;
  if (mos >= 3.5) return QualityCategory::Good;
  if (mos >= 2.0) return QualityCategory::Average;
  return QualityCategory::Poor;
}

QualityCategory classify(const HeuristicSample& sample) {
  return std::min({classify_delay(sample.delay_ms), classify_loss(sample.loss), classify_mos(sample.mos)});
}

WindowStats update_window(WindowStats stats, double interval_delay_ms, double interval_loss) {
  check_inputs(interval_delay_ms, interval_loss);
  stats.samples += 1;
  const double n = static_cast<double>(stats.samples);
  stats.avg_delay_ms += (interval_delay_ms - stats.avg_delay_ms) / n;
  stats.avg_loss += (interval_loss - stats.avg_loss) / n;
  return stats;
}

}  // namespace voipqos
