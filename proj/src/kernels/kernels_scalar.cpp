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

#include "emodel_formula.hpp"
#include "voipqos/kernels.hpp"

namespace voipqos::kernels::scalar {

std::int64_t sum_i64(std::span<const std::int64_t> values) {
  std::int64_t acc = 0;
  for (std::int64_t v : values) acc += v;
  return acc;
}

void mos_batch(std::span<const double> delay_ms, std::span<const double> loss, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = detail::mos_formula(detail::r_factor_formula(delay_ms[i], loss[i]));
  }
}

void penalty_batch(std::span<const double> delay_ms, std::span<const double> loss, double delay_max_ms,
                   double loss_max, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = detail::penalty_formula(delay_ms[i], loss[i], delay_max_ms, loss_max);
  }
}

WeightedMeans weighted_means(std::span<const double> weights, std::span<const double> delay_ms,
                             std::span<const double> loss, std::span<const double> mos) {
  double w = 0.0, d = 0.0, l = 0.0, m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    w += weights[i];
    d += weights[i] * delay_ms[i];
    l += weights[i] * loss[i];
    m += weights[i] * mos[i];
  }
  if (w <= 0.0) return {};
  return {d / w, l / w, m / w, w};
}

}  // namespace voipqos::kernels::scalar
