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

// Single-element E-model shared by metrics and the scalar kernel. The AVX2
// kernel mirrors this operation order exactly (no contraction) so both paths
// agree bit for bit.

namespace voipqos::detail {

inline double r_factor_formula(double delay_ms, double loss) {
  double id = 0.024 * delay_ms;
  if (delay_ms > 177.3) {
    id = id + 0.11 * (delay_ms - 177.3);
  }
  const double p = loss * 100.0;
  const double ie = 95.0 * p / (p + 25.0);
  return 93.2 - id - ie;
}

inline double mos_formula(double r) {
  if (r < 0.0) return 1.0;
  if (r > 100.0) return 4.5;
  double cubic = 7e-6 * r;
  cubic = cubic * (r - 60.0);
  cubic = cubic * (100.0 - r);
  double mos = 1.0 + 0.035 * r;
  mos = mos + cubic;
  // The cubic dips slightly below 1 for R in (0, ~6.5).
  if (mos < 1.0) mos = 1.0;
  if (mos > 4.5) mos = 4.5;
  return mos;
}

inline double penalty_formula(double delay_ms, double loss, double delay_max_ms, double loss_max) {
  return delay_ms / delay_max_ms + loss / loss_max;
}

}  // namespace voipqos::detail
