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

#include <atomic>
#include <cassert>

#include "voipqos/kernels.hpp"

namespace voipqos::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
  static const Isa isa = (avx2::compiled() && cpu_has_avx2()) ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa force_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

std::int64_t sum_i64(std::span<const std::int64_t> values) {
  return active_isa() == Isa::Avx2 ? avx2::sum_i64(values) : scalar::sum_i64(values);
}

void mos_batch(std::span<const double> delay_ms, std::span<const double> loss, std::span<double> out) {
  assert(delay_ms.size() == out.size() && loss.size() == out.size());
  if (active_isa() == Isa::Avx2) {
    avx2::mos_batch(delay_ms, loss, out);
  } else {
    scalar::mos_batch(delay_ms, loss, out);
  }
}

void penalty_batch(std::span<const double> delay_ms, std::span<const double> loss, double delay_max_ms,
                   double loss_max, std::span<double> out) {
  assert(delay_ms.size() == out.size() && loss.size() == out.size());
  if (active_isa() == Isa::Avx2) {
    avx2::penalty_batch(delay_ms, loss, delay_max_ms, loss_max, out);
  } else {
    scalar::penalty_batch(delay_ms, loss, delay_max_ms, loss_max, out);
  }
}

WeightedMeans weighted_means(std::span<const double> weights, std::span<const double> delay_ms,
                             std::span<const double> loss, std::span<const double> mos) {
  assert(weights.size() == delay_ms.size() && weights.size() == loss.size() && weights.size() == mos.size());
  return active_isa() == Isa::Avx2 ? avx2::weighted_means(weights, delay_ms, loss, mos)
                                   : scalar::weighted_means(weights, delay_ms, loss, mos);
}

}  // namespace voipqos::kernels
