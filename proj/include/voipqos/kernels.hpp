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

// Batch arithmetic used on hot paths: window delay sums, MOS over trace
// series, penalty scoring of knowledge-base entries and weighted global
// means. Each kernel has a scalar reference and an AVX2 variant; the variant
// is selected once at runtime from CPUID and can be pinned for testing.

#include <cstdint>
#include <span>
#include <string_view>

namespace voipqos::kernels {

enum class Isa : std::uint8_t { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best variant this CPU and build support.
Isa detected_isa();

/// Variant currently used by the dispatching entry points.
Isa active_isa();

/// Pins the dispatch to `isa`. Requesting an unsupported ISA falls back to
/// Scalar. Returns the ISA actually installed.
Isa force_isa(Isa isa);

struct WeightedMeans {
  double delay_ms = 0.0;
  double loss = 0.0;
  double mos = 0.0;
  double weight_sum = 0.0;
};

// Dispatching entry points.
std::int64_t sum_i64(std::span<const std::int64_t> values);
void mos_batch(std::span<const double> delay_ms, std::span<const double> loss, std::span<double> out);
void penalty_batch(std::span<const double> delay_ms, std::span<const double> loss, double delay_max_ms,
                   double loss_max, std::span<double> out);
WeightedMeans weighted_means(std::span<const double> weights, std::span<const double> delay_ms,
                             std::span<const double> loss, std::span<const double> mos);

// Explicit variants, exposed for equivalence tests and benchmarks. Inputs
// are assumed validated (finite, delay >= 0, loss in [0, 1], equal lengths).
namespace scalar {
std::int64_t sum_i64(std::span<const std::int64_t> values);
void mos_batch(std::span<const double> delay_ms, std::span<const double> loss, std::span<double> out);
void penalty_batch(std::span<const double> delay_ms, std::span<const double> loss, double delay_max_ms,
                   double loss_max, std::span<double> out);
WeightedMeans weighted_means(std::span<const double> weights, std::span<const double> delay_ms,
                             std::span<const double> loss, std::span<const double> mos);
}  // namespace scalar

namespace avx2 {
bool compiled();
std::int64_t sum_i64(std::span<const std::int64_t> values);
void mos_batch(std::span<const double> delay_ms, std::span<const double> loss, std::span<double> out);
void penalty_batch(std::span<const double> delay_ms, std::span<const double> loss, double delay_max_ms,
                   double loss_max, std::span<double> out);
WeightedMeans weighted_means(std::span<const double> weights, std::span<const double> delay_ms,
                             std::span<const double> loss, std::span<const double> mos);
}  // namespace avx2

}  // namespace voipqos::kernels
