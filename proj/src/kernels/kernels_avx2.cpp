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

// Built with -mavx2 (and without FMA) on x86-64 only; see src/CMakeLists.txt.

#include "emodel_formula.hpp"
#include "voipqos/kernels.hpp"

#if defined(VOIPQOS_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace voipqos::kernels::avx2 {

#if defined(VOIPQOS_HAVE_AVX2)

bool compiled() { return true; }

std::int64_t sum_i64(std::span<const std::int64_t> values) {
  const std::size_t n = values.size();
  const std::int64_t* p = values.data();
  __m256i acc0 = _mm256_setzero_si256();
  __m256i acc1 = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_epi64(acc0, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + i)));
    acc1 = _mm256_add_epi64(acc1, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_epi64(acc0, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + i)));
  }
  acc0 = _mm256_add_epi64(acc0, acc1);
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc0);
  std::int64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) total += p[i];
  return total;
}

namespace {

inline __m256d mos4(__m256d d, __m256d l) {
  const __m256d knee = _mm256_set1_pd(177.3);
  __m256d id = _mm256_mul_pd(_mm256_set1_pd(0.024), d);
  const __m256d over = _mm256_cmp_pd(d, knee, _CMP_GT_OQ);
  const __m256d extra = _mm256_mul_pd(_mm256_set1_pd(0.11), _mm256_sub_pd(d, knee));
  id = _mm256_add_pd(id, _mm256_and_pd(over, extra));

  const __m256d p = _mm256_mul_pd(l, _mm256_set1_pd(100.0));
  const __m256d ie = _mm256_div_pd(_mm256_mul_pd(_mm256_set1_pd(95.0), p), _mm256_add_pd(p, _mm256_set1_pd(25.0)));
  const __m256d r = _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(93.2), id), ie);

  __m256d cubic = _mm256_mul_pd(_mm256_set1_pd(7e-6), r);
  cubic = _mm256_mul_pd(cubic, _mm256_sub_pd(r, _mm256_set1_pd(60.0)));
  cubic = _mm256_mul_pd(cubic, _mm256_sub_pd(_mm256_set1_pd(100.0), r));
  __m256d mos = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(_mm256_set1_pd(0.035), r));
  mos = _mm256_add_pd(mos, cubic);
  mos = _mm256_max_pd(mos, _mm256_set1_pd(1.0));
  mos = _mm256_min_pd(mos, _mm256_set1_pd(4.5));

  const __m256d low = _mm256_cmp_pd(r, _mm256_setzero_pd(), _CMP_LT_OQ);
  const __m256d high = _mm256_cmp_pd(r, _mm256_set1_pd(100.0), _CMP_GT_OQ);
  mos = _mm256_blendv_pd(mos, _mm256_set1_pd(1.0), low);
  mos = _mm256_blendv_pd(mos, _mm256_set1_pd(4.5), high);
  return mos;
}

}  // namespace

void mos_batch(std::span<const double> delay_ms, std::span<const double> loss, std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, mos4(_mm256_loadu_pd(delay_ms.data() + i), _mm256_loadu_pd(loss.data() + i)));
  }
  for (; i < n; ++i) out[i] = detail::mos_formula(detail::r_factor_formula(delay_ms[i], loss[i]));
}

void penalty_batch(std::span<const double> delay_ms, std::span<const double> loss, double delay_max_ms,
                   double loss_max, std::span<double> out) {
  const std::size_t n = out.size();
  const __m256d dm = _mm256_set1_pd(delay_max_ms);
  const __m256d lm = _mm256_set1_pd(loss_max);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_div_pd(_mm256_loadu_pd(delay_ms.data() + i), dm);
    const __m256d b = _mm256_div_pd(_mm256_loadu_pd(loss.data() + i), lm);
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(a, b));
  }
  for (; i < n; ++i) out[i] = detail::penalty_formula(delay_ms[i], loss[i], delay_max_ms, loss_max);
}

WeightedMeans weighted_means(std::span<const double> weights, std::span<const double> delay_ms,
                             std::span<const double> loss, std::span<const double> mos) {
  const std::size_t n = weights.size();
  __m256d w4 = _mm256_setzero_pd(), d4 = _mm256_setzero_pd(), l4 = _mm256_setzero_pd(), m4 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_loadu_pd(weights.data() + i);
    w4 = _mm256_add_pd(w4, w);
    d4 = _mm256_add_pd(d4, _mm256_mul_pd(w, _mm256_loadu_pd(delay_ms.data() + i)));
    l4 = _mm256_add_pd(l4, _mm256_mul_pd(w, _mm256_loadu_pd(loss.data() + i)));
    m4 = _mm256_add_pd(m4, _mm256_mul_pd(w, _mm256_loadu_pd(mos.data() + i)));
  }
  alignas(32) double lw[4], ld[4], ll[4], lmo[4];
  _mm256_store_pd(lw, w4);
  _mm256_store_pd(ld, d4);
  _mm256_store_pd(ll, l4);
  _mm256_store_pd(lmo, m4);
  double w = (lw[0] + lw[1]) + (lw[2] + lw[3]);
  double d = (ld[0] + ld[1]) + (ld[2] + ld[3]);
  double l = (ll[0] + ll[1]) + (ll[2] + ll[3]);
  double m = (lmo[0] + lmo[1]) + (lmo[2] + lmo[3]);
  for (; i < n; ++i) {
    w += weights[i];
    d += weights[i] * delay_ms[i];
    l += weights[i] * loss[i];
    m += weights[i] * mos[i];
  }
  if (w <= 0.0) return {};
  return {d / w, l / w, m / w, w};
}

#else

bool compiled() { return false; }
std::int64_t sum_i64(std::span<const std::int64_t> values) { return scalar::sum_i64(values); }
void mos_batch(std::span<const double> d, std::span<const double> l, std::span<double> out) {
  scalar::mos_batch(d, l, out);
}
void penalty_batch(std::span<const double> d, std::span<const double> l, double dm, double lm, std::span<double> out) {
  scalar::penalty_batch(d, l, dm, lm, out);
}
WeightedMeans weighted_means(std::span<const double> w, std::span<const double> d, std::span<const double> l,
                             std::span<const double> m) {
  return scalar::weighted_means(w, d, l, m);
}

#endif

}  // namespace voipqos::kernels::avx2
