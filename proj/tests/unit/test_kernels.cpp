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

#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "voipqos/kernels.hpp"
#include "voipqos/metrics.hpp"

using namespace voipqos;
namespace k = voipqos::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("avx2 variants agree with scalar") {
    if (!k::avx2::compiled() || k::detected_isa() != k::Isa::Avx2) {
      MESSAGE("AVX2 not available; comparing scalar with itself");
    }
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> ns(0, 2'000'000'000);
    std::uniform_real_distribution<double> d(0, 1200), l(0, 1), w(0.1, 5), m(1, 4.5);
    for (std::size_t n = 0; n < 70; ++n) {
      std::vector<std::int64_t> v(n);
      std::vector<double> dd(n), ll(n), ww(n), mm(n), o1(n), o2(n), p1(n), p2(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = ns(rng);
        dd[i] = d(rng);
        ll[i] = (i % 5 == 0) ? 0.0 : l(rng);
        ww[i] = w(rng);
        mm[i] = m(rng);
      }
      CHECK(k::scalar::sum_i64(v) == k::avx2::sum_i64(v));

      k::scalar::mos_batch(dd, ll, o1);
      k::avx2::mos_batch(dd, ll, o2);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(same_bits(o1[i], o2[i]));
        CHECK(same_bits(o1[i], estimate_mos(dd[i], ll[i])));
      }

      k::scalar::penalty_batch(dd, ll, 180.0, 0.05, p1);
      k::avx2::penalty_batch(dd, ll, 180.0, 0.05, p2);
      for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(p1[i], p2[i]));

      const auto a = k::scalar::weighted_means(ww, dd, ll, mm);
      const auto b = k::avx2::weighted_means(ww, dd, ll, mm);
      CHECK(a.weight_sum == doctest::Approx(b.weight_sum).epsilon(1e-12));
      CHECK(a.delay_ms == doctest::Approx(b.delay_ms).epsilon(1e-12));
      CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
      CHECK(a.mos == doctest::Approx(b.mos).epsilon(1e-12));
    }
  }

  TEST_CASE("sum is exact near overflow-free extremes") {
    std::vector<std::int64_t> v(1001, (std::int64_t{1} << 52) + 1);
    CHECK(k::sum_i64(v) == 1001 * ((std::int64_t{1} << 52) + 1));
  }

  TEST_CASE("weighted means by hand") {
    const std::vector<double> w{2, 1}, d{50, 200}, l{0.01, 0.08}, m{4, 3};
    const auto r = k::weighted_means(w, d, l, m);
    CHECK(r.delay_ms == doctest::Approx(100.0));
    CHECK(r.loss == doctest::Approx((0.02 + 0.08) / 3));
    CHECK(r.mos == doctest::Approx(11.0 / 3));
    CHECK(r.weight_sum == 3.0);
  }

  TEST_CASE("dispatch can be pinned") {
    const auto detected = k::detected_isa();
    CHECK(k::force_isa(k::Isa::Scalar) == k::Isa::Scalar);
    CHECK(k::active_isa() == k::Isa::Scalar);
    std::vector<std::int64_t> v{1, 2, 3};
    CHECK(k::sum_i64(v) == 6);
    CHECK(k::force_isa(detected) == detected);
    CHECK(k::active_isa() == detected);
  }
}
