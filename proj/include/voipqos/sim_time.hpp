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

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace voipqos {

/// Simulated time. Stored as integer nanoseconds so that every per-packet
/// delay, sum and mean is reproducible bit for bit and prints exactly as a
/// decimal millisecond value.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime(ns); }
  static SimTime from_ms(double ms) {
    return SimTime(static_cast<std::int64_t>(std::llround(ms * 1e6)));
  }
  static SimTime from_s(double s) { return from_ms(s * 1000.0); }

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double ms() const { return static_cast<double>(ns_) / 1e6; }
  constexpr double s() const { return static_cast<double>(ns_) / 1e9; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(SimTime o) {
    ns_ += o.ns_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime(a.ns_ + b.ns_); }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime(a.ns_ - b.ns_); }

 private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

/// Exact decimal rendering "123.456789" of a nanosecond count in ms.
std::string format_ms(std::int64_t ns);

/// Inverse of format_ms. Accepts any decimal with up to 6 fractional digits.
std::int64_t parse_ms_to_ns(const std::string& text);

}  // namespace voipqos
