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

#include "voipqos/sim_time.hpp"

#include <cstdio>
#include <cstdlib>

#include "voipqos/error.hpp"

namespace voipqos {

std::string format_ms(std::int64_t ns) {
  const bool neg = ns < 0;
  const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(ns + 1)) + 1 : static_cast<std::uint64_t>(ns);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%llu.%06llu", neg ? "-" : "", static_cast<unsigned long long>(mag / 1000000),
                static_cast<unsigned long long>(mag % 1000000));
  return buf;
}

std::int64_t parse_ms_to_ns(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    neg = text[i] == '-';
    ++i;
  }
  std::int64_t whole = 0;
  bool any = false;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
    whole = whole * 10 + (text[i] - '0');
    any = true;
  }
  std::int64_t frac = 0;
  int digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      if (digits == 6) throw ParseError("more than 6 fractional digits in '" + text + "'");
      frac = frac * 10 + (text[i] - '0');
      ++digits;
      any = true;
    }
  }
  if (!any || i != text.size()) throw ParseError("not a millisecond value: '" + text + "'");
  for (; digits < 6; ++digits) frac *= 10;
  const std::int64_t ns = whole * 1000000 + frac;
  return neg ? -ns : ns;
}

}  // namespace voipqos
