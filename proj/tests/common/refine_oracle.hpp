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

// Straight-line model of knowledge refinement over plain arrays, used to
// check KnowledgeBase::refine on exhaustive and random inputs.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "voipqos/actions.hpp"
#include "voipqos/knowledge.hpp"
#include "voipqos/metrics.hpp"

namespace oracle {

using voipqos::actions::ActionKind;

struct Item {
  ActionKind kind;
  double delay_ms;
  double loss;
};

inline int grade(double d, double l) { return static_cast<int>(voipqos::classify(voipqos::make_sample(d, l))); }

inline bool is_worse(const Item& a, const Item& b) {
  const int ga = grade(a.delay_ms, a.loss), gb = grade(b.delay_ms, b.loss);
  if (ga != gb) return ga < gb;
  return a.delay_ms / 180.0 + a.loss / 0.05 > b.delay_ms / 180.0 + b.loss / 0.05;
}

struct Outcome {
  std::vector<ActionKind> order;  // live entries by final rank
  std::vector<ActionKind> deleted;
};

// items[i] holds rank i + 1; conflict(a, b) is the symmetric conflict test.
template <class Conflict>
Outcome refine(const std::vector<Item>& items, std::size_t current, Conflict conflict) {
  const std::size_t n = items.size();
  std::vector<int> rank(n);
  std::vector<bool> alive(n, true);
  std::iota(rank.begin(), rank.end(), 1);
  Outcome out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == current || !alive[i]) continue;
    if (!(rank[i] < rank[current]) || !is_worse(items[i], items[current])) continue;
    if (conflict(items[i].kind, items[current].kind)) {
      rank[current] = rank[i];
      alive[i] = false;
      out.deleted.push_back(items[i].kind);
    } else {
      std::swap(rank[i], rank[current]);
    }
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rank[a] < rank[b]; });
  for (auto i : idx) out.order.push_back(items[i].kind);
  return out;
}

// Runs the exhaustive comparison: every h assignment over a 3-point grid,
// every conflict graph and every choice of a_current for 1..max_n entries.
// Returns the number of mismatches; `cases` receives the case count.
inline std::size_t exhaustive(std::size_t max_n, std::size_t& cases) {
  using namespace voipqos;
  const std::pair<double, double> grid[] = {{60.0, 0.0}, {140.0, 0.03}, {250.0, 0.12}};
  const ActionKind kinds[] = {ActionKind::IncreaseBuffer, ActionKind::EnableRED, ActionKind::EnableFEC,
                              ActionKind::ControlledLoad};
  std::size_t bad = 0;
  cases = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    }
    std::size_t hcount = 1;
    for (std::size_t i = 0; i < n; ++i) hcount *= 3;
    for (std::size_t graph = 0; graph < (std::size_t{1} << pairs.size()); ++graph) {
      std::vector<actions::ConflictSet> sets;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (graph & (std::size_t{1} << p)) sets.push_back({{kinds[pairs[p].first], kinds[pairs[p].second]}});
      }
      auto conflict = [&](ActionKind a, ActionKind b) { return actions::conflicts(sets, a, b); };
      for (std::size_t hs = 0; hs < hcount; ++hs) {
        std::vector<Item> items;
        actions::KnowledgeSeed seed;
        seed.conflicts = sets;
        std::size_t code = hs;
        for (std::size_t i = 0; i < n; ++i) {
          const auto [d, l] = grid[code % 3];
          code /= 3;
          items.push_back({kinds[i], d, l});
          actions::ActionId a;
          a.kind = kinds[i];
          seed.entries.push_back({a, actions::ScenarioCase::Case2, static_cast<int>(i) + 1, {d, l}});
        }
        for (std::size_t cur = 0; cur < n; ++cur) {
          ++cases;
          const auto want = refine(items, cur, conflict);
          knowledge::KnowledgeBase kb(seed);
          const auto rep = kb.refine(actions::ScenarioCase::Case2, kinds[cur]);
          std::vector<ActionKind> got;
          for (const auto& e : kb.entries(actions::ScenarioCase::Case2)) got.push_back(e.action.kind);
          bool ok = got == want.order && rep.deleted == want.deleted;
          // A second pass must change nothing.
          const auto rev = kb.revision();
          ok = ok && !kb.refine(actions::ScenarioCase::Case2, kinds[cur]).changed() && kb.revision() == rev;
          try {
            kb.check_invariants();
          } catch (...) {
            ok = false;
          }
          bad += ok ? 0 : 1;
        }
      }
    }
  }
  return bad;
}

}  // namespace oracle
