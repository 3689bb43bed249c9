//
// Copyright (C) 2026 The deltatree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "deltatree/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

#include "deltatree/errors.hpp"

namespace deltatree::synthetic {
namespace {

using Rng = std::mt19937_64;

char pick(Rng& rng, std::string_view alphabet) {
  return alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
}

char pick_other(Rng& rng, std::string_view alphabet, char c) {
  if (alphabet.size() < 2) return c;
  char x;
  do {
    x = pick(rng, alphabet);
  } while (x == c);
  return x;
}

Sequence random_sequence(Rng& rng, std::size_t length, std::string_view alphabet) {
  Sequence s(length, ' ');
  for (auto& c : s) c = pick(rng, alphabet);
  return s;
}

void check_alphabet(std::string_view alphabet) {
  if (alphabet.empty()) throw InvalidInput("empty alphabet");
}

}  // namespace

Dataset<Sequence> mutated_families(const FamilyParams& p, std::uint64_t seed) {
  check_alphabet(p.alphabet);
  Rng rng(seed);
  std::bernoulli_distribution hit(p.mutation_rate);
  std::uniform_int_distribution<int> kind(0, 2);
  std::vector<Sequence> roots;
  for (std::size_t f = 0; f < p.families; ++f) roots.push_back(random_sequence(rng, p.length, p.alphabet));

  Dataset<Sequence> out;
  out.reserve(p.families * p.per_family);
  for (std::size_t m = 0; m < p.per_family; ++m) {
    for (const Sequence& root : roots) {
      Sequence s;
      s.reserve(root.size() + root.size() / 8);
      for (const char c : root) {
        if (!hit(rng)) {
          s.push_back(c);
          continue;
        }
        switch (p.indels ? kind(rng) : 0) {
          case 0:
            s.push_back(pick_other(rng, p.alphabet, c));
            break;
          case 1:  // deletion
            break;
          default:  // insertion before c
            s.push_back(pick(rng, p.alphabet));
            s.push_back(c);
        }
      }
      out.push_back({out.size(), std::move(s)});
    }
  }
  return out;
}

Dataset<Sequence> random_sequences(std::size_t count, std::size_t length, std::string_view alphabet,
                                   std::uint64_t seed) {
  check_alphabet(alphabet);
  Rng rng(seed);
  Dataset<Sequence> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back({i, random_sequence(rng, length, alphabet)});
  return out;
}

Dataset<Sequence> aligned_families(const FamilyParams& p, std::uint64_t seed) {
  check_alphabet(p.alphabet);
  Rng rng(seed);
  std::bernoulli_distribution hit(p.mutation_rate);
  std::bernoulli_distribution gap(0.5);
  const std::size_t pad = std::max<std::size_t>(p.length / 20, 1);
  std::uniform_int_distribution<std::size_t> trim(0, pad);
  std::vector<Sequence> roots;
  for (std::size_t f = 0; f < p.families; ++f) {
    Sequence r = random_sequence(rng, p.length, p.alphabet);
    // Family-wide gap columns, as other families' insertions would leave.
    for (auto& c : r) {
      if (hit(rng)) c = '-';
    }
    roots.push_back(std::move(r));
  }

  Dataset<Sequence> out;
  out.reserve(p.families * p.per_family);
  for (std::size_t m = 0; m < p.per_family; ++m) {
    for (const Sequence& root : roots) {
      Sequence s = root;
      for (auto& c : s) {
        if (!hit(rng)) continue;
        if (c == '-') {
          c = pick(rng, p.alphabet);
        } else {
          c = gap(rng) ? '-' : pick_other(rng, p.alphabet, c);
        }
      }
      const std::size_t head = trim(rng), tail = trim(rng);
      std::fill(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(head), '.');
      std::fill(s.end() - static_cast<std::ptrdiff_t>(tail), s.end(), '.');
      out.push_back({out.size(), std::move(s)});
    }
  }
  return out;
}

Sequence GridManifold::point(std::size_t a, std::size_t b) const {
  if (a > extent || b > extent) throw InvalidInput("grid cell out of range");
  Sequence s;
  s.reserve(2 * extent);
  s.append(a, 'A').append(extent - a, 'C').append(b, 'G').append(extent - b, 'T');
  return s;
}

GridSample grid_manifold(std::size_t count, std::uint64_t seed) {
  GridSample g;
  g.grid.extent = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * static_cast<double>(count))));
  const std::size_t side = g.grid.extent + 1;
  Rng rng(seed);
  std::vector<std::size_t> cells;
  cells.reserve(count);
  std::unordered_set<std::size_t> seen;
  std::uniform_int_distribution<std::size_t> cell(0, side * side - 1);
  while (cells.size() < count) {
    const std::size_t c = cell(rng);
    if (seen.insert(c).second) cells.push_back(c);
  }
  g.data.reserve(count);
  for (const std::size_t c : cells) g.data.push_back({g.data.size(), g.grid.point(c / side, c % side)});
  return g;
}

Dataset<Sequence> grid_queries(const GridManifold& grid, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> coord(0, grid.extent);
  Dataset<Sequence> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t a = coord(rng);
    out.push_back({i, grid.point(a, coord(rng))});
  }
  return out;
}

Dataset<IntSet> clustered_transactions(const TransactionParams& p, std::uint64_t seed) {
  if (p.universe == 0 || p.clusters == 0) throw InvalidInput("empty transaction universe");
  Rng rng(seed);
  std::uniform_int_distribution<std::uint32_t> item(0, p.universe - 1);
  std::vector<IntSet> prototypes;
  for (std::size_t c = 0; c < p.clusters; ++c) {
    IntSet s;
    for (std::size_t k = 0; k < p.prototype_size; ++k) s.push_back(item(rng));
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    prototypes.push_back(std::move(s));
  }
  std::bernoulli_distribution drop(p.drop_rate);
  std::poisson_distribution<std::size_t> adds(p.add_rate * static_cast<double>(p.prototype_size));
  std::uniform_int_distribution<std::size_t> which(0, p.clusters - 1);

  Dataset<IntSet> out;
  out.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    IntSet s;
    for (const auto x : prototypes[which(rng)]) {
      if (!drop(rng)) s.push_back(x);
    }
    for (std::size_t k = adds(rng); k > 0; --k) s.push_back(item(rng));
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    out.push_back({i, std::move(s)});
  }
  return out;
}

Dataset<std::array<double, 2>> uniform_disk(std::size_t count, double radius, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset<std::array<double, 2>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = radius * std::sqrt(u(rng));
    const double t = 2 * std::numbers::pi * u(rng);
    out.push_back({i, {r * std::cos(t), r * std::sin(t)}});
  }
  return out;
}

}  // namespace deltatree::synthetic
