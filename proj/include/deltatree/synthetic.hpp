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

#pragma once

// Seeded synthetic corpora for tests and benchmarks.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "deltatree/metrics.hpp"

namespace deltatree::synthetic {

inline constexpr std::string_view kDna = "ACGT";

struct FamilyParams {
  std::size_t families = 100;
  std::size_t per_family = 100;
  std::size_t length = 300;
  double mutation_rate = 0.05;  // per-position edit probability
  bool indels = true;           // otherwise substitutions only, equal lengths
  std::string alphabet = std::string(kDna);
};

/// Sequences derived from random seed sequences by independent point edits.
/// Ids are consecutive; family members are interleaved in seed order.
Dataset<Sequence> mutated_families(const FamilyParams& p, std::uint64_t seed);

/// Independent uniformly random sequences of one length.
Dataset<Sequence> random_sequences(std::size_t count, std::size_t length, std::string_view alphabet,
                                   std::uint64_t seed);

/// Equal-width aligned rows: family members substitute residues and open
/// gaps ('-'), the alignment padded with '.' at the ends.
Dataset<Sequence> aligned_families(const FamilyParams& p, std::uint64_t seed);

/// A two-dimensional grid embedded in sequence space: cell (a, b) of an
/// extent x extent grid maps to A^a C^(extent-a) G^b T^(extent-b), so edit and
/// Hamming distance both equal the L1 grid distance.
struct GridManifold {
  std::size_t extent = 0;
  Sequence point(std::size_t a, std::size_t b) const;
};

/// `count` distinct cells drawn at density 1/2 from a grid of extent
/// ceil(sqrt(2 count)).
struct GridSample {
  GridManifold grid;
  Dataset<Sequence> data;
};
GridSample grid_manifold(std::size_t count, std::uint64_t seed);
/// Uniform random cells of the same grid (may coincide with data points).
Dataset<Sequence> grid_queries(const GridManifold& grid, std::size_t count, std::uint64_t seed);

struct TransactionParams {
  std::size_t count = 1000;
  std::size_t clusters = 20;
  std::uint32_t universe = 5000;
  std::size_t prototype_size = 30;
  double drop_rate = 0.1;  // per-item removal probability
  double add_rate = 0.1;   // added random items, relative to prototype size
};

/// Sets scattered around random prototype sets.
Dataset<IntSet> clustered_transactions(const TransactionParams& p, std::uint64_t seed);

/// Uniform points in a disk of the given radius centered at the origin.
Dataset<std::array<double, 2>> uniform_disk(std::size_t count, double radius, std::uint64_t seed);

}  // namespace deltatree::synthetic
