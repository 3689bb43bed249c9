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

// Dataset readers and writers: FASTA (plain or aligned) and set transactions
// (one whitespace-separated integer set per line).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deltatree/errors.hpp"
#include "deltatree/metrics.hpp"

namespace deltatree {

/// Optional bounds on sequence length; records outside are dropped.
struct LengthFilter {
  std::optional<std::size_t> min_length;
  std::optional<std::size_t> max_length;

  /// Drops peptide fragments (< 30) and giant outliers (> 1000).
  static LengthFilter protein() { return {30, 1000}; }

  bool accepts(std::size_t n) const noexcept {
    return (!min_length || n >= *min_length) && (!max_length || n <= *max_length);
  }
};

struct SequenceDataset {
  Dataset<Sequence> records;
  std::vector<std::string> headers;  // parallel to records, without the leading '>'
};

/// One record per FASTA entry, ids in file order. With `msa`, every sequence
/// must have the same length.
SequenceDataset read_fasta(const std::filesystem::path& path, bool msa, const LengthFilter& filter = {});
SequenceDataset parse_fasta(std::string_view text, bool msa, const LengthFilter& filter = {});
void write_fasta(const std::filesystem::path& path, const SequenceDataset& data, std::size_t line_width = 80);

/// Sorted, deduplicated sets, ids in line order. Blank lines are empty sets.
Dataset<IntSet> read_set_transactions(const std::filesystem::path& path);
Dataset<IntSet> parse_set_transactions(std::string_view text);
void write_set_transactions(const std::filesystem::path& path, const Dataset<IntSet>& data);
std::string format_set_transactions(const Dataset<IntSet>& data);

/// Removes the alignment gap and padding characters '-' and '.'.
std::string strip_gaps(std::string_view sequence);

/// Bytes of the plain representation: one byte per residue, or the
/// transaction-text size for sets.
std::uint64_t raw_size(const Dataset<Sequence>& data) noexcept;
std::uint64_t raw_size(const Dataset<IntSet>& data) noexcept;

/// Seeded sample of `count` records without replacement as queries; the rest
/// (original order preserved) as the training set.
template <class P>
std::pair<Dataset<P>, Dataset<P>> split_holdout(const Dataset<P>& data, std::size_t count, std::uint64_t seed) {
  if (count >= data.size() && !(count == 0 && data.empty())) {
    throw InvalidInput("holdout count " + std::to_string(count) + " must be below dataset size " +
                       std::to_string(data.size()));
  }
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picked;
  std::sample(idx.begin(), idx.end(), std::back_inserter(picked), count, rng);
  std::vector<bool> is_query(data.size(), false);
  for (const std::size_t i : picked) is_query[i] = true;

  std::pair<Dataset<P>, Dataset<P>> out;
  for (std::size_t i = 0; i < data.size(); ++i) (is_query[i] ? out.second : out.first).push_back(data[i]);
  return out;
}

}  // namespace deltatree
