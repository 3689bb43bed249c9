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

// Shared plumbing for the command-line tools: metric and format dispatch,
// index building with size accounting, and timed batch search.

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "deltatree/compressor.hpp"
#include "deltatree/data_io.hpp"
#include "deltatree/search.hpp"
#include "deltatree/store.hpp"
#include "deltatree/tree.hpp"

namespace deltatree::cli {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

enum class Format { Fasta, FastaMsa, Sets };

inline Format parse_format(std::string_view s) {
  if (s == "fasta") return Format::Fasta;
  if (s == "fasta-msa") return Format::FastaMsa;
  if (s == "sets") return Format::Sets;
  throw InvalidInput("unknown format '" + std::string(s) + "'");
}

enum class Mode { Rnn, KnnRepeated, KnnBfs, KnnDfs };

inline Mode parse_mode(std::string_view s) {
  if (s == "rnn") return Mode::Rnn;
  if (s == "knn-repeated") return Mode::KnnRepeated;
  if (s == "knn-bfs") return Mode::KnnBfs;
  if (s == "knn-dfs") return Mode::KnnDfs;
  throw InvalidInput("unknown search mode '" + std::string(s) + "'");
}

inline KnnAlgorithm knn_algorithm(Mode m) {
  switch (m) {
    case Mode::KnnRepeated:
      return KnnAlgorithm::RepeatedRnn;
    case Mode::KnnBfs:
      return KnnAlgorithm::BreadthFirst;
    default:
      return KnnAlgorithm::DepthFirst;
  }
}

/// Calls f(metric) with a default-constructed metric of the named type.
template <class F>
decltype(auto) with_metric(std::string_view name, F&& f) {
  if (name == HammingMetric::name) return f(HammingMetric{});
  if (name == LevenshteinMetric::name) return f(LevenshteinMetric{});
  if (name == JaccardMetric::name) return f(JaccardMetric{});
  if (name == DiceMetric::name) return f(DiceMetric{});
  throw InvalidInput("unknown metric '" + std::string(name) + "'");
}

template <class P>
Dataset<P> load_points(const std::filesystem::path& path, Format format, const LengthFilter& filter = {}) {
  if constexpr (std::is_same_v<P, Sequence>) {
    if (format == Format::Sets) throw InvalidInput("format 'sets' needs a set metric (jaccard, dice)");
    return read_fasta(path, format == Format::FastaMsa, filter).records;
  } else {
    if (format != Format::Sets) throw InvalidInput("set metrics need format 'sets'");
    return read_set_transactions(path);
  }
}

struct BuildSettings {
  std::uint64_t seed = 42;
  PartitionCriteria criteria;
  bool gap_stripped_queries = false;
};

struct BuildReport {
  std::string metric;
  std::size_t points = 0;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  std::uint64_t raw_bytes = 0;
  IndexSizes sizes;
  double seconds = 0;
  Bytes bytes;

  double ratio() const { return sizes.total() == 0 ? 0.0 : static_cast<double>(raw_bytes) / sizes.total(); }
};

template <CompressiveMetric M>
BuildReport build_index(const Dataset<typename M::Point>& data, const M& metric, const BuildSettings& settings) {
  const auto t0 = Clock::now();
  const auto tree = Tree<M>::build(data, metric, settings.criteria, settings.seed);
  const auto packed = compress(tree, CostUnit::Bytes);
  BuildReport r;
  r.metric = std::string(M::name);
  r.bytes = serialize_index(packed.tree, packed.plan, WriteOptions{settings.gap_stripped_queries}, &r.sizes);
  r.seconds = seconds_since(t0);
  r.points = data.size();
  r.nodes = packed.tree.size();
  for (const auto& c : packed.tree.nodes()) r.leaves += c.is_leaf();
  r.raw_bytes = raw_size(data);
  return r;
}

inline nlohmann::json to_json(const BuildReport& r) {
  return {{"metric", r.metric},
          {"points", r.points},
          {"nodes", r.nodes},
          {"leaves", r.leaves},
          {"raw_bytes", r.raw_bytes},
          {"index_bytes", r.sizes.total()},
          {"data_bytes", r.sizes.data()},
          {"tree_bytes", r.sizes.tree()},
          {"ratio", r.ratio()},
          {"build_seconds", r.seconds}};
}

struct SearchSettings {
  Mode mode = Mode::KnnDfs;
  double radius = 0;
  std::size_t k = 10;
  unsigned threads = 1;
  SearchOptions options;
};

struct QueryOutcome {
  std::uint64_t query_id = 0;
  HitSet result;
  double seconds = 0;
};

/// Runs `one(i)` for every query index on a bounded pool; the first exception
/// is rethrown after all workers stop.
template <class F>
std::vector<QueryOutcome> run_pool(std::size_t count, unsigned threads, F&& one) {
  std::vector<QueryOutcome> out(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  auto worker = [&] {
    while (!failed) {
      const std::size_t i = next++;
      if (i >= count) return;
      try {
        const auto t0 = Clock::now();
        out[i].result = one(i);
        out[i].seconds = seconds_since(t0);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

template <class Space>
std::vector<QueryOutcome> search_index(const Space& space, const Dataset<typename Space::QueryPoint>& queries,
                                       const SearchSettings& s) {
  auto out = run_pool(queries.size(), s.threads, [&](std::size_t i) {
    const auto& q = queries[i].payload;
    if (s.mode == Mode::Rnn) return rnn_search(space, q, s.radius, s.options);
    return knn_search(space, q, s.k, knn_algorithm(s.mode), s.options);
  });
  for (std::size_t i = 0; i < queries.size(); ++i) out[i].query_id = queries[i].id;
  return out;
}

/// Linear scan over uncompressed data with the same result conventions.
template <class P, class Q, class Distance>
std::vector<QueryOutcome> search_raw(const Dataset<P>& data, const Dataset<Q>& queries, const SearchSettings& s,
                                     Distance&& distance) {
  auto out = run_pool(queries.size(), s.threads, [&](std::size_t i) {
    const auto& q = queries[i].payload;
    auto d = [&](const P& p) { return distance(q, p); };
    return s.mode == Mode::Rnn ? linear_scan_rnn(data, d, s.radius) : linear_scan_knn(data, d, s.k);
  });
  for (std::size_t i = 0; i < queries.size(); ++i) out[i].query_id = queries[i].id;
  return out;
}

inline void write_results_tsv(std::ostream& out, const std::vector<QueryOutcome>& outcomes) {
  out.precision(17);
  for (const auto& o : outcomes) {
    std::size_t rank = 0;
    for (const auto& h : o.result.hits) out << o.query_id << '\t' << ++rank << '\t' << h.id << '\t' << h.distance << '\n';
  }
}

inline void write_stats_jsonl(std::ostream& out, const std::vector<QueryOutcome>& outcomes, std::size_t points) {
  for (const auto& o : outcomes) {
    const auto& st = o.result.stats;
    nlohmann::json j{{"query_id", o.query_id},
                     {"seconds", o.seconds},
                     {"hits", o.result.hits.size()},
                     {"distance_computations", st.distance_computations},
                     {"clusters_visited", st.clusters_visited},
                     {"points_decompressed", st.points_decompressed},
                     {"decompressed_fraction",
                      points == 0 ? 0.0 : static_cast<double>(st.points_decompressed) / static_cast<double>(points)}};
    out << j.dump() << '\n';
  }
}

}  // namespace deltatree::cli
