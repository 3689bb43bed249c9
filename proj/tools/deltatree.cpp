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

// deltatree: build, inspect and search compressed indexes.
//
// Exit codes: 0 success, 2 usage, 3 data error, 4 integrity error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "bench.hpp"
#include "engine.hpp"

namespace {

using namespace deltatree;
using namespace deltatree::cli;

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kIntegrity = 4;

struct BuildArgs {
  std::string input, format = "fasta", metric, output;
  std::uint64_t seed = 42;
  std::size_t min_cardinality = 1;
  std::optional<std::size_t> max_depth, min_length, max_length;
  std::optional<double> min_radius;
  bool json = false;
};

struct SearchArgs {
  std::string index, queries, mode = "knn-dfs", output = "-", stats;
  std::optional<double> radius;
  std::optional<std::size_t> k;
  unsigned threads = 1;
  std::string raw_data, raw_format;
  bool verify_pruning = false;
};

/// Opens `path` for writing, or returns stdout for "-".
std::ostream& sink(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
  if (path == "-") return std::cout;
  holder = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*holder) throw IoError("cannot write " + path);
  return *holder;
}

int cmd_build(const BuildArgs& a) {
  const Format format = parse_format(a.format);
  BuildSettings settings;
  settings.seed = a.seed;
  settings.criteria.min_cardinality = a.min_cardinality;
  settings.criteria.max_depth = a.max_depth;
  settings.criteria.min_radius = a.min_radius;
  const LengthFilter filter{a.min_length, a.max_length};

  const BuildReport r = with_metric(a.metric, [&](auto metric) {
    using M = decltype(metric);
    const auto data = load_points<typename M::Point>(a.input, format, filter);
    BuildSettings s = settings;
    if constexpr (std::is_same_v<M, HammingMetric>) s.gap_stripped_queries = format == Format::FastaMsa;
    return build_index(data, metric, s);
  });
  write_file(a.output, r.bytes);

  if (a.json) {
    std::cout << to_json(r).dump(2) << '\n';
  } else {
    std::cout << "metric\t" << r.metric << "\npoints\t" << r.points << "\nnodes\t" << r.nodes << "\nleaves\t" << r.leaves
              << "\nraw_bytes\t" << r.raw_bytes << "\ndata_bytes\t" << r.sizes.data() << "\ntree_bytes\t"
              << r.sizes.tree() << "\nindex_bytes\t" << r.sizes.total() << "\nratio\t" << r.ratio()
              << "\nbuild_seconds\t" << r.seconds << '\n';
  }
  return 0;
}

int cmd_search(const SearchArgs& a) {
  SearchSettings s;
  s.mode = parse_mode(a.mode);
  s.threads = a.threads;
  s.options.verify_pruning = a.verify_pruning;
  if (s.mode == Mode::Rnn) {
    if (!a.radius) throw InvalidInput("--radius is required for rnn");
    s.radius = *a.radius;
  } else {
    if (!a.k) throw InvalidInput("-k is required for k-NN modes");
    if (*a.k == 0) throw InvalidInput("k must be at least 1");
    s.k = *a.k;
  }

  IndexFile file = IndexFile::open(a.index);
  const bool gap_stripped = file.header().gap_stripped_queries();
  const std::size_t n = file.header().point_count;
  if (s.mode != Mode::Rnn && s.k > n) {
    std::cerr << "warning: k = " << s.k << " exceeds the " << n << " indexed points; using k = " << n << '\n';
    s.k = n;
  }

  std::vector<QueryOutcome> outcomes;
  const std::string metric_name = file.header().metric;
  with_metric(metric_name, [&](auto metric) {
    using M = decltype(metric);
    using P = typename M::Point;
    const Format qformat = std::is_same_v<P, Sequence> ? Format::Fasta : Format::Sets;
    const auto queries = load_points<P>(a.queries, qformat);

    if (!a.raw_data.empty()) {
      // Debug path: linear scan over the uncompressed input instead.
      const Format rformat = a.raw_format.empty() ? qformat : parse_format(a.raw_format);
      const auto data = load_points<P>(a.raw_data, rformat);
      if (s.mode == Mode::KnnRepeated && !M::supports_radius_growth) {
        throw UnsupportedMetric("repeated rho-NN search cannot grow radii usefully under set distances");
      }
      if constexpr (std::is_same_v<M, HammingMetric>) {
        if (gap_stripped) {
          outcomes = search_raw(data, queries, s, [](const Sequence& q, const Sequence& p) {
            return static_cast<double>(levenshtein_distance(strip_gaps(q), strip_gaps(p)));
          });
          return;
        }
      }
      outcomes = search_raw(data, queries, s, [&](const P& q, const P& p) { return metric.distance(q, p); });
      return;
    }

    CompressedIndex<M> index(std::move(file), metric);
    if constexpr (std::is_same_v<M, HammingMetric>) {
      if (gap_stripped) {
        outcomes = search_index(GapStrippedSpace(index), queries, s);
        return;
      }
    }
    outcomes = search_index(DirectSpace<M>(index), queries, s);
  });

  std::unique_ptr<std::ofstream> out_file, stats_file;
  write_results_tsv(sink(a.output, out_file), outcomes);
  const std::string stats_path = !a.stats.empty() ? a.stats : (a.output == "-" ? "" : a.output + ".jsonl");
  if (!stats_path.empty()) write_stats_jsonl(sink(stats_path, stats_file), outcomes, n);
  return 0;
}

int cmd_stats(const std::string& path) {
  const IndexFile file = IndexFile::open(path);
  const auto& h = file.header();
  const IndexSizes sz = file.sizes();
  std::size_t leaves = 0, max_depth = 0;
  for (std::uint64_t i = 0; i < h.node_count; ++i) {
    const NodeRecord r = file.node(i);
    leaves += r.is_leaf();
    max_depth = std::max<std::size_t>(max_depth, r.depth);
  }
  nlohmann::json j{{"version", kIndexVersion},
                   {"metric", h.metric},
                   {"gap_stripped_queries", h.gap_stripped_queries()},
                   {"id_width", h.id_width},
                   {"seed", h.seed},
                   {"points", h.point_count},
                   {"nodes", h.node_count},
                   {"leaves", leaves},
                   {"max_depth", max_depth},
                   {"root_radius", h.node_count ? file.node(0).radius : 0.0},
                   {"root_lfd", h.node_count ? file.node(0).lfd : 0.0f},
                   {"file_bytes", file.file_size()},
                   {"data_bytes", sz.data()},
                   {"tree_bytes", sz.tree()},
                   {"sections",
                    {{"header", sz.header},
                     {"root_payload", sz.root_payload},
                     {"node_table", sz.node_table},
                     {"id_table", sz.id_table},
                     {"blob", sz.blob}}}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed exact similarity search over sequences and sets"};
  app.require_subcommand(1);

  BuildArgs b;
  auto* build = app.add_subcommand("build", "Cluster, compress and write an index");
  build->add_option("--input", b.input, "Dataset path")->required();
  build->add_option("--format", b.format, "fasta, fasta-msa or sets")->capture_default_str();
  build->add_option("--metric", b.metric, "hamming, levenshtein, jaccard or dice")->required();
  build->add_option("--seed", b.seed, "Clustering seed")->capture_default_str();
  build->add_option("--min-cardinality", b.min_cardinality, "Split only clusters at least this large")
      ->capture_default_str();
  build->add_option("--max-depth", b.max_depth, "Do not split clusters at this depth");
  build->add_option("--min-radius", b.min_radius, "Do not split clusters below this radius");
  build->add_option("--min-length", b.min_length, "Drop shorter sequences");
  build->add_option("--max-length", b.max_length, "Drop longer sequences");
  build->add_flag("--json", b.json, "Print the size report as JSON");
  build->add_option("--output", b.output, "Index path")->required();

  SearchArgs s;
  auto* search = app.add_subcommand("search", "Run queries against an index");
  search->add_option("--index", s.index, "Index path")->required();
  search->add_option("--queries", s.queries, "Query file (FASTA or sets, matching the index)")->required();
  search->add_option("--mode", s.mode, "rnn, knn-repeated, knn-bfs or knn-dfs")->capture_default_str();
  search->add_option("--radius", s.radius, "Search radius for rnn");
  search->add_option("-k", s.k, "Neighbors for k-NN modes");
  search->add_option("--output", s.output, "TSV results path, '-' for stdout")->capture_default_str();
  search->add_option("--stats", s.stats, "Per-query JSON-lines path (default: OUTPUT.jsonl)");
  search->add_option("--threads", s.threads, "Parallel queries")->capture_default_str()->check(CLI::PositiveNumber);
  search->add_option("--raw-data", s.raw_data, "Debug: linearly scan this dataset instead of the index");
  search->add_option("--raw-format", s.raw_format, "Format of --raw-data (default: query format)");
  search->add_flag("--verify-pruning", s.verify_pruning, "Debug: check every pruned cluster");

  std::string stats_index;
  auto* stats = app.add_subcommand("stats", "Describe an index");
  stats->add_option("--index", stats_index, "Index path")->required();

  std::string bench_config, bench_output = "-";
  auto* bench = app.add_subcommand("bench", "Run a benchmark config");
  bench->add_option("--config", bench_config, "JSON config path")->required();
  bench->add_option("--output", bench_output, "JSON-lines report path, '-' for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*build) return cmd_build(b);
    if (*search) return cmd_search(s);
    if (*stats) return cmd_stats(stats_index);
    if (*bench) {
      std::unique_ptr<std::ofstream> holder;
      run_bench(bench_config, sink(bench_output, holder), std::cerr);
      return 0;
    }
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return kIntegrity;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kData;
  } catch (const UnsupportedMetric& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kUsage;
  } catch (const MetricMismatch& e) {
    std::cerr << "metric mismatch: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
