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

#include "bench.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "deltatree/analysis.hpp"
#include "deltatree/synthetic.hpp"
#include "engine.hpp"

namespace deltatree::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

SearchSettings search_settings(const json& j, unsigned threads) {
  SearchSettings s;
  s.mode = parse_mode(j.value("mode", "knn-dfs"));
  s.radius = j.value("radius", 0.0);
  s.k = j.value("k", std::size_t{10});
  s.threads = threads;
  return s;
}

double mean_seconds(const std::vector<QueryOutcome>& v) {
  if (v.empty()) return 0;
  double t = 0;
  for (const auto& o : v) t += o.seconds;
  return t / static_cast<double>(v.size());
}

struct Means {
  double distance_computations = 0, decompressed_fraction = 0, hits = 0;
};

Means means(const std::vector<QueryOutcome>& v, std::size_t points) {
  Means m;
  if (v.empty()) return m;
  for (const auto& o : v) {
    m.distance_computations += static_cast<double>(o.result.stats.distance_computations);
    m.decompressed_fraction += static_cast<double>(o.result.stats.points_decompressed) / static_cast<double>(points);
    m.hits += static_cast<double>(o.result.hits.size());
  }
  const auto n = static_cast<double>(v.size());
  return {m.distance_computations / n, m.decompressed_fraction / n, m.hits / n};
}

bool same_distances(const std::vector<QueryOutcome>& a, const std::vector<QueryOutcome>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i].result.hits;
    const auto& y = b[i].result.hits;
    if (x.size() != y.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j].distance != y[j].distance) return false;
    }
  }
  return true;
}

/// Builds, sizes and searches one dataset; the row carries everything needed
/// to reproduce it.
template <CompressiveMetric M>
json measure(const Dataset<typename M::Point>& train, const Dataset<typename M::Point>& queries, const M& metric,
             const BuildSettings& build, const SearchSettings& search, bool with_gzip) {
  using P = typename M::Point;
  const BuildReport r = build_index(train, metric, build);
  json row = to_json(r);
  if (with_gzip) {
    const auto gz = gzip_size(plain_text(train));
    row["gzip_bytes"] = gz ? json(*gz) : json(nullptr);
    row["gzip_ratio"] = gz && *gz ? json(static_cast<double>(r.raw_bytes) / static_cast<double>(*gz)) : json(nullptr);
  }
  if (queries.empty()) return row;

  CompressedIndex<M> index(IndexFile::from_bytes(r.bytes), metric);
  std::vector<QueryOutcome> packed, raw;
  bool stripped = false;
  if constexpr (std::is_same_v<M, HammingMetric>) stripped = build.gap_stripped_queries;
  if constexpr (std::is_same_v<M, HammingMetric>) {
    if (stripped) {
      packed = search_index(GapStrippedSpace(index), queries, search);
      raw = search_raw(train, queries, search, [](const Sequence& q, const Sequence& p) {
        return static_cast<double>(levenshtein_distance(strip_gaps(q), strip_gaps(p)));
      });
    }
  }
  if (!stripped) {
    packed = search_index(DirectSpace<M>(index), queries, search);
    raw = search_raw(train, queries, search, [&](const P& q, const P& p) { return metric.distance(q, p); });
  }
  const Means m = means(packed, train.size());
  const double tp = mean_seconds(packed), tr = mean_seconds(raw);
  row["queries"] = queries.size();
  row["raw_query_seconds"] = tr;
  row["index_query_seconds"] = tp;
  row["slowdown"] = tr > 0 ? json(tp / tr) : json(nullptr);
  row["mean_distance_computations"] = m.distance_computations;
  row["mean_decompressed_fraction"] = m.decompressed_fraction;
  row["mean_hits"] = m.hits;
  row["agrees_with_scan"] = same_distances(packed, raw);
  return row;
}

synthetic::FamilyParams family_params(const json& src, std::size_t size) {
  synthetic::FamilyParams p;
  p.families = src.value("families", p.families);
  p.per_family = std::max<std::size_t>(1, size / p.families);
  p.length = src.value("length", p.length);
  p.mutation_rate = src.value("mutation_rate", p.mutation_rate);
  p.indels = src.value("indels", p.indels);
  return p;
}

Dataset<Sequence> synthetic_sequences(const json& src, std::uint64_t seed) {
  const std::string kind = src.at("synthetic");
  const std::size_t size = src.at("size");
  if (kind == "families") return synthetic::mutated_families(family_params(src, size), seed);
  if (kind == "aligned") return synthetic::aligned_families(family_params(src, size), seed);
  if (kind == "random") return synthetic::random_sequences(size, src.value("length", std::size_t{300}), synthetic::kDna, seed);
  if (kind == "grid") return synthetic::grid_manifold(size, seed).data;
  throw InvalidInput("unknown synthetic sequence kind '" + kind + "'");
}

Dataset<IntSet> synthetic_sets(const json& src, std::uint64_t seed) {
  const std::string kind = src.at("synthetic");
  if (kind != "transactions") throw InvalidInput("unknown synthetic set kind '" + kind + "'");
  synthetic::TransactionParams p;
  p.count = src.at("size");
  p.clusters = src.value("clusters", p.clusters);
  p.universe = src.value("universe", p.universe);
  p.prototype_size = src.value("prototype_size", p.prototype_size);
  return synthetic::clustered_transactions(p, seed);
}

json run_dataset(const json& d, const fs::path& base, std::uint64_t seed, unsigned threads) {
  const std::string name = d.at("name");
  const std::string metric_name = d.at("metric");
  const json& src = d.at("source");
  const std::size_t holdout = d.value("holdout", std::size_t{0});
  const SearchSettings search = search_settings(d.value("search", json::object()), threads);

  return with_metric(metric_name, [&](auto metric) -> json {
    using M = decltype(metric);
    using P = typename M::Point;
    Dataset<P> data;
    BuildSettings build;
    build.seed = seed;
    build.criteria.min_cardinality = d.value("min_cardinality", std::size_t{1});
    if (src.contains("file")) {
      fs::path path = src.at("file").get<std::string>();
      if (path.is_relative()) path = base / path;
      if (!fs::exists(path)) return json{{"dataset", name}, {"status", "unavailable"}, {"path", path.string()}};
      const Format format = parse_format(src.value("format", "fasta"));
      data = load_points<P>(path, format);
      if constexpr (std::is_same_v<M, HammingMetric>) build.gap_stripped_queries = format == Format::FastaMsa;
    } else if constexpr (std::is_same_v<P, Sequence>) {
      data = synthetic_sequences(src, seed);
      if constexpr (std::is_same_v<M, HammingMetric>) build.gap_stripped_queries = src.at("synthetic") == "aligned";
    } else {
      data = synthetic_sets(src, seed);
    }
    auto [train, queries] = split_holdout(data, holdout, seed ^ 0x9e3779b97f4a7c15ULL);
    json row = measure(train, queries, metric, build, search, true);
    row["dataset"] = name;
    row["status"] = "ok";
    row["mode"] = d.value("search", json::object()).value("mode", "knn-dfs");
    return row;
  });
}

std::vector<json> run_sweep(const json& s, std::uint64_t seed, unsigned threads) {
  const std::vector<std::size_t> sizes = s.at("sizes");
  const std::size_t nq = s.value("queries", std::size_t{50});
  const SearchSettings search = search_settings(s.value("search", json::object()), threads);
  std::vector<json> rows;
  std::vector<double> xs, ys;
  for (const std::size_t n : sizes) {
    const auto g = synthetic::grid_manifold(n, seed + n);
    const auto queries = synthetic::grid_queries(g.grid, nq, seed + n + 1);
    BuildSettings build;
    build.seed = seed;
    json row = measure(g.data, queries, LevenshteinMetric{}, build, search, false);
    row["sweep"] = s.value("name", "grid");
    row["size"] = n;
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::max(row["mean_distance_computations"].get<double>(), 1.0));
    rows.push_back(std::move(row));
  }
  if (xs.size() >= 2) rows.push_back({{"sweep", s.value("name", "grid")}, {"loglog_slope", loglog_slope(xs, ys)}});
  return rows;
}

}  // namespace

std::string plain_text(const Dataset<Sequence>& data) {
  std::string s;
  for (const auto& r : data) s.append(r.payload).push_back('\n');
  return s;
}

std::string plain_text(const Dataset<IntSet>& data) { return format_set_transactions(data); }

/// Size of `text` after `gzip -9`, or nothing when gzip is unavailable.
std::optional<std::uint64_t> gzip_size(const std::string& text) {
  if (std::system("command -v gzip > /dev/null 2>&1") != 0) return std::nullopt;
  const fs::path dir = fs::temp_directory_path();
  const std::string tag = std::to_string(reinterpret_cast<std::uintptr_t>(&text)) + "_" + fnv1a_hex(text);
  const fs::path in = dir / ("deltatree_bench_" + tag), out = dir / ("deltatree_bench_" + tag + ".gz");
  {
    std::ofstream f(in, std::ios::binary);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
  }
  const std::string cmd = "gzip -9 -c '" + in.string() + "' > '" + out.string() + "'";
  std::optional<std::uint64_t> size;
  if (std::system(cmd.c_str()) == 0) size = fs::file_size(out);
  std::error_code ec;
  fs::remove(in, ec);
  fs::remove(out, ec);
  return size;
}

void run_bench(const std::filesystem::path& config, std::ostream& out, std::ostream& log) {
  std::ifstream in(config);
  if (!in) throw IoError("cannot read " + config.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const json cfg = json::parse(text);
  const std::string hash = fnv1a_hex(text);
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{42});
  const unsigned threads = cfg.value("threads", 1u);
  const fs::path base = config.parent_path();

  auto emit = [&](json row) {
    row["seed"] = seed;
    row["config_hash"] = hash;
    out << row.dump() << '\n';
    out.flush();
  };
  for (const auto& d : cfg.value("datasets", json::array())) {
    log << "bench: " << d.at("name").get<std::string>() << '\n';
    json row = run_dataset(d, base, seed, threads);
    if (!row.contains("size")) row["size"] = row.value("points", std::size_t{0});
    emit(std::move(row));
  }
  if (cfg.contains("sweep")) {
    log << "bench: sweep\n";
    for (auto& row : run_sweep(cfg.at("sweep"), seed, threads)) emit(std::move(row));
  }
  emit({{"note",
         "absolute per-query seconds and full-scale corpus ratios are hardware- and data-dependent; "
         "compare ratios and slowdowns, not seconds"}});
}

}  // namespace deltatree::cli
