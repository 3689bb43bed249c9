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

// End-to-end acceptance checks. Each criterion prints exactly one line,
//   criterion N: PASS|FAIL|SKIP  <measurements>
// and the process exits 0 (pass), 1 (fail) or 77 (skipped), so ctest can run
// them one per test. Progress goes to stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bench.hpp"
#include "deltatree/analysis.hpp"
#include "deltatree/compressor.hpp"
#include "deltatree/data_io.hpp"
#include "deltatree/search.hpp"
#include "deltatree/store.hpp"
#include "deltatree/synthetic.hpp"

namespace {

using namespace deltatree;
namespace fs = std::filesystem;

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict = Verdict::Pass;
  std::string detail;
};

std::string fmt(double x, int precision = 3) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Oracles. Deliberately plain: none of these share code with the library.

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1] ? 1u : 0u)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t mismatches(const std::string& a, const std::string& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

std::string without_gaps(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c != '-' && c != '.') out.push_back(c);
  }
  return out;
}

/// Jaccard distance as the exact fraction |A ^ B| / |A u B|, rounded once:
/// an IEEE division of two exactly representable integers.
double set_distance(const IntSet& a, const IntSet& b) {
  std::vector<std::uint32_t> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  const std::size_t uni = a.size() + b.size() - inter.size();
  if (uni == 0) return 0;
  return static_cast<double>(uni - inter.size()) / static_cast<double>(uni);
}

std::vector<double> sorted_distances(const HitSet& h) {
  std::vector<double> d;
  for (const Hit& x : h.hits) d.push_back(x.distance);
  return d;
}

// ---------------------------------------------------------------------------
// Criteria 1 and 2.

bool queries_wanted = true;  // criterion 2 only needs the round trip

struct ExactnessRow {
  std::string name;
  std::size_t n = 0;
  std::size_t queries = 0;
  std::size_t mismatched = 0;  // query x algorithm pairs disagreeing with the oracle
  bool lossless = false;
  double mean_rnn_hits = 0;
  double seconds = 0;
};

template <class Space, class Oracle>
ExactnessRow run_exactness(const std::string& name, const Dataset<typename Space::Point>& train,
                           const Dataset<typename Space::QueryPoint>& queries,
                           const CompressedIndex<typename Space::Metric>& index, const Space& space, double rho,
                           std::size_t k, Oracle&& oracle) {
  ExactnessRow row{name, train.size(), queries.size()};
  const auto t0 = std::chrono::steady_clock::now();

  auto restored = decompress_cluster(index, 0);
  std::sort(restored.begin(), restored.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  auto expected = train;
  std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  row.lossless = restored == expected;

  std::vector<KnnAlgorithm> algorithms{KnnAlgorithm::BreadthFirst, KnnAlgorithm::DepthFirst};
  if (Space::supports_radius_growth) algorithms.push_back(KnnAlgorithm::RepeatedRnn);

  double hits = 0;
  const std::size_t used = queries_wanted ? queries.size() : 0;
  for (std::size_t qi = 0; qi < used; ++qi) {
    const auto& q = queries[qi];
    std::vector<Hit> all;
    all.reserve(train.size());
    for (const auto& r : train) all.push_back({r.id, oracle(q.payload, r.payload)});
    std::sort(all.begin(), all.end());

    std::vector<Hit> in_ball;
    for (const Hit& h : all) {
      if (h.distance <= rho) in_ball.push_back(h);
    }
    const auto rnn = rnn_search(space, q.payload, rho);
    hits += static_cast<double>(rnn.hits.size());
    if (rnn.hits != in_ball) ++row.mismatched;

    std::vector<double> nearest;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) nearest.push_back(all[i].distance);
    for (const KnnAlgorithm a : algorithms) {
      if (sorted_distances(knn_search(space, q.payload, k, a)) != nearest) ++row.mismatched;
    }
  }
  row.mean_rnn_hits = used == 0 ? 0 : hits / static_cast<double>(used);
  row.seconds = seconds_since(t0);
  return row;
}

template <CompressiveMetric M>
CompressedIndex<M> build_index(const Dataset<typename M::Point>& train, const WriteOptions& options = {}) {
  const auto tree = Tree<M>::build(train, M{}, {}, 7);
  const auto c = compress(tree);
  return CompressedIndex<M>(IndexFile::from_bytes(serialize_index(c.tree, c.plan, options)));
}

constexpr std::size_t kQueries = 100;
constexpr std::size_t kK = 10;

synthetic::FamilyParams families_for(std::size_t n, bool indels) {
  synthetic::FamilyParams p;
  p.families = std::max<std::size_t>(10, n / 100);
  p.per_family = (n + kQueries + p.families - 1) / p.families;
  p.length = 300;
  p.mutation_rate = 0.05;
  p.indels = indels;
  return p;
}

template <class P>
std::pair<Dataset<P>, Dataset<P>> holdout(Dataset<P> data, std::size_t n, std::uint64_t seed) {
  data.resize(n + kQueries);
  return split_holdout(data, kQueries, seed);
}

fs::path data_dir() {
  if (const char* env = std::getenv("DELTATREE_DATA_DIR")) return env;
  return fs::path(DELTATREE_SOURCE_DIR) / "data";
}

std::vector<ExactnessRow> exactness_rows(const std::vector<std::size_t>& sizes) {
  std::vector<ExactnessRow> rows;
  auto report = [&](ExactnessRow row) {
    std::cerr << "  " << row.name << " n=" << row.n << " mismatches=" << row.mismatched
              << " lossless=" << row.lossless << " rnn_hits=" << fmt(row.mean_rnn_hits) << " ("
              << fmt(row.seconds) << " s)\n";
    rows.push_back(std::move(row));
  };

  for (const std::size_t n : sizes) {
    const std::uint64_t seed = 1000 + n;
    {
      auto [train, queries] = holdout(synthetic::mutated_families(families_for(n, true), seed), n, seed);
      const auto index = build_index<LevenshteinMetric>(train);
      report(run_exactness("levenshtein", train, queries, index, DirectSpace<LevenshteinMetric>(index), 30.0, kK,
                           [](const Sequence& a, const Sequence& b) { return double(edit_distance(a, b)); }));
    }
    {
      auto [train, queries] = holdout(synthetic::mutated_families(families_for(n, false), seed), n, seed);
      const auto index = build_index<HammingMetric>(train);
      report(run_exactness("hamming", train, queries, index, DirectSpace<HammingMetric>(index), 25.0, kK,
                           [](const Sequence& a, const Sequence& b) { return double(mismatches(a, b)); }));
    }
    {
      synthetic::TransactionParams p;
      p.count = n + kQueries;
      p.clusters = std::max<std::size_t>(10, n / 100);
      auto [train, queries] = holdout(synthetic::clustered_transactions(p, seed), n, seed);
      const auto index = build_index<JaccardMetric>(train);
      report(run_exactness("jaccard", train, queries, index, DirectSpace<JaccardMetric>(index), 0.3, kK,
                           set_distance));
    }
    {
      auto [train, queries] = holdout(synthetic::aligned_families(families_for(n, true), seed), n, seed);
      const auto index = build_index<HammingMetric>(train, WriteOptions{.gap_stripped_queries = true});
      report(run_exactness("msa-gap-stripped", train, queries, index, GapStrippedSpace(index), 30.0, kK,
                           [](const Sequence& a, const Sequence& b) {
                             return double(edit_distance(without_gaps(a), without_gaps(b)));
                           }));
    }
  }

  const fs::path kosarak = data_dir() / "kosarak.dat";
  if (fs::exists(kosarak)) {
    auto [train, queries] = split_holdout(read_set_transactions(kosarak), kQueries, 11);
    const auto index = build_index<JaccardMetric>(train);
    report(run_exactness("kosarak", train, queries, index, DirectSpace<JaccardMetric>(index), 0.5, kK,
                         set_distance));
  } else {
    std::cerr << "  kosarak: not found under " << data_dir() << ", skipped\n";
  }
  return rows;
}

Outcome criterion_exactness(bool lossless_only) {
  queries_wanted = !lossless_only;
  const auto rows = exactness_rows({1000, 4000, 10000});
  std::size_t bad = 0, lossy = 0;
  for (const auto& r : rows) {
    bad += r.mismatched;
    lossy += !r.lossless;
  }
  Outcome o;
  if (lossless_only) {
    o.verdict = lossy == 0 && rows.size() >= 12 ? Verdict::Pass : Verdict::Fail;
    o.detail = std::to_string(rows.size()) + " configurations, " + std::to_string(lossy) +
               " failed root decompression";
  } else {
    o.verdict = bad == 0 && rows.size() >= 12 ? Verdict::Pass : Verdict::Fail;
    o.detail = std::to_string(rows.size()) + " configurations x " + std::to_string(kQueries) +
               " queries, rho-NN and every k-NN algorithm (k=" + std::to_string(kK) + "); " + std::to_string(bad) +
               " disagreements with linear scan";
  }
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 3: public set datasets, when present.

Outcome criterion_set_ratios() {
  const fs::path kosarak = data_dir() / "kosarak.dat";
  const fs::path movielens = data_dir() / "movielens.dat";
  if (!fs::exists(kosarak) && !fs::exists(movielens)) {
    return {Verdict::Skip, "neither kosarak.dat nor movielens.dat found in " + data_dir().string() +
                               " (set DELTATREE_DATA_DIR)"};
  }
  auto ratios = [](const fs::path& path) {
    const auto data = read_set_transactions(path);
    const auto tree = Tree<JaccardMetric>::build(data, {}, {}, 7);
    const auto c = compress(tree);
    const double raw = static_cast<double>(raw_size(data));
    const double ours = raw / static_cast<double>(serialize_index(c.tree, c.plan).size());
    const auto gz = cli::gzip_size(cli::plain_text(data));
    return std::pair{ours, gz ? std::optional(raw / static_cast<double>(*gz)) : std::nullopt};
  };

  Outcome o;
  bool ok = true, partial = false;
  if (fs::exists(kosarak)) {
    const auto [ours, gz] = ratios(kosarak);
    ok = ok && ours >= 2.0 && ours <= 4.0 && gz && *gz >= 2.5 && *gz <= 3.5;
    o.detail += "kosarak ratio " + fmt(ours) + " in [2.0, 4.0], gzip " + (gz ? fmt(*gz) : "unavailable") +
                " in [2.5, 3.5]; ";
  } else {
    partial = true;
    o.detail += "kosarak missing; ";
  }
  if (fs::exists(movielens)) {
    const auto [ours, gz] = ratios(movielens);
    (void)gz;
    ok = ok && ours >= 2.3 && ours <= 4.3;
    o.detail += "movielens ratio " + fmt(ours) + " in [2.3, 4.3]";
  } else {
    partial = true;
    o.detail += "movielens missing";
  }
  o.verdict = !ok ? Verdict::Fail : partial ? Verdict::Skip : Verdict::Pass;
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 4: compression ratio tracks self-similarity.

template <CompressiveMetric M>
double ratio_of(const Dataset<typename M::Point>& data) {
  const auto tree = Tree<M>::build(data, M{}, {}, 7);
  const auto c = compress(tree);
  return static_cast<double>(raw_size(data)) / static_cast<double>(serialize_index(c.tree, c.plan).size());
}

Outcome criterion_self_similarity() {
  std::map<double, double> by_rate;
  for (const double rate : {0.01, 0.02, 0.05}) {
    synthetic::FamilyParams p;
    p.families = 100;
    p.per_family = 100;
    p.length = 300;
    p.mutation_rate = rate;
    by_rate[rate] = ratio_of<LevenshteinMetric>(synthetic::mutated_families(p, 4));
    std::cerr << "  families at " << rate << " mutation: ratio " << fmt(by_rate[rate]) << "\n";
  }
  const double random = ratio_of<LevenshteinMetric>(synthetic::random_sequences(10000, 300, synthetic::kDna, 4));
  std::cerr << "  random: ratio " << fmt(random) << "\n";

  // The bound must hold over the whole "at most 5%" range, so the 5% corpus decides.
  const bool ok = by_rate.at(0.05) > 3.0 && random < 1.2;
  std::string detail = "families ratio " + fmt(by_rate.at(0.05)) + " at 5% mutation (need > 3; 2%: " +
                       fmt(by_rate.at(0.02)) + ", 1%: " + fmt(by_rate.at(0.01)) + "), random " + fmt(random) +
                       " (need < 1.2)";
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

// ---------------------------------------------------------------------------
// Criterion 5: cost-model algebra over the parameter grid.

Outcome criterion_cost_model() {
  std::size_t points = 0;
  double worst_sum = 0, worst_total = 0;
  for (int L = 1; L <= 4; ++L) {
    for (unsigned S = 1; S <= 6; ++S) {
      for (const double r : {1.0, 10.0}) {
        const double n = std::exp2(26);
        const CostModelParams p{r, double(L), S, n};
        // Level-by-level oracle: every node at depth d is encoded against its
        // parent, whose radius is that of the stride the parent starts in.
        double levels = 0;
        for (int d = 1; d <= int(S) * L; ++d) {
          const int stride = (d - 1) / L;  // 0-based stride holding the parent
          levels += std::exp2(d) * r / std::pow(std::sqrt(2.0), stride * L);
        }
        const double closed = recursive_model_cost(p);
        worst_sum = std::max(worst_sum, std::abs(closed - levels) / levels);
        const double tr = recursive_model_cost(p), tu = unitary_model_cost(p);
        worst_total = std::max(worst_total, std::abs(total_model_cost(p) - (tr + tu)));
        ++points;
      }
    }
  }
  const bool ok = worst_sum <= 1e-9 && worst_total == 0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::to_string(points) + " grid points; closed form vs level sum max rel. error " + fmt(worst_sum) +
              " (<= 1e-9); |T - (T_R + T_U)| max " + fmt(worst_total) + " (== 0)"};
}

// ---------------------------------------------------------------------------
// Criterion 6: radii on a uniform disk.

Outcome criterion_radii() {
  double worst = 0, mean = 0;
  std::size_t witnesses = 0;
  constexpr int kBuilds = 20;
  for (int b = 0; b < kBuilds; ++b) {
    const auto disk = synthetic::uniform_disk(10000, 1.0, 600 + b);
    const auto tree = Tree<EuclideanMetric<2>>::build(disk, {}, {}, b);
    const double bound = tree.root().radius / std::sqrt(2.0);
    double depth2 = 0;
    bool witness = false;
    for (const Cluster& c : tree.nodes()) {
      if (c.depth == 2) depth2 = std::max(depth2, c.radius);
      if (c.depth == 1) witness = witness || c.radius > tree.root().radius;
    }
    worst = std::max(worst, depth2 / bound);
    mean += depth2 / bound / kBuilds;
    witnesses += witness;
  }
  const bool ok = worst <= 1.05 && witnesses > 0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "depth-2 max radius / (R/sqrt2): worst " + fmt(worst) + " (need <= 1.05), mean " + fmt(mean) + "; " +
              std::to_string(witnesses) + "/20 builds with a depth-1 radius above the root's"};
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8: grid manifold scaling.

struct GridRun {
  std::size_t n = 0;
  double rnn_distances = 0, knn_distances = 0;
  double rnn_fraction = 0, knn_fraction = 0;
  double rnn_hits = 0;
};

GridRun grid_run(std::size_t n) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sample = synthetic::grid_manifold(n, 70 + n);
  const auto index = build_index<LevenshteinMetric>(sample.data);
  const DirectSpace<LevenshteinMetric> space(index);
  const auto queries = synthetic::grid_queries(sample.grid, kQueries, 71 + n);
  GridRun g{n};
  for (const auto& q : queries) {
    const auto rnn = rnn_search(space, q.payload, 1.0);
    const auto knn = knn_depth_first(space, q.payload, kK);
    g.rnn_distances += double(rnn.stats.distance_computations) / kQueries;
    g.knn_distances += double(knn.stats.distance_computations) / kQueries;
    g.rnn_fraction += decompressed_fraction(index, rnn) / kQueries;
    g.knn_fraction += decompressed_fraction(index, knn) / kQueries;
    g.rnn_hits += double(rnn.hits.size()) / kQueries;
  }
  std::cerr << "  grid n=" << n << ": rho-NN " << fmt(g.rnn_distances) << " distances, " << fmt(g.rnn_hits)
            << " hits, fraction " << fmt(g.rnn_fraction) << "; k-NN " << fmt(g.knn_distances) << " distances, fraction "
            << fmt(g.knn_fraction) << " (" << fmt(seconds_since(t0)) << " s)\n";
  return g;
}

const std::vector<std::size_t> kGridSizes{1000, 4000, 16000, 64000};

Outcome criterion_sublinear() {
  std::vector<double> x, rnn, knn;
  double max_hits = 0;
  for (const std::size_t n : kGridSizes) {
    const auto g = grid_run(n);
    x.push_back(double(n));
    rnn.push_back(g.rnn_distances);
    knn.push_back(g.knn_distances);
    max_hits = std::max(max_hits, g.rnn_hits);
  }
  const double s_rnn = loglog_slope(x, rnn), s_knn = loglog_slope(x, knn);
  const bool ok = s_rnn < 0.75 && s_knn < 0.75 && max_hits <= 10;
  return {ok ? Verdict::Pass : Verdict::Fail, "log-log slope of distance computations vs n: rho-NN " + fmt(s_rnn) +
                                                  ", k-NN " + fmt(s_knn) + " (need < 0.75); mean rho-NN hits <= " +
                                                  fmt(max_hits) + " (need <= 10)"};
}

Outcome criterion_selective() {
  const auto g = grid_run(kGridSizes.back());
  const bool ok = g.rnn_fraction <= 0.25 && g.knn_fraction <= 0.25;
  return {ok ? Verdict::Pass : Verdict::Fail, "n=64000 mean decompressed fraction: rho-NN " + fmt(g.rnn_fraction) +
                                                  ", k-NN " + fmt(g.knn_fraction) + " (need <= 0.25)"};
}

Outcome criterion_not_reproducible() {
  return {Verdict::Skip,
          "large-corpus ratios and absolute timings are out of desk scale; criteria 3-8 stand in (see README)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deltatree acceptance checks"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, std::function<Outcome()>> criteria{
      {1, [] { return criterion_exactness(false); }},
      {2, [] { return criterion_exactness(true); }},
      {3, criterion_set_ratios},
      {4, criterion_self_similarity},
      {5, criterion_cost_model},
      {6, criterion_radii},
      {7, criterion_sublinear},
      {8, criterion_selective},
      {9, criterion_not_reproducible},
  };

  bool failed = false, skipped = false;
  for (const int id : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria.at(id)();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("error: ") + e.what()};
    }
    const char* word = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << id << ": " << word << "  " << o.detail << "  [" << fmt(seconds_since(t0)) << " s]"
              << std::endl;
    failed = failed || o.verdict == Verdict::Fail;
    skipped = skipped || o.verdict == Verdict::Skip;
  }
  return failed ? 1 : skipped ? 77 : 0;
}
