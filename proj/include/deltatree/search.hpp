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

// Exact rho-NN and k-NN search over a compressed index. Clusters are pruned
// with ball bounds from the query-to-center distance and the cluster radius;
// only leaves that survive are decompressed and scanned.
//
// Results are ordered by (distance, id). k-NN keeps the k smallest pairs under
// that order, so ties at the k-th distance resolve to the smallest ids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <variant>
#include <vector>

#include "deltatree/data_io.hpp"
#include "deltatree/errors.hpp"
#include "deltatree/metrics.hpp"
#include "deltatree/store.hpp"

namespace deltatree {

struct Hit {
  std::uint64_t id = 0;
  double distance = 0;

  friend bool operator==(const Hit&, const Hit&) = default;
  friend bool operator<(const Hit& a, const Hit& b) noexcept {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  }
};

struct SearchStats {
  std::size_t distance_computations = 0;
  std::size_t clusters_visited = 0;
  std::size_t points_decompressed = 0;
};

struct HitSet {
  std::vector<Hit> hits;  // ascending by (distance, id)
  SearchStats stats;
};

enum class KnnAlgorithm { RepeatedRnn, BreadthFirst, DepthFirst };

struct RnnMode {
  double radius = 0;
};

struct KnnMode {
  std::size_t k = 1;
  KnnAlgorithm algorithm = KnnAlgorithm::DepthFirst;
};

template <class P>
struct Query {
  P payload;
  std::variant<RnnMode, KnnMode> mode;
};

struct SearchOptions {
  /// Decompress every pruned cluster and check that its bound was sound.
  /// Throws std::logic_error on a violation. Testing aid; very slow.
  bool verify_pruning = false;
  /// Radius growth per repeated rho-NN pass: max(2, 2^(1 / root LFD)),
  /// capped at this factor.
  double max_growth = 2.0;
};

/// Queries compared directly under the index metric.
template <CompressiveMetric M>
class DirectSpace {
 public:
  using Metric = M;
  using Point = typename M::Point;
  using QueryPoint = Point;
  static constexpr bool supports_radius_growth = M::supports_radius_growth;

  explicit DirectSpace(const CompressedIndex<M>& index) : index_(&index) {}

  const CompressedIndex<M>& index() const noexcept { return *index_; }
  QueryPoint prepare(const QueryPoint& q) const { return q; }
  double distance(const QueryPoint& q, const Point& p) const { return index_->metric().distance(q, p); }
  double radius(const NodeRecord& r) const noexcept { return r.radius; }
  DistanceBounds bounds(double to_center, double radius) const noexcept {
    return index_->metric().bounds(to_center, radius);
  }

 private:
  const CompressedIndex<M>* index_;
};

/// Unaligned queries against an alignment indexed under Hamming: both sides
/// are gap-stripped and compared by edit distance, pruning with the per-node
/// edit-distance radii stored at build time.
class GapStrippedSpace {
 public:
  using Metric = HammingMetric;
  using Point = Sequence;
  using QueryPoint = Sequence;
  static constexpr bool supports_radius_growth = true;

  explicit GapStrippedSpace(const CompressedIndex<HammingMetric>& index) : index_(&index) {
    if (!index.header().gap_stripped_queries()) {
      throw InvalidInput("index was built without gap-stripped radii");
    }
  }

  const CompressedIndex<HammingMetric>& index() const noexcept { return *index_; }
  QueryPoint prepare(const QueryPoint& q) const { return strip_gaps(q); }
  double distance(const QueryPoint& q, const Point& p) const {
    return static_cast<double>(levenshtein_distance(q, strip_gaps(p)));
  }
  double radius(const NodeRecord& r) const noexcept { return r.aux_radius; }
  DistanceBounds bounds(double to_center, double radius) const noexcept {
    return triangle_bounds(to_center, radius);
  }

 private:
  const CompressedIndex<HammingMetric>* index_;
};

namespace detail {

/// Slack for floating-point bound arithmetic; integer metrics are unaffected.
inline bool exceeds(double bound, double threshold) noexcept {
  return bound > threshold + 1e-9 * std::max(1.0, std::abs(threshold));
}

/// Smallest value t among `items` (value, weight) with total weight of values
/// <= t at least `k`. Three-way QuickSelect on the values, carrying weights.
inline double weighted_select(std::vector<std::pair<double, std::uint64_t>> items, std::uint64_t k) {
  std::size_t lo = 0, hi = items.size();
  std::uint64_t need = k;
  while (lo < hi) {
    const double a = items[lo].first, b = items[lo + (hi - lo) / 2].first, c = items[hi - 1].first;
    const double pivot = std::max(std::min(a, b), std::min(std::max(a, b), c));
    // [lo, lt) < pivot, [lt, i) == pivot, [gt, hi) > pivot
    std::size_t lt = lo, i = lo, gt = hi;
    while (i < gt) {
      if (items[i].first < pivot) {
        std::swap(items[lt++], items[i++]);
      } else if (items[i].first > pivot) {
        std::swap(items[i], items[--gt]);
      } else {
        ++i;
      }
    }
    std::uint64_t below = 0, equal = 0;
    for (std::size_t j = lo; j < lt; ++j) below += items[j].second;
    for (std::size_t j = lt; j < gt; ++j) equal += items[j].second;
    if (need <= below) {
      hi = lt;
    } else if (need <= below + equal) {
      return pivot;
    } else {
      need -= below + equal;
      lo = gt;
    }
  }
  throw std::logic_error("weighted_select: total weight below k");
}

template <class Space>
class Searcher {
 public:
  using M = typename Space::Metric;
  using Point = typename Space::Point;
  using QueryPoint = typename Space::QueryPoint;

  Searcher(const Space& space, const QueryPoint& query, const SearchOptions& options)
      : space_(space), index_(space.index()), session_(space.index()), query_(space.prepare(query)),
        options_(options) {}

  std::size_t point_count() const noexcept { return index_.size(); }
  NodeRecord node(std::uint64_t i) const { return index_.node(i); }
  double radius(const NodeRecord& r) const noexcept { return space_.radius(r); }

  double center_distance(std::uint64_t i) {
    if (auto it = center_d_.find(i); it != center_d_.end()) return it->second;
    const Point& c = session_.center(i);
    ++stats_.distance_computations;
    ++stats_.clusters_visited;
    const double d = space_.distance(query_, c);
    center_d_.emplace(i, d);
    return d;
  }

  DistanceBounds bounds(std::uint64_t i, const NodeRecord& r) {
    return space_.bounds(center_distance(i), space_.radius(r));
  }

  /// Every member of leaf i with its distance, in tree order.
  const std::vector<Hit>& leaf_hits(std::uint64_t i) {
    if (auto it = leaf_d_.find(i); it != leaf_d_.end()) return it->second;
    const double dc = center_distance(i);
    std::vector<Hit> hits;
    session_.scan_leaf(i, [&](std::uint64_t id, const Point& p, bool is_center) {
      if (is_center) {
        hits.push_back({id, dc});
      } else {
        ++stats_.distance_computations;
        hits.push_back({id, space_.distance(query_, p)});
      }
    });
    return leaf_d_.emplace(i, std::move(hits)).first->second;
  }

  /// Records a pruning decision; in verify mode checks it against the data.
  void pruned(std::uint64_t i, double lower) {
    if (!options_.verify_pruning) return;
    Session<M> side(index_);
    for (const auto& rec : side.decompress(i)) {
      const double d = space_.distance(query_, rec.payload);
      if (exceeds(lower, d)) {
        throw std::logic_error("unsound prune at node " + std::to_string(i) + ": point " + std::to_string(rec.id) +
                               " at " + std::to_string(d) + " below bound " + std::to_string(lower));
      }
    }
  }

  std::vector<Hit> rnn(double rho) {
    std::vector<Hit> out;
    if (point_count() == 0) return out;
    std::vector<std::uint64_t> stack{0};
    while (!stack.empty()) {
      const std::uint64_t i = stack.back();
      stack.pop_back();
      const NodeRecord r = node(i);
      const DistanceBounds b = bounds(i, r);
      if (exceeds(b.lower, rho)) {
        pruned(i, b.lower);
        continue;
      }
      if (r.is_leaf()) {
        for (const Hit& h : leaf_hits(i)) {
          if (h.distance <= rho) out.push_back(h);
        }
      } else {
        stack.push_back(r.right);
        stack.push_back(i + 1);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  HitSet finish(std::vector<Hit> hits) {
    stats_.points_decompressed = session_.points_materialized();
    return HitSet{std::move(hits), stats_};
  }

  const SearchOptions& options() const noexcept { return options_; }

 private:
  const Space& space_;
  const CompressedIndex<M>& index_;
  Session<M> session_;
  QueryPoint query_;
  SearchOptions options_;
  SearchStats stats_;
  std::unordered_map<std::uint64_t, double> center_d_;
  std::unordered_map<std::uint64_t, std::vector<Hit>> leaf_d_;
};

inline void keep_smallest(std::vector<Hit>& hits, std::size_t k) {
  std::sort(hits.begin(), hits.end());
  if (hits.size() > k) hits.resize(k);
}

}  // namespace detail

/// All points within `rho` of the query.
template <class Space>
HitSet rnn_search(const Space& space, const typename Space::QueryPoint& query, double rho,
                  const SearchOptions& options = {}) {
  if (!(rho >= 0)) throw InvalidInput("search radius must be non-negative");
  detail::Searcher<Space> s(space, query, options);
  return s.finish(s.rnn(rho));
}

/// k-NN by rho-NN passes with a growing radius. The first radius is that of
/// the smallest cluster holding at least k points on the greedy descent toward
/// the query; it grows until k hits are in hand.
template <class Space>
HitSet knn_repeated_rnn(const Space& space, const typename Space::QueryPoint& query, std::size_t k,
                        const SearchOptions& options = {}) {
  if (k == 0) throw InvalidInput("k must be at least 1");
  if constexpr (!Space::supports_radius_growth) {
    throw UnsupportedMetric("repeated rho-NN search cannot grow radii usefully under set distances");
  } else {
    detail::Searcher<Space> s(space, query, options);
    k = std::min(k, s.point_count());
    if (k == 0) return s.finish({});

    const NodeRecord root = s.node(0);
    std::vector<double> path_radii{s.radius(root)};
    std::uint64_t at = 0;
    NodeRecord r = root;
    while (!r.is_leaf()) {
      const std::uint64_t l = at + 1, rt = r.right;
      const NodeRecord lr = s.node(l), rr = s.node(rt);
      const double dl = s.center_distance(l), dr = s.center_distance(rt);
      std::uint64_t next = 0;
      NodeRecord nr;
      if (lr.cardinality >= k && (rr.cardinality < k || dl <= dr)) {
        next = l;
        nr = lr;
      } else if (rr.cardinality >= k) {
        next = rt;
        nr = rr;
      } else {
        break;
      }
      at = next;
      r = nr;
      path_radii.push_back(s.radius(r));
    }
    double rho = 0;
    for (auto it = path_radii.rbegin(); it != path_radii.rend(); ++it) {
      if (*it > 0) {
        rho = *it;
        break;
      }
    }
    const double everything = s.center_distance(0) + s.radius(root);
    const double lfd = std::max(static_cast<double>(root.lfd), 1e-9);
    const double growth = std::min(std::max(2.0, std::exp2(1.0 / lfd)), options.max_growth);

    std::vector<Hit> hits = s.rnn(rho);
    while (hits.size() < k && rho < everything) {
      rho = rho > 0 ? std::min(rho * growth, everything) : everything;
      hits = s.rnn(rho);
    }
    // Final pass at the k-th distance. Every cluster it reaches was already
    // reached at the larger radius, so it costs no new distance computations.
    if (hits.size() > k) hits = s.rnn(hits[k - 1].distance);
    detail::keep_smallest(hits, k);
    return s.finish(std::move(hits));
  }
}

/// k-NN by a level-wise sieve: each round a weighted QuickSelect over the
/// clusters' upper bounds gives a threshold tau that at least k points are
/// known to lie within; clusters whose lower bound exceeds tau are dropped and
/// the rest are replaced by their children (leaves by their points).
template <class Space>
HitSet knn_breadth_first(const Space& space, const typename Space::QueryPoint& query, std::size_t k,
                         const SearchOptions& options = {}) {
  if (k == 0) throw InvalidInput("k must be at least 1");
  detail::Searcher<Space> s(space, query, options);
  k = std::min(k, s.point_count());
  if (k == 0) return s.finish({});

  struct Item {
    bool is_point = false;
    std::uint64_t node = 0;  // cluster index, or id for points
    double lower = 0;
    double upper = 0;
    std::uint64_t weight = 1;
  };
  auto cluster_item = [&](std::uint64_t i) {
    const NodeRecord r = s.node(i);
    const DistanceBounds b = s.bounds(i, r);
    return Item{false, i, b.lower, b.upper, r.cardinality};
  };

  std::vector<Item> items{cluster_item(0)};
  std::vector<std::pair<double, std::uint64_t>> keyed;
  while (std::any_of(items.begin(), items.end(), [](const Item& it) { return !it.is_point; })) {
    keyed.clear();
    for (const Item& it : items) keyed.emplace_back(it.upper, it.weight);
    const double tau = detail::weighted_select(keyed, k);

    std::vector<Item> next;
    for (const Item& it : items) {
      if (detail::exceeds(it.lower, tau)) {
        if (!it.is_point) s.pruned(it.node, it.lower);
        continue;
      }
      if (it.is_point) {
        next.push_back(it);
        continue;
      }
      const NodeRecord r = s.node(it.node);
      if (r.is_leaf()) {
        for (const Hit& h : s.leaf_hits(it.node)) next.push_back(Item{true, h.id, h.distance, h.distance, 1});
      } else {
        next.push_back(cluster_item(it.node + 1));
        next.push_back(cluster_item(r.right));
      }
    }
    items = std::move(next);
  }

  std::vector<Hit> hits;
  hits.reserve(items.size());
  for (const Item& it : items) hits.push_back({it.node, it.lower});
  detail::keep_smallest(hits, k);
  return s.finish(std::move(hits));
}

/// k-NN by best-first descent: candidates in a min-queue on their lower bound,
/// hits in a bounded max-queue. Each popped candidate is followed down to its
/// closer leaf, pushing the siblings passed on the way.
template <class Space>
HitSet knn_depth_first(const Space& space, const typename Space::QueryPoint& query, std::size_t k,
                       const SearchOptions& options = {}) {
  if (k == 0) throw InvalidInput("k must be at least 1");
  detail::Searcher<Space> s(space, query, options);
  k = std::min(k, s.point_count());
  if (k == 0) return s.finish({});

  struct Candidate {
    double lower;
    std::uint64_t node;
    bool operator>(const Candidate& o) const noexcept {
      return lower > o.lower || (lower == o.lower && node > o.node);
    }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> candidates;
  std::priority_queue<Hit> hits;  // max-heap on (distance, id)

  auto full = [&] { return hits.size() == k; };
  auto beyond_kth = [&](double lower) { return full() && detail::exceeds(lower, hits.top().distance); };

  {
    const NodeRecord r = s.node(0);
    candidates.push({s.bounds(0, r).lower, 0});
  }
  while (!candidates.empty()) {
    Candidate c = candidates.top();
    candidates.pop();
    if (beyond_kth(c.lower)) {
      s.pruned(c.node, c.lower);
      while (!candidates.empty()) {
        s.pruned(candidates.top().node, candidates.top().lower);
        candidates.pop();
      }
      break;
    }
    std::uint64_t at = c.node;
    NodeRecord r = s.node(at);
    bool dropped = false;
    while (!r.is_leaf()) {
      const std::uint64_t l = at + 1, rt = r.right;
      const NodeRecord lr = s.node(l), rr = s.node(rt);
      const double ll = s.bounds(l, lr).lower, rl = s.bounds(rt, rr).lower;
      const bool go_left = ll <= rl;
      const Candidate other{go_left ? rl : ll, go_left ? rt : l};
      if (beyond_kth(other.lower)) {
        s.pruned(other.node, other.lower);
      } else {
        candidates.push(other);
      }
      at = go_left ? l : rt;
      r = go_left ? lr : rr;
      if (beyond_kth(go_left ? ll : rl)) {
        s.pruned(at, go_left ? ll : rl);
        dropped = true;
        break;
      }
    }
    if (dropped) continue;
    for (const Hit& h : s.leaf_hits(at)) {
      if (!full()) {
        hits.push(h);
      } else if (h < hits.top()) {
        hits.pop();
        hits.push(h);
      }
    }
  }

  std::vector<Hit> out;
  out.reserve(hits.size());
  while (!hits.empty()) {
    out.push_back(hits.top());
    hits.pop();
  }
  std::reverse(out.begin(), out.end());
  return s.finish(std::move(out));
}

template <class Space>
HitSet knn_search(const Space& space, const typename Space::QueryPoint& query, std::size_t k, KnnAlgorithm algorithm,
                  const SearchOptions& options = {}) {
  switch (algorithm) {
    case KnnAlgorithm::RepeatedRnn:
      return knn_repeated_rnn(space, query, k, options);
    case KnnAlgorithm::BreadthFirst:
      return knn_breadth_first(space, query, k, options);
    case KnnAlgorithm::DepthFirst:
      return knn_depth_first(space, query, k, options);
  }
  throw InvalidInput("unknown k-NN algorithm");
}

template <class Space>
HitSet search(const Space& space, const Query<typename Space::QueryPoint>& query, const SearchOptions& options = {}) {
  if (const auto* r = std::get_if<RnnMode>(&query.mode)) return rnn_search(space, query.payload, r->radius, options);
  const auto& m = std::get<KnnMode>(query.mode);
  return knn_search(space, query.payload, m.k, m.algorithm, options);
}

/// Fraction of the indexed points a search had to materialize.
template <CompressiveMetric M>
double decompressed_fraction(const CompressedIndex<M>& index, const HitSet& result) noexcept {
  return index.size() == 0 ? 0.0
                           : static_cast<double>(result.stats.points_decompressed) / static_cast<double>(index.size());
}

// ---------------------------------------------------------------------------
// Uncompressed linear scans, for raw-data timing and debugging.

template <class P, class Distance>
HitSet linear_scan_rnn(const Dataset<P>& data, Distance&& distance, double rho) {
  HitSet out;
  for (const auto& rec : data) {
    const double d = distance(rec.payload);
    if (d <= rho) out.hits.push_back({rec.id, d});
  }
  out.stats.distance_computations = data.size();
  std::sort(out.hits.begin(), out.hits.end());
  return out;
}

template <class P, class Distance>
HitSet linear_scan_knn(const Dataset<P>& data, Distance&& distance, std::size_t k) {
  HitSet out;
  out.hits.reserve(data.size());
  for (const auto& rec : data) out.hits.push_back({rec.id, distance(rec.payload)});
  out.stats.distance_computations = data.size();
  detail::keep_smallest(out.hits, k);
  return out;
}

}  // namespace deltatree
