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

// Divisive hierarchical clustering. Each cluster is a metric ball (center,
// radius) over a contiguous range of a permutation of the dataset; a cluster
// is split by two far-apart poles, members going to the nearer pole (ties to
// the left pole).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "deltatree/errors.hpp"
#include "deltatree/metrics.hpp"

namespace deltatree {

inline constexpr std::size_t kNoChild = std::numeric_limits<std::size_t>::max();

struct Cluster {
  std::size_t offset = 0;       // first position in Tree::permutation()
  std::size_t cardinality = 0;  // positions [offset, offset + cardinality)
  std::size_t center = 0;       // dataset index of the center
  double radius = 0;
  double lfd = 0;
  double distance_sum = 0;  // sum of member distances to the center
  std::size_t depth = 0;
  std::size_t left = kNoChild;
  std::size_t right = kNoChild;

  bool is_leaf() const noexcept { return left == kNoChild; }
};

/// Stopping rules for partitioning. A cluster is split only while all hold.
struct PartitionCriteria {
  std::size_t min_cardinality = 1;
  std::optional<std::size_t> max_depth;
  std::optional<double> min_radius;

  bool admits(const Cluster& c) const noexcept {
    if (c.cardinality < 2 || c.radius <= 0) return false;
    if (c.cardinality < min_cardinality) return false;
    if (max_depth && c.depth >= *max_depth) return false;
    if (min_radius && c.radius < *min_radius) return false;
    return true;
  }
};

/// log2(|B(q, r)| / |B(q, r/2)|) given distances from q to every cluster
/// member; 0 for a zero radius.
inline double local_fractal_dimension(std::span<const double> distances, double radius) noexcept {
  if (radius <= 0 || distances.empty()) return 0.0;
  const double half = radius / 2;
  const auto inner = std::count_if(distances.begin(), distances.end(), [&](double d) { return d <= half; });
  const auto outer = std::count_if(distances.begin(), distances.end(), [&](double d) { return d <= radius; });
  if (inner == 0) return 0.0;
  return std::log2(static_cast<double>(outer) / static_cast<double>(inner));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t cluster_seed(std::uint64_t seed, std::size_t offset, std::size_t cardinality) noexcept {
  return splitmix64(seed ^ splitmix64(offset * 0x100000001b3ULL + cardinality));
}

// Index of the maximum, ties to the smallest id.
template <class P>
std::size_t argmax_by_id(std::span<const std::size_t> members, std::span<const double> dist, const Dataset<P>& data) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < members.size(); ++k) {
    if (dist[k] > dist[best] || (dist[k] == dist[best] && data[members[k]].id < data[members[best]].id)) {
      best = k;
    }
  }
  return best;
}

}  // namespace detail

/// Dataset index in `indices` minimizing the sum of distances to the others,
/// ties to the smallest id.
template <Metric M>
std::size_t geometric_median(std::span<const std::size_t> indices, const Dataset<typename M::Point>& data,
                             const M& metric, std::size_t* distance_count = nullptr) {
  if (indices.empty()) throw InvalidInput("geometric median of an empty set");
  const std::size_t s = indices.size();
  std::vector<double> sums(s, 0.0);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a + 1; b < s; ++b) {
      const double d = metric.distance(data[indices[a]].payload, data[indices[b]].payload);
      sums[a] += d;
      sums[b] += d;
    }
  }
  if (distance_count) *distance_count += s * (s - 1) / 2;
  std::size_t best = 0;
  for (std::size_t k = 1; k < s; ++k) {
    if (sums[k] < sums[best] || (sums[k] == sums[best] && data[indices[k]].id < data[indices[best]].id)) best = k;
  }
  return indices[best];
}

struct Poles {
  std::size_t center = 0;
  std::size_t left = 0;
  std::size_t right = 0;
};

/// Center from a seeded sample of ceil(sqrt(|C|)) members, left pole farthest
/// from the center, right pole farthest from the left pole.
template <Metric M>
Poles select_poles(std::span<const std::size_t> members, const Dataset<typename M::Point>& data, const M& metric,
                   std::uint64_t seed) {
  if (members.size() < 2) throw InvalidInput("pole selection needs at least two points");
  std::mt19937_64 rng(seed);
  const auto sample_size = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(members.size()))));
  std::vector<std::size_t> sample;
  sample.reserve(sample_size);
  std::sample(members.begin(), members.end(), std::back_inserter(sample), sample_size, rng);

  Poles p;
  p.center = geometric_median<M>(sample, data, metric);
  std::vector<double> dist(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) dist[k] = metric.distance(data[p.center].payload, data[members[k]].payload);
  p.left = members[detail::argmax_by_id(members, std::span<const double>(dist), data)];
  for (std::size_t k = 0; k < members.size(); ++k) dist[k] = metric.distance(data[p.left].payload, data[members[k]].payload);
  p.right = members[detail::argmax_by_id(members, std::span<const double>(dist), data)];
  return p;
}

template <Metric M>
class Tree {
 public:
  using Point = typename M::Point;

  /// Builds the hierarchy over `data`, which must outlive the tree.
  static Tree build(const Dataset<Point>& data, const M& metric, const PartitionCriteria& criteria,
                    std::uint64_t seed);

  bool empty() const noexcept { return nodes_.empty(); }
  const Cluster& root() const { return nodes_.at(0); }
  const Cluster& node(std::size_t i) const { return nodes_.at(i); }
  std::span<const Cluster> nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Tree position -> dataset index.
  std::span<const std::size_t> permutation() const noexcept { return order_; }
  std::span<const std::size_t> members(const Cluster& c) const {
    return std::span<const std::size_t>(order_).subspan(c.offset, c.cardinality);
  }

  const Dataset<Point>& dataset() const noexcept { return *data_; }
  const Point& payload(std::size_t dataset_index) const { return (*data_)[dataset_index].payload; }
  const M& metric() const noexcept { return metric_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const PartitionCriteria& criteria() const noexcept { return criteria_; }
  std::size_t build_distance_count() const noexcept { return distance_count_; }

  /// Index one past the last node of the subtree rooted at `i` (pre-order).
  std::size_t subtree_end(std::size_t i) const {
    while (!nodes_[i].is_leaf()) i = nodes_[i].right;
    return i + 1;
  }

  /// Copy in which every node flagged in `collapse` becomes a leaf and loses
  /// its descendants. Node indices are renumbered; `old_index[k]` maps the new
  /// node k back to its index in this tree.
  Tree collapsed(std::span<const std::uint8_t> collapse, std::vector<std::size_t>* old_index = nullptr) const;

 private:
  Tree(const Dataset<Point>& data, const M& metric) : data_(&data), metric_(metric) {}
  void renumber_preorder();

  const Dataset<Point>* data_;
  M metric_;
  PartitionCriteria criteria_;
  std::uint64_t seed_ = 0;
  std::vector<Cluster> nodes_;
  std::vector<std::size_t> order_;
  std::size_t distance_count_ = 0;
};

template <Metric M>
Tree<M> Tree<M>::build(const Dataset<Point>& data, const M& metric, const PartitionCriteria& criteria,
                       std::uint64_t seed) {
  Tree t(data, metric);
  t.criteria_ = criteria;
  t.seed_ = seed;
  t.order_.resize(data.size());
  std::iota(t.order_.begin(), t.order_.end(), std::size_t{0});
  if (data.empty()) return t;

  t.nodes_.push_back(Cluster{0, data.size()});
  std::vector<std::size_t> work{0};
  std::vector<double> from_center, from_left, from_right;
  std::vector<std::size_t> sample, left_part, right_part;

  while (!work.empty()) {
    const std::size_t ci = work.back();
    work.pop_back();
    Cluster c = t.nodes_[ci];
    std::span<std::size_t> members(t.order_.data() + c.offset, c.cardinality);

    if (c.cardinality == 1) {
      c.center = members[0];
      t.nodes_[ci] = c;
      continue;
    }

    std::mt19937_64 rng(detail::cluster_seed(seed, c.offset, c.cardinality));
    const auto sample_size = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(c.cardinality))));
    sample.clear();
    std::sample(members.begin(), members.end(), std::back_inserter(sample), sample_size, rng);
    c.center = geometric_median<M>(sample, data, metric, &t.distance_count_);

    from_center.resize(c.cardinality);
    for (std::size_t k = 0; k < c.cardinality; ++k) {
      from_center[k] = metric.distance(data[c.center].payload, data[members[k]].payload);
    }
    t.distance_count_ += c.cardinality;
    const std::size_t far = detail::argmax_by_id<Point>(members, from_center, data);
    c.radius = from_center[far];
    c.lfd = local_fractal_dimension(from_center, c.radius);
    c.distance_sum = std::accumulate(from_center.begin(), from_center.end(), 0.0);

    if (!criteria.admits(c)) {
      t.nodes_[ci] = c;
      continue;
    }

    const std::size_t left_pole = members[far];
    from_left.resize(c.cardinality);
    for (std::size_t k = 0; k < c.cardinality; ++k) {
      from_left[k] = metric.distance(data[left_pole].payload, data[members[k]].payload);
    }
    const std::size_t right_pole = members[detail::argmax_by_id<Point>(members, from_left, data)];
    from_right.resize(c.cardinality);
    for (std::size_t k = 0; k < c.cardinality; ++k) {
      from_right[k] = metric.distance(data[right_pole].payload, data[members[k]].payload);
    }
    t.distance_count_ += 2 * c.cardinality;

    left_part.clear();
    right_part.clear();
    for (std::size_t k = 0; k < c.cardinality; ++k) {
      (from_left[k] <= from_right[k] ? left_part : right_part).push_back(members[k]);
    }
    // radius > 0 puts the poles at distinct points, so both sides are nonempty.
    std::copy(left_part.begin(), left_part.end(), members.begin());
    std::copy(right_part.begin(), right_part.end(), members.begin() + static_cast<std::ptrdiff_t>(left_part.size()));

    c.left = t.nodes_.size();
    c.right = c.left + 1;
    t.nodes_[ci] = c;
    Cluster child;
    child.depth = c.depth + 1;
    child.offset = c.offset;
    child.cardinality = left_part.size();
    t.nodes_.push_back(child);
    child.offset = c.offset + left_part.size();
    child.cardinality = right_part.size();
    t.nodes_.push_back(child);
    work.push_back(c.right);
    work.push_back(c.left);
  }

  t.renumber_preorder();
  return t;
}

template <Metric M>
void Tree<M>::renumber_preorder() {
  std::vector<Cluster> out;
  out.reserve(nodes_.size());
  // (old index, new index of parent, is-right-child)
  struct Item {
    std::size_t old;
    std::size_t parent;
    bool right;
  };
  std::vector<Item> stack{{0, kNoChild, false}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const std::size_t now = out.size();
    Cluster c = nodes_[it.old];
    if (it.parent != kNoChild) {
      if (it.right) {
        out[it.parent].right = now;
      } else {
        out[it.parent].left = now;
      }
    }
    const std::size_t l = c.left, r = c.right;
    c.left = c.right = kNoChild;
    out.push_back(c);
    if (l != kNoChild) {
      stack.push_back({r, now, true});
      stack.push_back({l, now, false});
    }
  }
  nodes_ = std::move(out);
}

template <Metric M>
Tree<M> Tree<M>::collapsed(std::span<const std::uint8_t> collapse, std::vector<std::size_t>* old_index) const {
  if (collapse.size() != nodes_.size()) throw InvalidInput("collapse mask size differs from node count");
  Tree t(*data_, metric_);
  t.criteria_ = criteria_;
  t.seed_ = seed_;
  t.order_ = order_;
  t.distance_count_ = distance_count_;
  if (old_index) old_index->clear();
  if (nodes_.empty()) return t;

  std::vector<std::size_t> new_of(nodes_.size(), kNoChild);
  for (std::size_t i = 0; i < nodes_.size();) {
    Cluster c = nodes_[i];
    new_of[i] = t.nodes_.size();
    if (old_index) old_index->push_back(i);
    if (collapse[i] && !c.is_leaf()) {
      c.left = c.right = kNoChild;
      t.nodes_.push_back(c);
      i = subtree_end(i);
    } else {
      t.nodes_.push_back(c);
      ++i;
    }
  }
  for (auto& c : t.nodes_) {
    if (!c.is_leaf()) {
      c.left = new_of[c.left];
      c.right = new_of[c.right];
    }
  }
  return t;
}

}  // namespace deltatree
