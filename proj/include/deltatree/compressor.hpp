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

// Bottom-up choice between unitary compression (every member encoded against
// the cluster center) and recursive compression (child centers encoded against
// this center, children compressed independently). Where recursion costs
// strictly more, the subtree is collapsed into a unitary leaf.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "deltatree/metrics.hpp"
#include "deltatree/tree.hpp"

namespace deltatree {

/// Bytes: actual encoded sizes. Distance: raw metric values, the abstract
/// cost of the textbook formulation; the only option for metrics without a codec.
enum class CostUnit : std::uint8_t { Bytes, Distance };

enum class CompressionMode : std::uint8_t { UnitaryLeaf = 0, RecursiveInternal = 1 };

struct ClusterCost {
  /// Exact unless `unitary_exact` is false, in which case it is a lower bound
  /// that the recursive cost already met, so the exact value was not needed.
  double unitary_cost = 0;
  bool unitary_exact = true;
  std::optional<double> recursive_cost;  // set for every node that had children before trimming
  double min_cost = 0;
  double unitary_distance = 0;  // sum of member-to-center distances, whatever the unit
  CompressionMode mode = CompressionMode::UnitaryLeaf;

  /// A unitary leaf that had children which were trimmed away.
  bool trimmed() const noexcept { return mode == CompressionMode::UnitaryLeaf && recursive_cost.has_value(); }
};

/// One record per node of the trimmed tree, in the same order.
struct CompressionPlan {
  CostUnit unit = CostUnit::Bytes;
  std::vector<ClusterCost> clusters;

  double total_cost() const noexcept { return clusters.empty() ? 0.0 : clusters.front().min_cost; }
};

template <Metric M>
struct Compressed {
  Tree<M> tree;
  CompressionPlan plan;
};

namespace detail {

template <Metric M>
double pair_cost(const M& metric, const typename M::Point& target, const typename M::Point& reference, CostUnit unit) {
  if (unit == CostUnit::Bytes) {
    if constexpr (CompressiveMetric<M>) {
      return static_cast<double>(encoded_size(metric, target, reference));
    } else {
      throw UnsupportedMetric("byte costs need a metric with an encoding");
    }
  }
  return metric.distance(target, reference);
}

}  // namespace detail

/// Cost of encoding every non-center member against the center.
template <Metric M>
double unitary_cost(const Tree<M>& tree, const Cluster& c, CostUnit unit = CostUnit::Bytes) {
  double cost = 0;
  const auto& center = tree.payload(c.center);
  for (const std::size_t m : tree.members(c)) {
    if (m != c.center) cost += detail::pair_cost(tree.metric(), tree.payload(m), center, unit);
  }
  return cost;
}

template <Metric M>
Compressed<M> compress(const Tree<M>& tree, CostUnit unit = CostUnit::Bytes) {
  const auto nodes = tree.nodes();
  std::vector<ClusterCost> costs(nodes.size());
  std::vector<std::uint8_t> collapse(nodes.size(), 0);
  const M& metric = tree.metric();

  // Children follow their parent in pre-order, so reverse index order is post-order.
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const Cluster& c = nodes[i];
    ClusterCost& cc = costs[i];
    cc.unitary_distance = c.distance_sum;
    cc.mode = CompressionMode::UnitaryLeaf;
    if (c.is_leaf()) {
      cc.unitary_cost = unitary_cost(tree, c, unit);
      cc.min_cost = cc.unitary_cost;
      continue;
    }

    const auto& center = tree.payload(c.center);
    const Cluster& l = nodes[c.left];
    const Cluster& r = nodes[c.right];
    const double recursive = detail::pair_cost(metric, tree.payload(l.center), center, unit) + costs[c.left].min_cost +
                             detail::pair_cost(metric, tree.payload(r.center), center, unit) + costs[c.right].min_cost;
    cc.recursive_cost = recursive;

    // Skip the exact unitary cost when a cheap floor already loses.
    double floor = 0;
    if (unit == CostUnit::Distance) {
      floor = c.distance_sum;
    } else if constexpr (requires { metric.size_floor(); }) {
      const SizeBound f = metric.size_floor();
      floor = f.per_unit * c.distance_sum + f.overhead * static_cast<double>(c.cardinality - 1);
    }
    if (recursive <= floor * (1 - 1e-12)) {
      cc.unitary_cost = floor;
      cc.unitary_exact = false;
    } else {
      cc.unitary_cost = unitary_cost(tree, c, unit);
    }

    if (recursive > cc.unitary_cost) {
      collapse[i] = 1;
      cc.min_cost = cc.unitary_cost;
    } else {
      cc.min_cost = recursive;
      cc.mode = CompressionMode::RecursiveInternal;
    }
  }

  std::vector<std::size_t> old_index;
  Compressed<M> out{tree.collapsed(collapse, &old_index), CompressionPlan{unit, {}}};
  out.plan.clusters.reserve(old_index.size());
  for (const std::size_t o : old_index) out.plan.clusters.push_back(costs[o]);
  return out;
}

}  // namespace deltatree
