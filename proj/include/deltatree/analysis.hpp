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

// Tree diagnostics and the closed-form compression cost model for a balanced
// tree whose radii shrink by sqrt(2)/2 per level.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "deltatree/errors.hpp"
#include "deltatree/tree.hpp"

namespace deltatree {

/// Balanced-tree model parameters. The fractal dimension is rounded up to an
/// integer: a stride spans ceil(L) levels.
struct CostModelParams {
  double radius = 1;       // r, root radius
  double lfd = 1;          // L
  unsigned strides = 1;    // S
  double cardinality = 1;  // n

  /// Throws InvalidInput unless r >= 0, L > 0, S >= 1 and n >= 1.
  void validate() const;
  int levels_per_stride() const;  // ceil(L)
};

/// Radius of the shallowest cluster in stride i (1-based): r / sqrt(2)^((i-1)L).
double stride_radius(const CostModelParams& p, unsigned i);

/// Cost of encoding every center against its parent across S strides,
/// closed form.
double recursive_model_cost(const CostModelParams& p);
/// The same quantity as an explicit sum over strides of radius x edges per
/// subtree x subtrees.
double recursive_model_cost_by_stride(const CostModelParams& p);
/// Cost of encoding every leaf member against its leaf center. Requires
/// n >= 2^(S L) so that leaves are nonempty.
double unitary_model_cost(const CostModelParams& p);
double total_model_cost(const CostModelParams& p);

struct ModelGridRow {
  CostModelParams params;
  double recursive = 0;
  double recursive_by_stride = 0;
  double unitary = 0;
  double total = 0;
};

/// Evaluates the model over a grid; points violating n >= 2^(S L) are skipped.
std::vector<ModelGridRow> model_grid(const std::vector<double>& lfds, const std::vector<unsigned>& strides,
                                     const std::vector<double>& radii, const std::vector<double>& cardinalities);
void write_model_csv(std::ostream& out, const std::vector<ModelGridRow>& rows);

struct RadiiRow {
  std::size_t depth = 0;
  std::size_t clusters = 0;
  double max_radius = 0;
  /// The max radius `window` levels deeper exceeds sqrt(2)/2 of this one.
  bool not_shrinking = false;
};

struct RadiiReport {
  std::size_t window = 1;
  std::vector<RadiiRow> rows;
  /// A child whose radius exceeds its parent's.
  std::size_t growing_children = 0;
};

/// Per-depth maximum radii from (depth, radius, parent radius) triples.
RadiiReport radii_report(const std::vector<Cluster>& nodes, std::size_t window);
void write_radii_csv(std::ostream& out, const RadiiReport& report);

template <Metric M>
RadiiReport radii_scaling_report(const Tree<M>& tree, std::size_t window) {
  return radii_report(std::vector<Cluster>(tree.nodes().begin(), tree.nodes().end()), window);
}

/// Median of the given cluster LFDs over clusters holding at least
/// `min_cardinality` points; empty if there are none.
std::optional<double> median_lfd(const std::vector<Cluster>& nodes, std::size_t min_cardinality = 32);

/// Dataset-level LFD: for clusters holding at least `min_cardinality` points,
/// log2 of the ratio of dataset points within the cluster radius and within
/// half of it, both balls around the cluster center and counted over the
/// whole dataset; the median of these. At most `max_clusters` clusters are
/// used, spread evenly over the tree order. Empty if no cluster qualifies.
template <Metric M>
std::optional<double> dataset_lfd(const Tree<M>& tree, std::size_t min_cardinality = 32,
                                  std::size_t max_clusters = 256) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.node(i).cardinality >= min_cardinality && tree.node(i).radius > 0) eligible.push_back(i);
  }
  if (eligible.empty()) return std::nullopt;
  const std::size_t take = std::min(eligible.size(), std::max<std::size_t>(max_clusters, 1));
  std::vector<Cluster> sampled;
  std::vector<double> d(tree.dataset().size());
  for (std::size_t k = 0; k < take; ++k) {
    Cluster c = tree.node(eligible[k * eligible.size() / take]);
    const auto& center = tree.payload(c.center);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = tree.metric().distance(center, tree.dataset()[j].payload);
    c.lfd = local_fractal_dimension(d, c.radius);
    sampled.push_back(c);
  }
  return median_lfd(sampled, min_cardinality);
}

/// True iff every member of every cluster lies within the cluster's radius of
/// its center.
template <Metric M>
bool radii_contain_members(const Tree<M>& tree) {
  for (const Cluster& c : tree.nodes()) {
    const auto& center = tree.payload(c.center);
    for (const std::size_t idx : tree.members(c)) {
      if (tree.metric().distance(center, tree.payload(idx)) > c.radius) return false;
    }
  }
  return true;
}

/// Least-squares slope of log(y) against log(x). Needs two distinct positive x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace deltatree
