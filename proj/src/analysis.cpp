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

#include "deltatree/analysis.hpp"

#include <cmath>

namespace deltatree {

void CostModelParams::validate() const {
  if (!(radius >= 0)) throw InvalidInput("model radius must be non-negative");
  if (!(lfd > 0)) throw InvalidInput("model LFD must be positive");
  if (strides < 1) throw InvalidInput("model needs at least one stride");
  if (!(cardinality >= 1)) throw InvalidInput("model cardinality must be at least 1");
}

int CostModelParams::levels_per_stride() const { return static_cast<int>(std::ceil(lfd)); }

double stride_radius(const CostModelParams& p, unsigned i) {
  p.validate();
  if (i < 1 || i > p.strides) throw InvalidInput("stride index out of range");
  const double L = p.levels_per_stride();
  return p.radius * std::exp2(-0.5 * (i - 1) * L);
}

double recursive_model_cost(const CostModelParams& p) {
  p.validate();
  const double L = p.levels_per_stride();
  const double S = p.strides;
  return 2 * p.radius * (std::exp2(L) - 1) * (std::exp2(S * L / 2) - 1) / (std::exp2(L / 2) - 1);
}

double recursive_model_cost_by_stride(const CostModelParams& p) {
  p.validate();
  const double L = p.levels_per_stride();
  const double edges = 2 * (std::exp2(L) - 1);
  double sum = 0;
  for (unsigned i = 1; i <= p.strides; ++i) {
    const double subtrees = std::exp2((i - 1) * L);
    sum += stride_radius(p, i) * edges * subtrees;
  }
  return sum;
}

double unitary_model_cost(const CostModelParams& p) {
  p.validate();
  const double leaves = std::exp2(p.strides * static_cast<double>(p.levels_per_stride()));
  if (p.cardinality < leaves) throw InvalidInput("model needs at least one point per leaf");
  const double leaf_radius = p.radius / std::sqrt(leaves);
  return leaves * leaf_radius * (p.cardinality / leaves - 1);
}

double total_model_cost(const CostModelParams& p) { return recursive_model_cost(p) + unitary_model_cost(p); }

std::vector<ModelGridRow> model_grid(const std::vector<double>& lfds, const std::vector<unsigned>& strides,
                                     const std::vector<double>& radii, const std::vector<double>& cardinalities) {
  std::vector<ModelGridRow> rows;
  for (double L : lfds) {
    for (unsigned S : strides) {
      for (double r : radii) {
        for (double n : cardinalities) {
          const CostModelParams p{r, L, S, n};
          p.validate();
          if (n < std::exp2(S * static_cast<double>(p.levels_per_stride()))) continue;
          ModelGridRow row{p, recursive_model_cost(p), recursive_model_cost_by_stride(p), unitary_model_cost(p), 0};
          row.total = row.recursive + row.unitary;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

void write_model_csv(std::ostream& out, const std::vector<ModelGridRow>& rows) {
  out << "lfd,strides,radius,cardinality,recursive,recursive_by_stride,unitary,total\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.params.lfd << ',' << r.params.strides << ',' << r.params.radius << ',' << r.params.cardinality << ','
        << r.recursive << ',' << r.recursive_by_stride << ',' << r.unitary << ',' << r.total << '\n';
  }
}

RadiiReport radii_report(const std::vector<Cluster>& nodes, std::size_t window) {
  RadiiReport report;
  report.window = std::max<std::size_t>(window, 1);
  for (const Cluster& c : nodes) {
    if (c.depth >= report.rows.size()) report.rows.resize(c.depth + 1);
    RadiiRow& row = report.rows[c.depth];
    row.depth = c.depth;
    ++row.clusters;
    row.max_radius = std::max(row.max_radius, c.radius);
    for (const std::size_t child : {c.left, c.right}) {
      if (child != kNoChild && nodes.at(child).radius > c.radius) ++report.growing_children;
    }
  }
  const double shrink = std::sqrt(2.0) / 2;
  for (std::size_t d = 0; d + report.window < report.rows.size(); ++d) {
    report.rows[d].not_shrinking = report.rows[d + report.window].max_radius > report.rows[d].max_radius * shrink;
  }
  return report;
}

void write_radii_csv(std::ostream& out, const RadiiReport& report) {
  out << "depth,clusters,max_radius,not_shrinking\n";
  out.precision(17);
  for (const auto& r : report.rows) {
    out << r.depth << ',' << r.clusters << ',' << r.max_radius << ',' << (r.not_shrinking ? 1 : 0) << '\n';
  }
}

std::optional<double> median_lfd(const std::vector<Cluster>& nodes, std::size_t min_cardinality) {
  std::vector<double> v;
  for (const Cluster& c : nodes) {
    if (c.cardinality >= min_cardinality) v.push_back(c.lfd);
  }
  if (v.empty()) return std::nullopt;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return (lower + upper) / 2;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope needs at least two paired samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InvalidInput("log-log slope needs positive samples");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw InvalidInput("log-log slope needs distinct x values");
  return sxy / sxx;
}

}  // namespace deltatree
