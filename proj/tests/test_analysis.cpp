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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "deltatree/analysis.hpp"
#include "deltatree/compressor.hpp"
#include "deltatree/synthetic.hpp"

using namespace deltatree;

TEST(CostModel, StrideRadius) {
  EXPECT_EQ(stride_radius({4, 2, 3, 1000}, 1), 4.0);
  EXPECT_DOUBLE_EQ(stride_radius({4, 2, 3, 1000}, 2), 2.0);
  for (unsigned i = 1; i < 6; ++i) EXPECT_GT(stride_radius({10, 1.3, 6, 1e6}, i), stride_radius({10, 1.3, 6, 1e6}, i + 1));
  EXPECT_THROW(stride_radius({4, 2, 3, 1000}, 0), InvalidInput);
  EXPECT_THROW(stride_radius({4, 2, 3, 1000}, 4), InvalidInput);
}

TEST(CostModel, HandEvaluatedPoints) {
  EXPECT_DOUBLE_EQ(recursive_model_cost({1, 1, 1, 8}), 2.0);
  EXPECT_NEAR(unitary_model_cost({1, 1, 1, 8}), 3 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(unitary_model_cost({5, 2, 2, 16}), 0.0);  // one point per leaf
  EXPECT_THROW(unitary_model_cost({5, 2, 2, 15}), InvalidInput);
  EXPECT_THROW(recursive_model_cost({1, 0, 1, 8}), InvalidInput);
}

TEST(CostModel, LfdIsRoundedUp) {
  EXPECT_EQ(recursive_model_cost({3, 1.2, 3, 1e6}), recursive_model_cost({3, 2, 3, 1e6}));
}

TEST(CostModel, ClosedFormEqualsStrideSum) {
  for (double L = 1; L <= 4; ++L) {
    for (unsigned S = 1; S <= 6; ++S) {
      for (double r : {1.0, 10.0}) {
        const CostModelParams p{r, L, S, 1e9};
        const double a = recursive_model_cost(p), b = recursive_model_cost_by_stride(p);
        EXPECT_LE(std::abs(a - b) / b, 1e-9) << L << ' ' << S << ' ' << r;
      }
    }
  }
}

TEST(CostModel, TradeoffShape) {
  double last_r = 0, last_u = 1e300;
  for (unsigned S = 1; S <= 6; ++S) {
    const CostModelParams p{10, 2, S, 1 << 20};
    EXPECT_GT(recursive_model_cost(p), last_r);
    EXPECT_LT(unitary_model_cost(p), last_u);
    EXPECT_EQ(total_model_cost(p), recursive_model_cost(p) + unitary_model_cost(p));
    last_r = recursive_model_cost(p);
    last_u = unitary_model_cost(p);
  }
  // Interior optimum over S for a large n.
  std::vector<double> t;
  for (unsigned S = 1; S <= 6; ++S) t.push_back(total_model_cost({10, 2, S, 4096}));
  const auto best = std::min_element(t.begin(), t.end()) - t.begin();
  EXPECT_GT(best, 0);
  EXPECT_LT(best, static_cast<long>(t.size()) - 1);
}

TEST(CostModel, GridCsv) {
  const auto rows = model_grid({1, 2}, {1, 2, 3}, {1}, {16, 1000});
  EXPECT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_EQ(r.total, r.recursive + r.unitary);
  std::ostringstream os;
  write_model_csv(os, rows);
  EXPECT_EQ(os.str().rfind("lfd,strides,", 0), 0u);
}

TEST(CostModel, BoundsBalancedUniformData) {
  // A 2-D grid: balanced enough that the distance-unit cost of the real tree
  // stays under the model's bound for the same depth.
  Dataset<std::array<double, 2>> data;
  for (int x = 0; x < 64; ++x) {
    for (int y = 0; y < 64; ++y) data.push_back({data.size(), {double(x), double(y)}});
  }
  const auto t = Tree<EuclideanMetric<2>>::build(data, {}, {}, 1);
  const auto packed = compress(t, CostUnit::Distance);
  const double measured = packed.plan.total_cost();
  double model = 1e300;
  for (unsigned S = 1; S <= 5; ++S) model = std::min(model, total_model_cost({t.root().radius, 2, S, double(data.size())}));
  EXPECT_LE(measured, model);
}

TEST(Radii, ReportAndLfd) {
  const auto data = synthetic::uniform_disk(3000, 1.0, 2);
  const auto t = Tree<EuclideanMetric<2>>::build(data, {}, {}, 2);
  EXPECT_TRUE(radii_contain_members(t));
  const auto report = radii_scaling_report(t, 2);
  ASSERT_GT(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].clusters, 1u);
  EXPECT_EQ(report.rows[0].max_radius, t.root().radius);
  const auto lfd = dataset_lfd(t);
  ASSERT_TRUE(lfd);
  EXPECT_NEAR(*lfd, 2.0, 0.5);
  std::ostringstream os;
  write_radii_csv(os, report);
  EXPECT_NE(os.str().find("depth,clusters,max_radius"), std::string::npos);
}

TEST(Radii, SinglePoint) {
  const Dataset<std::array<double, 2>> one{{0, {1.0, 2.0}}};
  const auto t = Tree<EuclideanMetric<2>>::build(one, {}, {}, 1);
  const auto report = radii_scaling_report(t, 1);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].max_radius, 0.0);
  EXPECT_FALSE(dataset_lfd(t));
}

TEST(Slope, RecoversPowerLaw) {
  std::vector<double> x{1e3, 4e3, 1.6e4, 6.4e4}, y;
  for (double v : x) y.push_back(3 * std::pow(v, 0.4));
  EXPECT_NEAR(loglog_slope(x, y), 0.4, 1e-12);
  EXPECT_THROW(loglog_slope({1}, {1}), InvalidInput);
}
