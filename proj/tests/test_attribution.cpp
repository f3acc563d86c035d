/*
 * Copyright 2026 The DAC Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dac/dac.hpp"
#include "fixtures.hpp"
#include "properties.hpp"

namespace {

using dac::FeatureSet;
using dac::Grid;

Grid tenths() {
  Grid g;
  for (int i = 0; i <= 10; ++i) g.axes.resize(1), g.axes[0].push_back(i / 10.0);
  return g;
}

TEST(FeatureSetTest, Validation) {
  EXPECT_NO_THROW(FeatureSet({0, 2}, 3));
  EXPECT_THROW(FeatureSet({}, 3), dac::InvalidArgument);
  EXPECT_THROW(FeatureSet({2, 0}, 3), dac::InvalidArgument);
  EXPECT_THROW(FeatureSet({1, 1}, 3), dac::InvalidArgument);
  EXPECT_THROW(FeatureSet({3}, 3), dac::InvalidArgument);
  const FeatureSet s({1, 4}, 5);
  EXPECT_EQ(s.position(4), 1u);
  EXPECT_FALSE(s.position(2));
}

TEST(DacParamsTest, Validation) {
  dac::DacParams p;
  EXPECT_EQ(p.k, 1.0);
  EXPECT_EQ(p.grid_points_per_dim, 100u);
  p.k = -1;
  EXPECT_THROW(p.validate(), dac::InvalidArgument);
  p.k = 1;
  p.grid_points_per_dim = 1;
  EXPECT_THROW(p.validate(), dac::InvalidArgument);
}

TEST(DefaultGrid, Linspace) {
  dac::Dataset d(3, 1, {0.0, 1.0, 0.4}, {0, 0, 0});
  dac::DacParams p;
  p.grid_points_per_dim = 5;
  const auto g = dac::default_grid(d, FeatureSet({0}, 1), p);
  EXPECT_EQ(g.axes[0], (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
}

TEST(DefaultGrid, ConstantFeatureWarns) {
  dac::Dataset d(2, 1, {3.0, 3.0}, {0, 1});
  std::vector<std::string> warned;
  auto saved = dac::warning_sink();
  dac::warning_sink() = [&](std::string_view m) { warned.emplace_back(m); };
  const auto g = dac::default_grid(d, FeatureSet({0}, 1), dac::DacParams{});
  dac::warning_sink() = saved;
  EXPECT_EQ(g.axes[0], std::vector<double>{3.0});
  EXPECT_EQ(warned.size(), 1u);
}

TEST(DefaultGrid, TwoFeaturesMakeAProduct) {
  dac::Dataset d(2, 2, {0, 0, 1, 2}, {0, 1});
  dac::DacParams p;
  p.grid_points_per_dim = 3;
  const auto g = dac::default_grid(d, FeatureSet({0, 1}, 2), p);
  EXPECT_EQ(g.cell_count(), 9u);
  EXPECT_EQ(g.coordinates(5), (std::vector<double>{0.5, 2.0}));
  const std::size_t idx[] = {1, 2};
  EXPECT_EQ(g.flatten(idx), 5u);
  EXPECT_EQ(g.unflatten(5), (std::vector<std::size_t>{1, 2}));
}

TEST(GridTest, RejectsUnsortedAxes) {
  Grid g;
  g.axes = {{0.0, 0.0}};
  EXPECT_THROW(g.validate(), dac::InvalidArgument);
  g.axes = {{0.0, NAN}};
  EXPECT_THROW(g.validate(), dac::InvalidArgument);
}

TEST(LeafSummaryTest, FourPointLeaves) {
  const auto data = fixtures::four_points();
  const auto tree = fixtures::stump(data, 0, 0.45);
  const FeatureSet s({0}, 1);
  const auto b = dac::leaf_summary(tree, tree.nodes[0].right, data, s, 1.0);
  EXPECT_NEAR(b.mu[0], 0.8, 1e-15);
  EXPECT_NEAR(b.sigma[0], 0.1, 1e-15);
  EXPECT_EQ(b.count, 2u);
  EXPECT_EQ(b.mean_y, 1.0);
  EXPECT_NEAR(b.interval[0].first, 0.7, 1e-15);
  EXPECT_NEAR(b.interval[0].second, 0.9, 1e-15);

  const auto a = dac::leaf_summary(tree, tree.nodes[0].left, data, s, 1.0);
  EXPECT_EQ(a.mean_y, 0.0);
  EXPECT_EQ(a.count, 2u);
  EXPECT_NEAR(a.interval[0].first, 0.1, 1e-15);
  EXPECT_NEAR(a.interval[0].second, 0.2, 1e-15);

  EXPECT_THROW(dac::leaf_summary(tree, 0, data, s, 1.0), dac::InvalidArgument);
}

TEST(LeafSummaryTest, NoRulesOnSUsesEveryRow) {
  // The split is on column 1, which is outside S.
  dac::Dataset data(4, 2, {0, 0, 1, 0, 2, 1, 3, 1}, {1, 2, 3, 4});
  const auto tree = fixtures::stump(data, 1, 0.5);
  const auto leaf = dac::leaf_summary(tree, tree.nodes[0].left, data, FeatureSet({0}, 2), 10.0);
  EXPECT_EQ(leaf.count, 4u);
  EXPECT_EQ(leaf.mean_y, 2.5);
}

TEST(LeafSummaryTest, TrimmingUsesPreTrimStatistics) {
  // Values 0,0,0,0,10: mu=2, sigma=4, so 10 is dropped (|10-2| > 4) and the
  // zeros stay. The remaining set has sigma 0.
  dac::Dataset data(5, 1, {0, 0, 0, 0, 10}, {1, 1, 1, 1, 9});
  dac::DecisionTree t;
  t.nodes.resize(1);
  dac::route_dataset(t, data, true);
  const auto leaf = dac::leaf_summary(t, 0, data, FeatureSet({0}, 1), 1.0);
  EXPECT_EQ(leaf.count, 4u);
  EXPECT_EQ(leaf.mean_y, 1.0);
  EXPECT_EQ(leaf.sigma[0], 0.0);
  EXPECT_EQ(leaf.mu[0], 0.0);
}

TEST(LeafSummaryTest, InvariantsOnRandomTrees) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = properties::random_instance(seed);
    for (const auto& tree : inst.model.trees)
      for (const auto& leaf : dac::leaf_summaries(tree, inst.data, inst.s, 1.0)) {
        for (std::size_t j = 0; j < inst.s.size(); ++j) {
          if (leaf.count <= 1) {
            EXPECT_EQ(leaf.sigma[j], 0.0);
          }
          if (leaf.count == 0) continue;
          EXPECT_LE(leaf.interval[j].first, leaf.mu[j]);
          EXPECT_GE(leaf.interval[j].second, leaf.mu[j]);
        }
      }
  }
}

TEST(LeafSummaryTest, EmptySubsetGivesZeroCount) {
  // No row satisfies x >= 5.
  dac::Dataset data(2, 1, {0, 1}, {0, 1});
  dac::DecisionTree t;
  t.nodes.resize(3);
  t.nodes[0] = fixtures::split_node(0, 5.0, 1, 2);
  dac::route_dataset(t, data, true);
  const auto leaf = dac::leaf_summary(t, 2, data, FeatureSet({0}, 1), 1.0);
  EXPECT_EQ(leaf.count, 0u);
}

TEST(TreeDacCurve, FourPointTrace) {
  const auto data = fixtures::four_points();
  const auto tree = fixtures::stump(data, 0, 0.45);
  const auto c = dac::tree_dac_curve(tree, data, FeatureSet({0}, 1), tenths(), 1.0);
  for (int i : {1, 2}) {
    ASSERT_TRUE(c.defined(i)) << i;
    EXPECT_EQ(c.values[i], 0.0);
  }
  for (int i : {7, 8, 9}) {
    ASSERT_TRUE(c.defined(i)) << i;
    EXPECT_EQ(c.values[i], 1.0);
  }
  for (int i : {0, 3, 4, 5, 6, 10}) EXPECT_FALSE(c.defined(i)) << i;
  EXPECT_TRUE(std::isnan(c.values[5]));
}

TEST(TreeDacCurve, UnsplitFeatureGivesConstantCurve) {
  dac::Dataset data(6, 2, {0, 0, 1, 1, 2, 0, 3, 1, 4, 0, 5, 1}, {1, 2, 3, 4, 5, 6});
  const auto tree = fixtures::stump(data, 1, 0.5);
  Grid g;
  g.axes = {{0, 1, 2, 3, 4, 5}};
  const auto c = dac::tree_dac_curve(tree, data, FeatureSet({0}, 2), g, 1.0);
  std::optional<double> value, count;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c.defined(i)) continue;
    if (!value) value = c.values[i], count = c.counts[i];
    EXPECT_EQ(c.values[i], *value);
    EXPECT_EQ(c.counts[i], *count);
  }
  ASSERT_TRUE(value);
  EXPECT_EQ(*value, 3.5);
}

TEST(TreeDacCurve, OverlappingLeavesAverageByCount) {
  // Left leaf {0, 1} with Y=0, right leaf {1.5, 2.5} with Y=1; with k=3 the
  // intervals [-1, 2] and [0.5, 3.5] overlap on [0.5, 2].
  dac::Dataset data(4, 1, {0, 1, 1.5, 2.5}, {0, 0, 1, 1});
  const auto tree = fixtures::stump(data, 0, 1.25);
  Grid g;
  g.axes = {{-1, 0, 1, 2, 3}};
  const auto c = dac::tree_dac_curve(tree, data, FeatureSet({0}, 1), g, 3.0);
  EXPECT_EQ(c.values[1], 0.0);
  EXPECT_EQ(c.values[2], 0.5);
  EXPECT_EQ(c.counts[2], 4.0);
  EXPECT_EQ(c.values[3], 0.5);
  EXPECT_EQ(c.values[4], 1.0);
}

TEST(TreeDacCurve, ZeroWidthIntervalCoversOnlyExactPoint) {
  dac::Dataset data(2, 1, {0.5, 0.5}, {2, 4});
  dac::DecisionTree t;
  t.nodes.resize(1);
  dac::route_dataset(t, data, true);
  Grid g;
  g.axes = {{0.0, 0.5, 0.75}};
  const auto c = dac::tree_dac_curve(t, data, FeatureSet({0}, 1), g, 1.0);
  EXPECT_FALSE(c.defined(0));
  EXPECT_EQ(c.values[1], 3.0);
  EXPECT_FALSE(c.defined(2));
}

TEST(TreeDacCurve, InputValidation) {
  const auto data = fixtures::four_points();
  const auto tree = fixtures::stump(data, 0, 0.45);
  Grid two;
  two.axes = {{0, 1}, {0, 1}};
  EXPECT_THROW(dac::tree_dac_curve(tree, data, FeatureSet({0}, 1), two, 1.0),
               dac::InvalidArgument);
  EXPECT_THROW(dac::tree_dac_curve(tree, data, FeatureSet({0}, 1), tenths(), -1.0),
               dac::InvalidArgument);
}

TEST(TreeDacCurve, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> n_dist(1, 20), d_dist(1, 3);
  const double ks[] = {0.0, 0.5, 1.0, 2.0};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = d_dist(rng);
    const auto data = fixtures::lattice_data(rng, n_dist(rng), d);
    const auto tree = fixtures::random_tree(rng, data, 5);
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < d; ++j)
      if (rng() % 2 == 0) s.push_back(j);
    if (s.empty()) s.push_back(rng() % d);
    Grid g;
    for (std::size_t j = 0; j < s.size(); ++j) g.axes.push_back(fixtures::lattice_axis());
    const double k = ks[trial % 4];
    EXPECT_LE(properties::oracle_gap(tree, data, FeatureSet(s, d), g, k), 1e-12)
        << "trial " << trial;
  }
}

TEST(EnsembleDacCurve, SingleTreeMatchesTreeCurve) {
  const auto data = fixtures::four_points();
  const auto tree = fixtures::stump(data, 0, 0.45);
  const auto m = fixtures::single_tree_model(tree, data);
  const auto a = dac::tree_dac_curve(tree, data, FeatureSet({0}, 1), tenths(), 1.0);
  const auto b = dac::ensemble_dac_curve(m, data, FeatureSet({0}, 1), tenths(), {});
  properties::Check c;
  properties::expect_identical(a, b, c, "single tree");
  EXPECT_TRUE(c.ok) << c.detail;
}

TEST(EnsembleDacCurve, RenormalizesOverCoveringTrees) {
  // Tree A splits at 0.45 (covers 0.1-0.2 and 0.7-0.9); tree B never splits
  // (covers 0.2-0.8 with the trimmed global mean).
  const auto data = fixtures::four_points();
  dac::Ensemble m = fixtures::single_tree_model(fixtures::stump(data, 0, 0.45), data);
  dac::DecisionTree flat;
  flat.nodes.resize(1);
  dac::route_dataset(flat, data, true);
  m.trees.push_back(flat);
  m.weights = {0.25, 0.75};
  const auto c = dac::ensemble_dac_curve(m, data, FeatureSet({0}, 1), tenths(), {});
  const auto b = dac::tree_dac_curve(flat, data, FeatureSet({0}, 1), tenths(), 1.0);
  // At 0.1 only tree A is defined.
  EXPECT_EQ(c.values[1], 0.0);
  // At 0.5 only tree B is defined.
  ASSERT_TRUE(b.defined(5));
  EXPECT_EQ(c.values[5], b.values[5]);
  // At 0.2 both are.
  ASSERT_TRUE(b.defined(2));
  EXPECT_DOUBLE_EQ(c.values[2], (0.25 * 0.0 + 0.75 * b.values[2]) / 1.0);
}

TEST(EnsembleDacCurve, XorCurves) {
  const auto data = fixtures::xor_data(100);
  dac::TrainParams p;
  p.max_depth = 2;
  const auto m = dac::fit_random_forest(data, p, dac::Task::BinaryClassification);
  for (std::size_t f = 0; f < 2; ++f) {
    const FeatureSet s({f}, 2);
    const auto c = dac::ensemble_dac_curve(m, data, s, dac::default_grid(data, s, {}), {});
    ASSERT_GT(c.defined_count(), 0u);
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c.defined(i)) {
        EXPECT_NEAR(c.values[i], 0.5, 1e-9);
      }
  }
  const FeatureSet both({0, 1}, 2);
  const auto c = dac::ensemble_dac_curve(m, data, both, dac::default_grid(data, both, {}), {});
  for (double a : {0.0, 1.0})
    for (double b : {0.0, 1.0}) {
      const double x[] = {a, b};
      EXPECT_NEAR(dac::evaluate_curve(c, x), a != b ? 1.0 : 0.0, 0.05);
    }
}

TEST(EnsembleDacCurve, MissingFeatureGivesConstantCurve) {
  std::mt19937_64 gen(31);
  const auto data = fixtures::lattice_data(gen, 200, 3);
  dac::TrainParams p;
  p.n_trees = 10;
  p.excluded_features = {1};
  const auto m = dac::fit_random_forest(data, p, dac::Task::Regression);
  const FeatureSet s({1}, 3);
  const auto c = dac::ensemble_dac_curve(m, data, s, dac::default_grid(data, s, {}), {});
  std::optional<double> v;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.defined(i)) {
      if (!v) v = c.values[i];
      EXPECT_EQ(c.values[i], *v);
    }
  EXPECT_TRUE(v);
}

TEST(EnsembleDacCurve, IndependentOfThreadCount) {
  std::mt19937_64 gen(32);
  const auto data = fixtures::lattice_data(gen, 300, 3);
  dac::TrainParams p;
  p.n_trees = 9;
  const auto m = dac::fit_random_forest(data, p, dac::Task::Regression);
  const FeatureSet s({0, 2}, 3);
  dac::DacParams dp;
  dp.grid_points_per_dim = 20;
  const auto g = dac::default_grid(data, s, dp);
  setenv("DAC_THREADS", "1", 1);
  const auto a = dac::ensemble_dac_curve(m, data, s, g, dp);
  setenv("DAC_THREADS", "4", 1);
  const auto b = dac::ensemble_dac_curve(m, data, s, g, dp);
  unsetenv("DAC_THREADS");
  properties::Check c;
  properties::expect_identical(a, b, c, "threads");
  EXPECT_TRUE(c.ok) << c.detail;
}

TEST(Properties, EquivarianceAndRange) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = properties::random_instance(seed);
    for (const auto& check :
         {properties::target_affine(inst, -2.5, 7.0), properties::target_affine(inst, 0.3, -1.0),
          properties::feature_translation(inst, seed % inst.data.cols(), 3.0),
          properties::row_permutation(inst, seed), properties::value_range(inst)})
      EXPECT_TRUE(check.ok) << "seed " << seed << ": " << check.detail;
  }
}

TEST(EvaluateCurve, InterpolationRules) {
  dac::Curve c = dac::Curve::undefined_on(FeatureSet({0}, 1), Grid{{{0.0, 1.0, 2.0, 3.0}}});
  c.values = {0.0, 1.0, NAN, 5.0};
  c.counts = {1, 1, 0, 1};
  auto at = [&](double x) { return dac::evaluate_curve(c, std::span<const double>(&x, 1)); };
  EXPECT_EQ(at(1.0), 1.0);
  EXPECT_EQ(at(0.5), 0.5);
  EXPECT_EQ(at(10.0), 5.0);
  EXPECT_EQ(at(-10.0), 0.0);
  // Cell 2 is undefined; its nearest defined neighbour along the axis is
  // cell 1 (lower index wins the tie with cell 3).
  EXPECT_EQ(at(2.0), 1.0);
  EXPECT_EQ(at(2.5), 0.5 * 1.0 + 0.5 * 5.0);
  const double two[] = {1.0, 2.0};
  EXPECT_THROW(dac::evaluate_curve(c, two), dac::InvalidArgument);
}

TEST(EvaluateCurve, TwoDimensionalBilinear) {
  dac::Curve c = dac::Curve::undefined_on(FeatureSet({0, 1}, 2), Grid{{{0.0, 1.0}, {0.0, 1.0}}});
  c.values = {0.0, 1.0, 1.0, 0.0};
  c.counts = {1, 1, 1, 1};
  const double mid[] = {0.5, 0.5};
  EXPECT_DOUBLE_EQ(dac::evaluate_curve(c, mid), 0.5);
  const double edge[] = {0.0, 0.25};
  EXPECT_DOUBLE_EQ(dac::evaluate_curve(c, edge), 0.25);
}

TEST(EvaluateCurve, EntirelyUndefinedIsAnError) {
  const auto c = dac::Curve::undefined_on(FeatureSet({0}, 1), Grid{{{0.0, 1.0}}});
  const double x = 0.5;
  EXPECT_THROW(dac::evaluate_curve(c, std::span<const double>(&x, 1)), dac::InvalidArgument);
}

}  // namespace
