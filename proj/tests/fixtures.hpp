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

#ifndef DAC_TESTS_FIXTURES_HPP_
#define DAC_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <random>
#include <vector>

#include "dac/dac.hpp"

namespace fixtures {

/// {(0,0)->0, (0,1)->1, (1,0)->1, (1,1)->0}, each point `reps` times.
inline dac::Dataset xor_data(int reps = 1) {
  std::vector<double> x, y;
  for (int r = 0; r < reps; ++r)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        x.push_back(a);
        x.push_back(b);
        y.push_back(a != b ? 1.0 : 0.0);
      }
  return dac::Dataset(y.size(), 2, x, y, {"fever", "bp"});
}

/// X = [0.1, 0.2, 0.7, 0.9], Y = [0, 0, 1, 1].
inline dac::Dataset four_points() {
  return dac::Dataset(4, 1, {0.1, 0.2, 0.7, 0.9}, {0, 0, 1, 1}, {"x1"});
}

inline dac::TreeNode split_node(int feature, double threshold, int left, int right) {
  dac::TreeNode nd;
  nd.feature = feature;
  nd.threshold = threshold;
  nd.left = left;
  nd.right = right;
  return nd;
}

/// Single split x < threshold on `feature`, leaves routed from `data`.
inline dac::DecisionTree stump(const dac::Dataset& data, int feature, double threshold) {
  dac::DecisionTree t;
  t.nodes.resize(3);
  t.nodes[0].feature = feature;
  t.nodes[0].threshold = threshold;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  dac::route_dataset(t, data, true);
  return t;
}

inline dac::Ensemble single_tree_model(dac::DecisionTree tree, const dac::Dataset& data,
                                       dac::Task task = dac::Task::Regression) {
  dac::Ensemble m;
  m.trees.push_back(std::move(tree));
  m.weights = {1.0};
  m.task = task;
  m.n_features = data.cols();
  m.feature_names = data.feature_names();
  return m;
}

/// Random lattice data: coordinates are multiples of 1/4 in [0, 3], targets
/// multiples of 1/8 in [-2, 2]. Lattice values make ties common and keep
/// interval boundaries away from grid points unless they coincide exactly.
inline dac::Dataset lattice_data(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::uniform_int_distribution<int> xs(0, 12), ys(-16, 16);
  std::vector<double> x(n * d), y(n);
  for (auto& v : x) v = xs(rng) / 4.0;
  for (auto& v : y) v = ys(rng) / 8.0;
  return dac::Dataset(n, d, std::move(x), std::move(y));
}

/// Random tree with at most `max_leaves` leaves; thresholds are midpoints of
/// lattice values so both sides can be nonempty. Leaves are routed from data.
inline dac::DecisionTree random_tree(std::mt19937_64& rng, const dac::Dataset& data,
                                     std::size_t max_leaves) {
  dac::DecisionTree t;
  t.nodes.resize(1);
  std::uniform_int_distribution<std::size_t> leaves_dist(1, max_leaves);
  const std::size_t target = leaves_dist(rng);
  std::uniform_int_distribution<int> feat(0, static_cast<int>(data.cols()) - 1);
  std::uniform_int_distribution<int> thr(0, 11);
  std::size_t n_leaves = 1;
  while (n_leaves < target) {
    std::vector<int> leaves = t.leaves();
    std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
    const int leaf = leaves[pick(rng)];
    const int left = static_cast<int>(t.nodes.size());
    t.nodes.resize(t.nodes.size() + 2);
    auto& nd = t.nodes[leaf];
    nd.feature = feat(rng);
    nd.threshold = (thr(rng) + 0.5) / 4.0;
    nd.left = left;
    nd.right = left + 1;
    ++n_leaves;
  }
  dac::route_dataset(t, data, true);
  return t;
}

/// Lattice grid covering [lo, hi] in steps of 1/8.
inline std::vector<double> lattice_axis(double lo = -0.25, double hi = 3.25) {
  std::vector<double> axis;
  for (double v = lo; v <= hi + 1e-12; v += 0.125) axis.push_back(v);
  return axis;
}

}  // namespace fixtures

#endif  // DAC_TESTS_FIXTURES_HPP_
