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

// Reference curves the attribution curves are compared against: partial
// dependence, the empirical conditional expectation of model predictions,
// and the masked MSE between two curves on a shared grid.

#ifndef DAC_BASELINES_HPP_
#define DAC_BASELINES_HPP_

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "dac/attribution.hpp"
#include "dac/common.hpp"
#include "dac/dataset.hpp"
#include "dac/ensemble.hpp"

namespace dac {

namespace detail {

// Adds tree(x with x_S := g) for every grid cell g into acc. The walk leaves
// the S coordinates free and narrows each axis to the grid points that can
// reach a node, so every cell is visited exactly once per row.
inline void accumulate_free_walk(const DecisionTree& tree, int node,
                                 std::span<const double> x, const FeatureSet& s,
                                 const Grid& grid,
                                 std::vector<std::pair<std::size_t, std::size_t>>& ranges,
                                 std::vector<double>& acc) {
  while (true) {
    const auto& nd = tree.nodes[node];
    if (nd.is_leaf()) {
      const double v = nd.value;
      if (ranges.size() == 1) {
        for (std::size_t c = ranges[0].first; c < ranges[0].second; ++c) acc[c] += v;
      } else {
        for_each_cell(grid, ranges, [&](std::size_t cell) { acc[cell] += v; });
      }
      return;
    }
    auto pos = s.position(static_cast<std::size_t>(nd.feature));
    if (!pos) {
      node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
      continue;
    }
    const auto& axis = grid.axes[*pos];
    const auto split = static_cast<std::size_t>(
        std::lower_bound(axis.begin(), axis.end(), nd.threshold) - axis.begin());
    const auto saved = ranges[*pos];
    if (saved.first < std::min(saved.second, split)) {
      // The left walk may narrow any axis, so restore all of them.
      const auto before = ranges;
      ranges[*pos].second = std::min(saved.second, split);
      accumulate_free_walk(tree, nd.left, x, s, grid, ranges, acc);
      ranges = before;
    }
    if (std::max(saved.first, split) < saved.second) {
      ranges[*pos].first = std::max(saved.first, split);
      node = nd.right;
      continue;
    }
    return;
  }
}

inline void check_curve_inputs(const Ensemble& model, const Dataset& data,
                               const FeatureSet& s, const Grid& grid) {
  grid.validate();
  if (data.cols() != model.n_features)
    throw InvalidArgument("dataset has " + std::to_string(data.cols()) +
                          " features, model expects " + std::to_string(model.n_features));
  if (grid.dims() != s.size())
    throw InvalidArgument("grid dimensionality does not match the feature set");
  for (std::size_t f : s.indices())
    if (f >= data.cols()) throw InvalidArgument("feature set exceeds dataset width");
}

}  // namespace detail

/// Partial dependence: at each grid cell g, the mean over data rows of the
/// model prediction with x_S replaced by g. Defined everywhere (count n).
inline Curve pdp_curve(const Ensemble& model, const Dataset& data,
                       const FeatureSet& s, const Grid& grid) {
  detail::check_curve_inputs(model, data, s, grid);
  if (data.empty()) throw InvalidArgument("pdp_curve: empty dataset");
  const std::size_t cells = grid.cell_count();
  const double n = static_cast<double>(data.rows());

  std::vector<std::vector<double>> per_tree(model.trees.size());
  parallel_for(model.trees.size(), [&](std::size_t t) {
    std::vector<double> acc(cells, 0.0);
    std::vector<std::pair<std::size_t, std::size_t>> ranges(s.size());
    for (std::size_t r = 0; r < data.rows(); ++r) {
      for (std::size_t a = 0; a < s.size(); ++a) ranges[a] = {0, grid.axes[a].size()};
      detail::accumulate_free_walk(model.trees[t], 0, data.row(r), s, grid, ranges, acc);
    }
    per_tree[t] = std::move(acc);
  });

  Curve out = Curve::undefined_on(s, grid);
  std::fill(out.values.begin(), out.values.end(), 0.0);
  for (std::size_t t = 0; t < model.trees.size(); ++t)
    for (std::size_t cell = 0; cell < cells; ++cell)
      out.values[cell] += model.weights[t] * (per_tree[t][cell] / n);
  std::fill(out.counts.begin(), out.counts.end(), n);
  return out;
}

/// Bin index of each S-coordinate: bin edges sit at midpoints between
/// adjacent grid coordinates, outer bins are unbounded.
inline std::size_t grid_bin(const Grid& grid, std::span<const double> x_s) {
  std::vector<std::size_t> idx(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    const auto& axis = grid.axes[a];
    // First grid point whose upper edge is above the value.
    std::size_t lo = 0, hi = axis.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      const double edge = axis[mid] + (axis[mid + 1] - axis[mid]) / 2.0;
      if (x_s[a] < edge) hi = mid;
      else lo = mid + 1;
    }
    idx[a] = lo;
  }
  return grid.flatten(idx);
}

/// Conditional expectation of the given predictions within each grid bin.
inline Curve conditional_expectation_from_predictions(
    const Dataset& sample, std::span<const double> predictions,
    const FeatureSet& s, const Grid& grid) {
  grid.validate();
  if (s.size() < 1 || s.size() > 2)
    throw InvalidArgument("conditional expectation supports one or two features");
  if (grid.dims() != s.size())
    throw InvalidArgument("grid dimensionality does not match the feature set");
  if (sample.empty()) throw InvalidArgument("conditional expectation: empty sample");
  if (predictions.size() != sample.rows())
    throw InvalidArgument("conditional expectation: prediction count mismatch");

  Curve out = Curve::undefined_on(s, grid);
  std::vector<double> sum(grid.cell_count(), 0.0);
  std::vector<double> xs(s.size());
  for (std::size_t r = 0; r < sample.rows(); ++r) {
    for (std::size_t j = 0; j < s.size(); ++j) xs[j] = sample.x(r, s[j]);
    const std::size_t cell = grid_bin(grid, xs);
    sum[cell] += predictions[r];
    out.counts[cell] += 1.0;
  }
  for (std::size_t cell = 0; cell < sum.size(); ++cell)
    if (out.counts[cell] > 0.0) out.values[cell] = sum[cell] / out.counts[cell];
  return out;
}

inline Curve conditional_expectation_curve(const Ensemble& model,
                                           const Dataset& sample,
                                           const FeatureSet& s, const Grid& grid) {
  detail::check_curve_inputs(model, sample, s, grid);
  const auto predictions = model.predict(sample);
  return conditional_expectation_from_predictions(sample, predictions, s, grid);
}

/// Mean squared difference over cells defined in both curves.
inline double curve_mse(const Curve& a, const Curve& b) {
  if (!(a.grid == b.grid)) throw InvalidArgument("curve_mse: grids differ");
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t cell = 0; cell < a.size(); ++cell) {
    if (!a.defined(cell) || !b.defined(cell)) continue;
    const double d = a.values[cell] - b.values[cell];
    total += d * d;
    ++n;
  }
  if (n == 0) throw InvalidArgument("curve_mse: curves share no defined cell");
  return total / static_cast<double>(n);
}

}  // namespace dac

#endif  // DAC_BASELINES_HPP_
