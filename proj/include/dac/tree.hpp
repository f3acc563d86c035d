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

// Binary threshold trees and a CART builder.
//
// A node sends x to `left` when x[feature] < threshold and to `right`
// otherwise. Leaves keep the training rows they contain; those rows always
// come from the full training set routed through the fitted structure, even
// when the structure was chosen on a resample.

#ifndef DAC_TREE_HPP_
#define DAC_TREE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dac/common.hpp"
#include "dac/dataset.hpp"

namespace dac {

enum class Direction { LT, GE };

struct SplitRule {
  std::size_t feature = 0;
  double threshold = 0.0;
  Direction direction = Direction::GE;

  bool satisfied_by(double v) const {
    return direction == Direction::LT ? v < threshold : v >= threshold;
  }
  bool operator==(const SplitRule&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::int64_t n_samples = 0;
  std::optional<std::vector<std::size_t>> sample_indices;

  bool is_leaf() const { return feature < 0; }
};

/// A leaf together with the rules on its root-to-leaf path.
struct LeafPath {
  int leaf = -1;
  std::vector<SplitRule> rules;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int leaf_index(std::span<const double> x) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = x[n.feature] < n.threshold ? n.left : n.right;
    }
    return i;
  }

  double predict(std::span<const double> x) const {
    return nodes[leaf_index(x)].value;
  }

  std::vector<int> leaves() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].is_leaf()) out.push_back(static_cast<int>(i));
    return out;
  }

  /// Every leaf with its path rules, in depth-first (left before right) order.
  std::vector<LeafPath> leaf_paths() const {
    std::vector<LeafPath> out;
    std::vector<SplitRule> path;
    collect_paths(0, path, out);
    return out;
  }

  std::vector<SplitRule> path_rules(int leaf) const {
    for (auto& p : leaf_paths())
      if (p.leaf == leaf) return std::move(p.rules);
    throw InvalidArgument("tree: node " + std::to_string(leaf) +
                          " is not a leaf");
  }

  /// Structural checks: child indices in range, single root, no cycles,
  /// split features below n_features.
  void validate(std::size_t n_features, const std::string& where = "tree") const {
    if (nodes.empty()) throw DataError(where + ": no nodes");
    std::vector<int> parents(nodes.size(), 0);
    const int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n; ++i) {
      const auto& nd = nodes[i];
      const std::string at = where + " node " + std::to_string(i);
      if (nd.is_leaf()) {
        if (nd.left != -1 || nd.right != -1)
          throw DataError(at + ": leaf has children");
        continue;
      }
      if (static_cast<std::size_t>(nd.feature) >= n_features)
        throw DataError(at + ": feature " + std::to_string(nd.feature) +
                        " out of range (n_features=" +
                        std::to_string(n_features) + ")");
      if (!std::isfinite(nd.threshold))
        throw DataError(at + ": non-finite threshold");
      for (int c : {nd.left, nd.right}) {
        if (c <= 0 || c >= n)
          throw DataError(at + ": child index " + std::to_string(c) +
                          " out of range");
        ++parents[c];
      }
    }
    for (int i = 1; i < n; ++i) {
      if (parents[i] != 1)
        throw DataError(where + " node " + std::to_string(i) + ": has " +
                        std::to_string(parents[i]) +
                        " parents, expected exactly one");
    }
    // Every node reachable from the root exactly once implies a tree.
    std::vector<char> seen(nodes.size(), 0);
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      if (seen[i]) throw DataError(where + ": cycle at node " + std::to_string(i));
      seen[i] = 1;
      if (!nodes[i].is_leaf()) {
        stack.push_back(nodes[i].left);
        stack.push_back(nodes[i].right);
      }
    }
    for (int i = 0; i < n; ++i)
      if (!seen[i])
        throw DataError(where + " node " + std::to_string(i) +
                        ": unreachable from root");
  }

 private:
  void collect_paths(int i, std::vector<SplitRule>& path,
                     std::vector<LeafPath>& out) const {
    const auto& nd = nodes[i];
    if (nd.is_leaf()) {
      out.push_back({i, path});
      return;
    }
    const auto f = static_cast<std::size_t>(nd.feature);
    path.push_back({f, nd.threshold, Direction::LT});
    collect_paths(nd.left, path, out);
    path.back().direction = Direction::GE;
    collect_paths(nd.right, path, out);
    path.pop_back();
  }
};

/// Routes every row of `data` through the tree, recording per-node counts
/// and leaf memberships. When `refresh_values` is set, each leaf value becomes
/// the statistic of its routed rows (mean target; for binary targets this is
/// the positive-class fraction). Leaves receiving no rows keep their value.
inline void route_dataset(DecisionTree& tree, const Dataset& data,
                          bool refresh_values) {
  for (auto& nd : tree.nodes) {
    nd.n_samples = 0;
    if (nd.is_leaf()) nd.sample_indices.emplace();
    else nd.sample_indices.reset();
  }
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto x = data.row(r);
    int i = 0;
    while (true) {
      auto& nd = tree.nodes[i];
      ++nd.n_samples;
      if (nd.is_leaf()) {
        nd.sample_indices->push_back(r);
        break;
      }
      i = x[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
  }
  if (!refresh_values) return;
  for (auto& nd : tree.nodes) {
    if (!nd.is_leaf() || nd.sample_indices->empty()) continue;
    ExactSum sum;
    for (std::size_t r : *nd.sample_indices) sum.add(data.y(r));
    nd.value = sum.value() / static_cast<double>(nd.sample_indices->size());
  }
}

enum class MaxFeatures { All, Sqrt, FractionOneThird };

struct TrainParams {
  int n_trees = 50;
  std::optional<int> max_depth;
  // Unset means 1 for classification and 5 for regression.
  std::optional<int> min_samples_leaf;
  // Unset means Sqrt for classification and All for regression.
  std::optional<MaxFeatures> max_features;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  // Features never offered to any split.
  std::vector<std::size_t> excluded_features;

  int resolved_min_samples_leaf(Task task) const {
    return min_samples_leaf.value_or(task == Task::Regression ? 5 : 1);
  }
  MaxFeatures resolved_max_features(Task task) const {
    return max_features.value_or(task == Task::Regression ? MaxFeatures::All
                                                          : MaxFeatures::Sqrt);
  }

  void validate() const {
    if (n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
    if (min_samples_leaf && *min_samples_leaf < 1)
      throw InvalidArgument("min_samples_leaf must be >= 1");
    if (max_depth && *max_depth < 0)
      throw InvalidArgument("max_depth must be >= 0");
  }
};

namespace detail {

inline std::size_t features_per_split(MaxFeatures mf, std::size_t d) {
  switch (mf) {
    case MaxFeatures::All:
      return d;
    case MaxFeatures::Sqrt:
      return std::max<std::size_t>(
          1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    case MaxFeatures::FractionOneThird:
      return std::max<std::size_t>(1, d / 3);
  }
  return d;
}

// Greedy CART over a multiset of row indices (duplicates from resampling are
// allowed and count with multiplicity).
class CartBuilder {
 public:
  CartBuilder(const Dataset& data, const TrainParams& params, Task task,
              std::mt19937_64& rng)
      : data_(data),
        task_(task),
        rng_(rng),
        max_depth_(params.max_depth),
        min_leaf_(static_cast<std::size_t>(params.resolved_min_samples_leaf(task))) {
    std::vector<char> excluded(data.cols(), 0);
    for (std::size_t f : params.excluded_features) {
      if (f >= data.cols())
        throw InvalidArgument("excluded feature " + std::to_string(f) +
                              " out of range");
      excluded[f] = 1;
    }
    for (std::size_t f = 0; f < data.cols(); ++f)
      if (!excluded[f]) candidates_.push_back(f);
    n_try_ = std::min(candidates_.size(),
                      features_per_split(params.resolved_max_features(task),
                                         data.cols()));
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, std::move(rows), 0);
    return tree;
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double child_impurity = 0.0;  // weighted, per row
    bool found = false;
  };

  static bool close(double a, double b) {
    return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
  }

  // Lower weighted child impurity wins; near-ties go to the lower feature
  // index, then the lower threshold.
  static bool better(const Split& cand, const Split& best) {
    if (!best.found) return true;
    if (!close(cand.child_impurity, best.child_impurity))
      return cand.child_impurity < best.child_impurity;
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
  }

  bool pure(const std::vector<std::size_t>& rows) const {
    const double y0 = data_.y(rows.front());
    return std::all_of(rows.begin(), rows.end(),
                       [&](std::size_t r) { return data_.y(r) == y0; });
  }

  // Sum of per-child impurity times child size, for a left part described by
  // (n, sum, sumsq) and the node totals.
  double weighted_impurity(double nl, double sl, double ql, double n, double s,
                           double q) const {
    const double nr = n - nl, sr = s - sl, qr = q - ql;
    if (task_ == Task::Regression) {
      const double left = std::max(0.0, ql - sl * sl / nl);
      const double right = std::max(0.0, qr - sr * sr / nr);
      return left + right;
    }
    // Gini with binary targets: n * 2 p (1 - p).
    const double left = 2.0 * sl * (nl - sl) / nl;
    const double right = 2.0 * sr * (nr - sr) / nr;
    return left + right;
  }

  Split best_split_on(std::size_t f, std::vector<std::size_t>& rows) const {
    Split best;
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      const double xa = data_.x(a, f), xb = data_.x(b, f);
      return xa < xb || (xa == xb && a < b);
    });
    const double n = static_cast<double>(rows.size());
    double s = 0.0, q = 0.0;
    for (std::size_t r : rows) {
      const double y = data_.y(r);
      s += y;
      q += y * y;
    }
    double sl = 0.0, ql = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const double y = data_.y(rows[i]);
      sl += y;
      ql += y * y;
      const double a = data_.x(rows[i], f);
      const double b = data_.x(rows[i + 1], f);
      if (a == b) continue;
      const std::size_t nl = i + 1;
      if (nl < min_leaf_ || rows.size() - nl < min_leaf_) continue;
      double thr = a + (b - a) / 2.0;
      if (!(thr > a)) thr = b;
      Split cand{f, thr,
                 weighted_impurity(static_cast<double>(nl), sl, ql, n, s, q) / n,
                 true};
      if (better(cand, best)) best = cand;
    }
    return best;
  }

  bool constant_feature(std::size_t f, const std::vector<std::size_t>& rows) const {
    const double v = data_.x(rows.front(), f);
    return std::all_of(rows.begin(), rows.end(),
                       [&](std::size_t r) { return data_.x(r, f) == v; });
  }

  void grow(DecisionTree& tree, int node, std::vector<std::size_t> rows,
            int depth) {
    const bool depth_stop = max_depth_ && depth >= *max_depth_;
    if (depth_stop || rows.size() < 2 * min_leaf_ || pure(rows)) return;

    // Visit features in random order; constant features are skipped without
    // counting towards the per-split budget.
    std::vector<std::size_t> order = candidates_;
    std::shuffle(order.begin(), order.end(), rng_);
    Split best;
    std::size_t tried = 0;
    for (std::size_t f : order) {
      if (tried >= n_try_) break;
      if (constant_feature(f, rows)) continue;
      ++tried;
      Split cand = best_split_on(f, rows);
      if (cand.found && better(cand, best)) best = cand;
    }
    if (!best.found) return;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (data_.x(r, best.feature) < best.threshold) left_rows.push_back(r);
      else right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& nd = tree.nodes[node];
    nd.feature = static_cast<int>(best.feature);
    nd.threshold = best.threshold;
    nd.left = left;
    nd.right = right;
    grow(tree, left, std::move(left_rows), depth + 1);
    grow(tree, right, std::move(right_rows), depth + 1);
  }

  const Dataset& data_;
  Task task_;
  std::mt19937_64& rng_;
  std::optional<int> max_depth_;
  std::size_t min_leaf_;
  std::vector<std::size_t> candidates_;
  std::size_t n_try_ = 0;
};

}  // namespace detail

/// Fits a CART tree choosing splits on the rows listed in `fit_rows`
/// (duplicates allowed), then routes the full dataset through it to populate
/// leaf statistics.
inline DecisionTree fit_tree_on_rows(const Dataset& data,
                                     std::vector<std::size_t> fit_rows,
                                     const TrainParams& params, Task task,
                                     std::mt19937_64& rng) {
  if (data.empty() || fit_rows.empty())
    throw DataError("fit_tree: empty dataset");
  params.validate();
  data.check_task(task);
  detail::CartBuilder builder(data, params, task, rng);
  DecisionTree tree = builder.build(std::move(fit_rows));
  route_dataset(tree, data, /*refresh_values=*/true);
  return tree;
}

inline DecisionTree fit_tree(const Dataset& data, const TrainParams& params,
                             Task task, std::mt19937_64& rng) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree_on_rows(data, std::move(rows), params, task, rng);
}

}  // namespace dac

#endif  // DAC_TREE_HPP_
