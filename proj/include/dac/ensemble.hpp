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

#ifndef DAC_ENSEMBLE_HPP_
#define DAC_ENSEMBLE_HPP_

#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dac/common.hpp"
#include "dac/dataset.hpp"
#include "dac/tree.hpp"

namespace dac {

/// Weighted tree ensemble. The prediction is sum_i weights[i] * tree_i(x);
/// for binary classification that is the positive-class probability.
struct Ensemble {
  std::vector<DecisionTree> trees;
  std::vector<double> weights;
  Task task = Task::Regression;
  std::vector<std::string> feature_names;
  std::size_t n_features = 0;

  double predict(std::span<const double> x) const {
    if (x.size() != n_features)
      throw InvalidArgument("predict: input has " + std::to_string(x.size()) +
                            " features, model expects " +
                            std::to_string(n_features));
    double out = 0.0;
    for (std::size_t t = 0; t < trees.size(); ++t)
      out += weights[t] * trees[t].predict(x);
    return out;
  }

  /// Predictions for every row. Same arithmetic (and result) as the
  /// per-row overload, with trees in the outer loop over a compact node
  /// layout.
  std::vector<double> predict(const Dataset& data) const {
    if (data.cols() != n_features)
      throw InvalidArgument("predict: dataset has " + std::to_string(data.cols()) +
                            " features, model expects " + std::to_string(n_features));
    struct Flat {
      double threshold;  // leaf value at leaves
      int feature;
      int left;
      int right;
    };
    std::vector<double> out(data.rows(), 0.0);
    std::vector<Flat> flat;
    for (std::size_t t = 0; t < trees.size(); ++t) {
      flat.clear();
      for (const auto& nd : trees[t].nodes)
        flat.push_back({nd.is_leaf() ? nd.value : nd.threshold, nd.feature, nd.left,
                        nd.right});
      const double w = weights[t];
      for (std::size_t r = 0; r < data.rows(); ++r) {
        const double* x = data.features().data() + r * n_features;
        int i = 0;
        while (flat[i].feature >= 0)
          i = x[flat[i].feature] < flat[i].threshold ? flat[i].left : flat[i].right;
        out[r] += w * flat[i].threshold;
      }
    }
    return out;
  }

  void validate() const {
    if (trees.empty()) throw DataError("ensemble: no trees");
    if (trees.size() != weights.size())
      throw DataError("ensemble: " + std::to_string(trees.size()) + " trees but " +
                      std::to_string(weights.size()) + " weights");
    if (feature_names.size() != n_features)
      throw DataError("ensemble: feature_names has " +
                      std::to_string(feature_names.size()) +
                      " entries, n_features is " + std::to_string(n_features));
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw DataError("ensemble: weights must be finite and nonnegative");
      total += w;
    }
    if (std::fabs(total - 1.0) > 1e-9)
      throw DataError("ensemble: weights sum to " + format_double(total) +
                      ", expected 1");
    for (std::size_t t = 0; t < trees.size(); ++t)
      trees[t].validate(n_features, "tree " + std::to_string(t));
  }
};

inline Ensemble fit_random_forest(const Dataset& data, const TrainParams& params,
                                  Task task) {
  if (data.empty()) throw DataError("fit_random_forest: empty dataset");
  params.validate();
  data.check_task(task);

  const auto m = static_cast<std::size_t>(params.n_trees);
  Ensemble model;
  model.task = task;
  model.n_features = data.cols();
  model.feature_names = data.feature_names();
  model.trees.resize(m);
  model.weights.assign(m, 1.0 / static_cast<double>(m));

  // Each tree owns an RNG stream keyed by (seed, tree index), so the result
  // does not depend on scheduling.
  parallel_for(m, [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(params.seed, t));
    std::vector<std::size_t> rows(data.rows());
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, data.rows() - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    model.trees[t] = fit_tree_on_rows(data, std::move(rows), params, task, rng);
  });
  return model;
}

/// AdaBoost.R2 with linear loss. Each round fits a depth-limited tree on a
/// weighted resample (params.max_depth, default 4); params.n_trees caps the
/// number of rounds.
inline Ensemble fit_adaboost_r2(const Dataset& data, const TrainParams& params) {
  if (data.rows() < 2) throw DataError("fit_adaboost_r2: need at least 2 rows");
  params.validate();

  TrainParams tree_params = params;
  if (!tree_params.max_depth) tree_params.max_depth = 4;
  tree_params.max_features = tree_params.max_features.value_or(MaxFeatures::All);

  const std::size_t n = data.rows();
  std::vector<double> sample_weight(n, 1.0 / static_cast<double>(n));
  std::vector<double> raw_weights;

  Ensemble model;
  model.task = Task::Regression;
  model.n_features = data.cols();
  model.feature_names = data.feature_names();

  std::mt19937_64 rng(derive_seed(params.seed, 0xada));
  for (int round = 0; round < params.n_trees; ++round) {
    std::discrete_distribution<std::size_t> pick(sample_weight.begin(),
                                                 sample_weight.end());
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    DecisionTree tree =
        fit_tree_on_rows(data, std::move(rows), tree_params, Task::Regression, rng);

    std::vector<double> err(n);
    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = std::fabs(tree.predict(data.row(i)) - data.y(i));
      max_err = std::max(max_err, err[i]);
    }
    if (max_err == 0.0) {
      // A perfect learner reproduces the targets on its own.
      model.trees.assign(1, std::move(tree));
      model.weights.assign(1, 1.0);
      return model;
    }
    double estimator_error = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] /= max_err;
      estimator_error += sample_weight[i] * err[i];
    }
    if (estimator_error >= 0.5) {
      if (model.trees.empty())
        throw DataError("boosting failed to find weak learner");
      break;
    }
    const double beta = estimator_error / (1.0 - estimator_error);
    model.trees.push_back(std::move(tree));
    raw_weights.push_back(std::log(1.0 / beta));

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sample_weight[i] *= std::pow(beta, 1.0 - err[i]);
      total += sample_weight[i];
    }
    for (auto& w : sample_weight) w /= total;
  }
  const double sum = std::accumulate(raw_weights.begin(), raw_weights.end(), 0.0);
  for (double w : raw_weights) model.weights.push_back(w / sum);
  return model;
}

/// Mean decrease in impurity, with node impurities recomputed from `data`
/// routed through each tree (variance for regression, Gini for binary
/// classification). Tree contributions are combined with the ensemble
/// weights and the result is normalized to sum to one; a model without
/// splits yields all zeros.
inline std::vector<double> gini_importance(const Ensemble& model,
                                           const Dataset& data) {
  if (data.cols() != model.n_features)
    throw InvalidArgument("gini_importance: dataset has " +
                          std::to_string(data.cols()) + " features, model has " +
                          std::to_string(model.n_features));
  std::vector<double> importance(model.n_features, 0.0);
  if (data.empty()) return importance;
  const double n = static_cast<double>(data.rows());

  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& tree = model.trees[t];
    const std::size_t m = tree.nodes.size();
    std::vector<double> count(m, 0.0), sum(m, 0.0), sumsq(m, 0.0);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      auto x = data.row(r);
      const double y = data.y(r);
      int i = 0;
      while (true) {
        count[i] += 1.0;
        sum[i] += y;
        sumsq[i] += y * y;
        const auto& nd = tree.nodes[i];
        if (nd.is_leaf()) break;
        i = x[nd.feature] < nd.threshold ? nd.left : nd.right;
      }
    }
    // count * impurity
    auto scaled_impurity = [&](std::size_t i) {
      if (count[i] == 0.0) return 0.0;
      if (model.task == Task::Regression)
        return std::max(0.0, sumsq[i] - sum[i] * sum[i] / count[i]);
      const double p = sum[i] / count[i];
      return count[i] * 2.0 * p * (1.0 - p);
    };
    for (std::size_t i = 0; i < m; ++i) {
      const auto& nd = tree.nodes[i];
      if (nd.is_leaf() || count[i] == 0.0) continue;
      const double decrease = scaled_impurity(i) - scaled_impurity(nd.left) -
                              scaled_impurity(nd.right);
      importance[nd.feature] += model.weights[t] * std::max(0.0, decrease) / n;
    }
  }
  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (total > 0.0)
    for (auto& v : importance) v /= total;
  return importance;
}

}  // namespace dac

#endif  // DAC_ENSEMBLE_HPP_
