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

// Feature engineering with attribution curves: a random forest picks the
// feature with the highest impurity importance, that feature's 1-D curve is
// appended as an extra column, and logistic regression is compared with and
// without it.

#ifndef DAC_FEATLAB_HPP_
#define DAC_FEATLAB_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dac/attribution.hpp"
#include "dac/common.hpp"
#include "dac/dataset.hpp"
#include "dac/ensemble.hpp"

namespace dac {

/// Uniform random partition; each part keeps the original row order.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                                    double train_fraction,
                                                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must be in (0, 1)");
  const std::size_t n = data.rows();
  if (n < 2) throw InvalidArgument("train_test_split: need at least 2 rows");
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    throw InvalidArgument("train_test_split: split of " + std::to_string(n) +
                          " rows at fraction " + format_double(train_fraction) +
                          " leaves one side empty");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(seed, 0x5b117));
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> train(idx.begin(), idx.begin() + n_train);
  std::vector<std::size_t> test(idx.begin() + n_train, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

/// Maps targets onto {0, 1}. Two distinct values map in increasing order;
/// with more classes the most frequent one becomes 1 and the rest 0 (ties
/// go to the smaller class code).
inline Dataset binarize_target(const Dataset& data) {
  std::map<double, std::size_t> freq;
  for (double y : data.targets()) ++freq[y];
  if (freq.size() < 2) throw DataError("degenerate labels: only one class present");
  std::vector<double> y(data.rows());
  if (freq.size() == 2) {
    const double positive = freq.rbegin()->first;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = data.y(i) == positive ? 1.0 : 0.0;
  } else {
    double positive = freq.begin()->first;
    std::size_t best = 0;
    for (const auto& [cls, count] : freq)
      if (count > best) {
        best = count;
        positive = cls;
      }
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = data.y(i) == positive ? 1.0 : 0.0;
  }
  return data.with_targets(std::move(y));
}

struct LogisticModel {
  std::vector<double> weights;  // weights[0] is the intercept
  int iterations = 0;
  double final_loss = 0.0;

  double decision(std::span<const double> x) const {
    if (x.size() + 1 != weights.size())
      throw InvalidArgument("logistic model: input has wrong dimensionality");
    double z = weights[0];
    for (std::size_t j = 0; j < x.size(); ++j) z += weights[j + 1] * x[j];
    return z;
  }

  double predict_proba(std::span<const double> x) const {
    return 1.0 / (1.0 + std::exp(-decision(x)));
  }
};

struct LogisticParams {
  double l2 = 1e-4;
  int max_iters = 2000;
  double tol = 1e-6;
};

namespace detail {

inline double log1p_exp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

/// Minimizes mean log-loss + l2 * |w|^2 (intercept unpenalized) by gradient
/// descent with backtracking line search on standardized features.
inline LogisticModel fit_logistic(const Dataset& data, const LogisticParams& params = {}) {
  if (data.rows() < 2) throw DataError("fit_logistic: need at least 2 rows");
  data.check_task(Task::BinaryClassification);
  const auto& ys = data.targets();
  if (std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); }))
    throw DataError("degenerate labels");

  const std::size_t n = data.rows(), d = data.cols();
  const double nn = static_cast<double>(n);
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) mean[j] += data.x(i, j);
    mean[j] /= nn;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = data.x(i, j) - mean[j];
      var += dev * dev;
    }
    var /= nn;
    scale[j] = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;  // constants stay at 0
  }
  std::vector<double> z(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      z[i * d + j] = (data.x(i, j) - mean[j]) * scale[j];

  auto loss_and_grad = [&](const std::vector<double>& w, std::vector<double>* grad) {
    double loss = 0.0;
    if (grad) grad->assign(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double m = w[0];
      for (std::size_t j = 0; j < d; ++j) m += w[j + 1] * z[i * d + j];
      loss += detail::log1p_exp(m) - ys[i] * m;
      if (grad) {
        const double r = 1.0 / (1.0 + std::exp(-m)) - ys[i];
        (*grad)[0] += r;
        for (std::size_t j = 0; j < d; ++j) (*grad)[j + 1] += r * z[i * d + j];
      }
    }
    loss /= nn;
    for (std::size_t j = 1; j <= d; ++j) loss += params.l2 * w[j] * w[j];
    if (grad) {
      for (auto& g : *grad) g /= nn;
      for (std::size_t j = 1; j <= d; ++j) (*grad)[j] += 2.0 * params.l2 * w[j];
    }
    return loss;
  };

  std::vector<double> w(d + 1, 0.0), grad, trial(d + 1);
  double loss = loss_and_grad(w, &grad);
  double step = 1.0;
  int iter = 0;
  for (; iter < params.max_iters; ++iter) {
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    if (std::sqrt(gnorm2) <= params.tol) break;
    step *= 2.0;
    double trial_loss = 0.0;
    while (true) {
      for (std::size_t j = 0; j <= d; ++j) trial[j] = w[j] - step * grad[j];
      trial_loss = loss_and_grad(trial, nullptr);
      if (trial_loss <= loss - 0.5 * step * gnorm2 || step < 1e-12) break;
      step *= 0.5;
    }
    if (step < 1e-12) break;
    w.swap(trial);
    loss = loss_and_grad(w, &grad);
  }

  LogisticModel out;
  out.iterations = iter;
  out.final_loss = loss;
  out.weights.assign(d + 1, 0.0);
  out.weights[0] = w[0];
  for (std::size_t j = 0; j < d; ++j) {
    out.weights[j + 1] = w[j + 1] * scale[j];
    out.weights[0] -= w[j + 1] * scale[j] * mean[j];
  }
  return out;
}

inline double accuracy(const LogisticModel& model, const Dataset& data) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double label = model.decision(data.row(i)) >= 0.0 ? 1.0 : 0.0;
    hits += label == data.y(i);
  }
  return static_cast<double>(hits) / static_cast<double>(data.rows());
}

inline double accuracy(const Ensemble& model, const Dataset& data) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double label = model.predict(data.row(i)) >= 0.5 ? 1.0 : 0.0;
    hits += label == data.y(i);
  }
  return static_cast<double>(hits) / static_cast<double>(data.rows());
}

/// Appends evaluate_curve(curve, x_feature) as a new rightmost column.
inline Dataset augment_with_dac(const Dataset& data, const DacCurve& curve,
                                std::size_t feature) {
  if (feature >= data.cols())
    throw InvalidArgument("augment_with_dac: feature out of range");
  if (curve.grid.dims() != 1)
    throw InvalidArgument("augment_with_dac: expects a one-feature curve");
  std::vector<double> column(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double x = data.x(i, feature);
    column[i] = evaluate_curve(curve, std::span<const double>(&x, 1));
  }
  return data.with_column(column, "dac_" + data.feature_names()[feature]);
}

struct FeParams {
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
  int n_trees = 50;
  DacParams dac;
  LogisticParams logistic;
};

struct FeResult {
  std::string dataset;
  double rf_accuracy = 0.0;
  double logit_accuracy = 0.0;
  double logit_dac_accuracy = 0.0;
  std::size_t selected_feature = 0;
  double difference = 0.0;
};

/// Everything an experiment fits, exposed for inspection.
struct FeArtifacts {
  Ensemble forest;
  DacCurve curve;
  LogisticModel logit;
  LogisticModel logit_dac;
};

inline FeResult run_fe_experiment(const Dataset& raw, const FeParams& params,
                                  const std::string& name = "dataset",
                                  FeArtifacts* artifacts = nullptr) {
  const Dataset data = binarize_target(raw);
  auto [train, test] = train_test_split(data, params.train_fraction, params.seed);

  TrainParams rf;
  rf.n_trees = params.n_trees;
  rf.seed = derive_seed(params.seed, 0xf0e57);
  Ensemble forest = fit_random_forest(train, rf, Task::BinaryClassification);

  FeResult out;
  out.dataset = name;
  out.rf_accuracy = accuracy(forest, test);

  const auto importance = gini_importance(forest, train);
  out.selected_feature = static_cast<std::size_t>(
      std::max_element(importance.begin(), importance.end()) - importance.begin());

  const FeatureSet s({out.selected_feature}, train.cols());
  const Grid grid = default_grid(train, s, params.dac);
  DacCurve curve = ensemble_dac_curve(forest, train, s, grid, params.dac);

  LogisticModel logit = fit_logistic(train, params.logistic);
  out.logit_accuracy = accuracy(logit, test);

  const Dataset train_aug = augment_with_dac(train, curve, out.selected_feature);
  const Dataset test_aug = augment_with_dac(test, curve, out.selected_feature);
  LogisticModel logit_dac = fit_logistic(train_aug, params.logistic);
  out.logit_dac_accuracy = accuracy(logit_dac, test_aug);
  out.difference = out.logit_dac_accuracy - out.logit_accuracy;

  if (artifacts) {
    artifacts->forest = std::move(forest);
    artifacts->curve = std::move(curve);
    artifacts->logit = std::move(logit);
    artifacts->logit_dac = std::move(logit_dac);
  }
  return out;
}

}  // namespace dac

#endif  // DAC_FEATLAB_HPP_
