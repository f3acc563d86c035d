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

#include <numeric>
#include <random>
#include <set>

#include "dac/dac.hpp"
#include "fixtures.hpp"

namespace {

dac::Dataset indexed(std::size_t n) {
  std::vector<double> x(n), y(n);
  std::iota(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i % 2);
  return dac::Dataset(n, 1, x, y);
}

TEST(Split, SizesAndPartition) {
  const auto data = indexed(100);
  auto [train, test] = dac::train_test_split(data, 0.75, 0);
  EXPECT_EQ(train.rows(), 75u);
  EXPECT_EQ(test.rows(), 25u);
  std::set<double> all;
  for (double v : train.column(0)) all.insert(v);
  for (double v : test.column(0)) all.insert(v);
  EXPECT_EQ(all.size(), 100u);
}

TEST(Split, TwoRowsHalfAndHalf) {
  auto [train, test] = dac::train_test_split(indexed(2), 0.5, 3);
  EXPECT_EQ(train.rows(), 1u);
  EXPECT_EQ(test.rows(), 1u);
}

TEST(Split, DeterministicAndSeedDependent) {
  const auto data = indexed(50);
  const auto a = dac::train_test_split(data, 0.75, 9).first.column(0);
  const auto b = dac::train_test_split(data, 0.75, 9).first.column(0);
  const auto c = dac::train_test_split(data, 0.75, 10).first.column(0);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Split, DegenerateSizesAreErrors) {
  EXPECT_THROW(dac::train_test_split(indexed(3), 0.1, 0), dac::InvalidArgument);
  EXPECT_THROW(dac::train_test_split(indexed(3), 1.0, 0), dac::InvalidArgument);
  EXPECT_THROW(dac::train_test_split(indexed(1), 0.5, 0), dac::InvalidArgument);
}

TEST(Binarize, TwoAndManyClasses) {
  dac::Dataset two(3, 1, {0, 1, 2}, {3, 5, 3});
  EXPECT_EQ(dac::binarize_target(two).targets(), (std::vector<double>{0, 1, 0}));
  dac::Dataset many(5, 1, {0, 1, 2, 3, 4}, {0, 2, 2, 1, 2});
  EXPECT_EQ(dac::binarize_target(many).targets(), (std::vector<double>{0, 1, 1, 0, 1}));
  dac::Dataset one(2, 1, {0, 1}, {4, 4});
  EXPECT_THROW(dac::binarize_target(one), dac::DataError);
}

TEST(Logistic, SeparableDataIsFitPerfectly) {
  dac::Dataset data(6, 1, {-3, -2, -1, 1, 2, 3}, {0, 0, 0, 1, 1, 1});
  const auto m = dac::fit_logistic(data);
  EXPECT_EQ(dac::accuracy(m, data), 1.0);
  for (double w : m.weights) EXPECT_TRUE(std::isfinite(w));
}

TEST(Logistic, CoinFlipsWithStrongPenalty) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n;
  std::bernoulli_distribution coin(0.5);
  std::vector<double> x(2000 * 2), y(2000);
  for (auto& v : x) v = n(gen);
  for (auto& v : y) v = coin(gen);
  dac::Dataset data(2000, 2, x, y);
  dac::LogisticParams p;
  p.l2 = 10.0;
  const auto m = dac::fit_logistic(data, p);
  EXPECT_NEAR(m.weights[1], 0.0, 0.01);
  EXPECT_NEAR(m.weights[2], 0.0, 0.01);
  const double ones = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  EXPECT_NEAR(dac::accuracy(m, data), std::max(ones, 1 - ones), 0.03);
}

TEST(Logistic, BalancedZeroFeatures) {
  dac::Dataset data(4, 2, std::vector<double>(8, 0.0), {0, 1, 0, 1});
  const auto m = dac::fit_logistic(data);
  EXPECT_NEAR(m.weights[0], 0.0, 1e-9);
  const double x[] = {0.0, 0.0};
  EXPECT_NEAR(m.predict_proba(x), 0.5, 1e-9);
}

TEST(Logistic, SingleClassIsAnError) {
  dac::Dataset data(3, 1, {0, 1, 2}, {1, 1, 1});
  try {
    dac::fit_logistic(data);
    FAIL();
  } catch (const dac::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate labels"), std::string::npos);
  }
}

TEST(Augment, AppendsCurveValues) {
  const dac::FeatureSet s({0}, 2);
  dac::Curve c = dac::Curve::undefined_on(s, dac::Grid{{{0.0, 1.0, 2.0}}});
  c.values = {4.0, 6.0, 8.0};
  c.counts = {1, 1, 1};
  dac::Dataset data(3, 2, {1.0, 9, 0.5, 8, 10.0, 7}, {0, 1, 0}, {"a", "b"});
  const auto out = dac::augment_with_dac(data, c, 0);
  ASSERT_EQ(out.cols(), 3u);
  EXPECT_EQ(out.feature_names().back(), "dac_a");
  EXPECT_EQ(out.column(2), (std::vector<double>{6.0, 5.0, 8.0}));
  EXPECT_EQ(out.column(0), data.column(0));
  EXPECT_EQ(out.column(1), data.column(1));
  EXPECT_EQ(out.targets(), data.targets());
}

TEST(Augment, ConstantCurveGivesConstantColumn) {
  const dac::FeatureSet s({0}, 1);
  dac::Curve c = dac::Curve::undefined_on(s, dac::Grid{{{0.0, 1.0}}});
  c.values = {0.3, 0.3};
  c.counts = {1, 1};
  dac::Dataset data(2, 1, {-5, 5}, {0, 1});
  EXPECT_EQ(dac::augment_with_dac(data, c, 0).column(1), (std::vector<double>{0.3, 0.3}));
}

TEST(FeExperiment, DifferenceIsExactSubtraction) {
  const auto data = dac::read_csv(DAC_DATA_DIR "/monk3.csv");
  dac::FeParams p;
  p.n_trees = 10;
  const auto r = dac::run_fe_experiment(data, p, "monk3");
  EXPECT_EQ(r.difference, r.logit_dac_accuracy - r.logit_accuracy);
  EXPECT_EQ(r.dataset, "monk3");
  for (double a : {r.rf_accuracy, r.logit_accuracy, r.logit_dac_accuracy}) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(FeExperiment, TestLabelsDoNotLeak) {
  const auto data = dac::read_csv(DAC_DATA_DIR "/monk1.csv");
  dac::FeParams p;
  p.seed = 4;
  p.n_trees = 10;
  // The split only depends on the row count and the seed, so the test rows
  // can be identified by splitting the row indices themselves.
  std::vector<double> idx(data.rows());
  std::iota(idx.begin(), idx.end(), 0.0);
  const dac::Dataset ids(data.rows(), 1, idx, std::vector<double>(data.rows(), 0.0));
  const auto test_ids = dac::train_test_split(ids, p.train_fraction, p.seed).second.column(0);
  std::vector<double> y = data.targets();
  std::mt19937_64 gen(77);
  for (double i : test_ids) y[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 2);
  const auto poisoned = data.with_targets(y);

  dac::FeArtifacts a, b;
  dac::run_fe_experiment(data, p, "clean", &a);
  dac::run_fe_experiment(poisoned, p, "poisoned", &b);
  EXPECT_EQ(dac::model_to_string(a.forest), dac::model_to_string(b.forest));
  EXPECT_EQ(a.logit.weights, b.logit.weights);
  EXPECT_EQ(a.logit_dac.weights, b.logit_dac.weights);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve.counts[i], b.curve.counts[i]);
    if (a.curve.defined(i)) {
      EXPECT_EQ(a.curve.values[i], b.curve.values[i]);
    }
  }
}

TEST(FeExperiment, NoisyXorWithMonotoneComponent) {
  // Label = XOR of two binarized features, flipped with probability 0.1,
  // plus a monotone third feature shifting the base rate.
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t n = 1200;
  std::vector<double> x(n * 3), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(gen), b = u(gen), c = u(gen);
    x[i * 3] = a;
    x[i * 3 + 1] = b;
    x[i * 3 + 2] = c;
    bool label = (a > 0.5) != (b > 0.5);
    if (c > 0.8) label = true;
    if (u(gen) < 0.1) label = !label;
    y[i] = label;
  }
  const dac::Dataset data(n, 3, x, y);
  dac::FeParams p;
  p.n_trees = 30;
  std::size_t wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    p.seed = seed;
    const auto r = dac::run_fe_experiment(data, p);
    wins += r.logit_dac_accuracy > r.logit_accuracy;
  }
  EXPECT_GE(wins, 3u);
}

}  // namespace
