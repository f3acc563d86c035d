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

// Two binary symptoms whose XOR is the label. Neither symptom says anything
// alone, so both one-feature curves are flat at 0.5, while the joint curve
// recovers the truth table.

#include <cstdio>
#include <vector>

#include "dac/dac.hpp"

int main() {
  std::vector<double> x, y;
  for (int rep = 0; rep < 100; ++rep)
    for (int fever = 0; fever < 2; ++fever)
      for (int bp = 0; bp < 2; ++bp) {
        x.push_back(fever);
        x.push_back(bp);
        y.push_back(fever != bp ? 1.0 : 0.0);
      }
  const dac::Dataset data(y.size(), 2, x, y, {"fever", "bp"});

  dac::TrainParams params;
  params.n_trees = 50;
  params.max_depth = 2;
  const auto forest = dac::fit_random_forest(data, params, dac::Task::BinaryClassification);

  const dac::DacParams dp;
  for (std::size_t f = 0; f < 2; ++f) {
    const dac::FeatureSet s({f}, 2);
    const auto curve = dac::ensemble_dac_curve(forest, data, s, dac::default_grid(data, s, dp), dp);
    double lo = 1.0, hi = 0.0;
    for (std::size_t c = 0; c < curve.size(); ++c)
      if (curve.defined(c)) {
        lo = std::min(lo, curve.values[c]);
        hi = std::max(hi, curve.values[c]);
      }
    std::printf("%-6s alone: curve in [%.6f, %.6f] over %zu defined cells\n",
                data.feature_names()[f].c_str(), lo, hi, curve.defined_count());
  }

  const dac::FeatureSet both({0, 1}, 2);
  const auto joint =
      dac::ensemble_dac_curve(forest, data, both, dac::default_grid(data, both, dp), dp);
  std::printf("\nfever bp   joint curve\n");
  for (double fever : {0.0, 1.0})
    for (double bp : {0.0, 1.0}) {
      const double pt[2] = {fever, bp};
      std::printf("%5.0f %2.0f   %.4f\n", fever, bp, dac::evaluate_curve(joint, pt));
    }
  return 0;
}
