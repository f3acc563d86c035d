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

// Portable JSON model format (schema_version 1). Keys are written sorted and
// numbers in shortest round-trip form, so save -> load -> save is
// byte-identical.
//
//   {"feature_names": [...], "n_features": d, "schema_version": 1,
//    "task": "regression" | "binary_classification",
//    "trees": [{"nodes": [{"feature": int or -1, "left": int or -1,
//                          "n_samples": int, "right": int or -1,
//                          "sample_indices": [int, ...] or null,
//                          "threshold": real or null, "value": real}]}],
//    "weights": [...]}

#ifndef DAC_MODEL_IO_HPP_
#define DAC_MODEL_IO_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dac/common.hpp"
#include "dac/dataset.hpp"
#include "dac/ensemble.hpp"
#include "json.hpp"

namespace dac {

inline constexpr int kModelSchemaVersion = 1;

inline nlohmann::json model_to_json(const Ensemble& model) {
  using nlohmann::json;
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& nd : tree.nodes) {
      json j;
      j["feature"] = nd.feature;
      j["threshold"] = nd.is_leaf() ? json(nullptr) : json(nd.threshold);
      j["left"] = nd.left;
      j["right"] = nd.right;
      j["value"] = nd.value;
      j["n_samples"] = nd.n_samples;
      j["sample_indices"] = (nd.is_leaf() && nd.sample_indices)
                                ? json(*nd.sample_indices)
                                : json(nullptr);
      nodes.push_back(std::move(j));
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  json out;
  out["schema_version"] = kModelSchemaVersion;
  out["task"] = std::string(task_name(model.task));
  out["n_features"] = model.n_features;
  out["feature_names"] = model.feature_names;
  out["weights"] = model.weights;
  out["trees"] = std::move(trees);
  return out;
}

inline std::string model_to_string(const Ensemble& model) {
  return model_to_json(model).dump() + "\n";
}

inline Ensemble model_from_json(const nlohmann::json& j,
                                const std::string& source = "model") {
  using nlohmann::json;
  auto fail = [&](const std::string& msg) -> DataError {
    return DataError(source + ": " + msg);
  };
  try {
    if (!j.is_object()) throw fail("top-level value is not an object");
    if (!j.contains("schema_version"))
      throw fail("missing schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw fail("schema_version " + std::to_string(version) +
                 " is not supported (expected " +
                 std::to_string(kModelSchemaVersion) + ")");

    Ensemble model;
    const auto task = j.at("task").get<std::string>();
    if (task == "regression") model.task = Task::Regression;
    else if (task == "binary_classification") model.task = Task::BinaryClassification;
    else throw fail("unknown task '" + task + "'");
    model.n_features = j.at("n_features").get<std::size_t>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.weights = j.at("weights").get<std::vector<double>>();

    const auto& trees = j.at("trees");
    for (std::size_t t = 0; t < trees.size(); ++t) {
      DecisionTree tree;
      const auto& nodes = trees[t].at("nodes");
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& jn = nodes[i];
        const std::string where =
            "tree " + std::to_string(t) + " node " + std::to_string(i);
        TreeNode nd;
        nd.feature = jn.at("feature").get<int>();
        nd.left = jn.at("left").get<int>();
        nd.right = jn.at("right").get<int>();
        nd.value = jn.at("value").get<double>();
        nd.n_samples = jn.value("n_samples", std::int64_t{0});
        if (nd.feature < -1) throw fail(where + ": invalid feature index");
        const auto& thr = jn.at("threshold");
        if (nd.is_leaf()) {
          nd.threshold = 0.0;
        } else {
          if (thr.is_null()) throw fail(where + ": internal node without threshold");
          nd.threshold = thr.get<double>();
        }
        if (jn.contains("sample_indices") && !jn.at("sample_indices").is_null()) {
          if (!nd.is_leaf())
            throw fail(where + ": sample_indices on an internal node");
          nd.sample_indices = jn.at("sample_indices").get<std::vector<std::size_t>>();
        }
        tree.nodes.push_back(std::move(nd));
      }
      model.trees.push_back(std::move(tree));
    }
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw fail(std::string("malformed model JSON: ") + e.what());
  } catch (const DataError& e) {
    const std::string what = e.what();
    if (what.rfind(source + ":", 0) == 0) throw;
    throw fail(what);
  }
}

/// Writes `content` to `path` via a temporary file and rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << content;
    if (!out) throw DataError(path + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError(path + ": rename failed: " + ec.message());
}

inline void save_model(const Ensemble& model, const std::string& path) {
  write_file_atomic(path, model_to_string(model));
}

inline Ensemble load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open model file");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed model JSON: " + e.what());
  }
  return model_from_json(j, path);
}

/// Connects a loaded model to its training data: leaves without
/// sample_indices get them by routing `data`; recorded indices are checked
/// against the data size; leaf values that differ from the mean target of
/// their rows by more than 1e-6 produce a warning (imported models may
/// carry bootstrap statistics). Returns the warnings issued.
inline std::vector<std::string> bind_dataset(Ensemble& model, const Dataset& data) {
  if (data.cols() != model.n_features)
    throw DataError("dataset has " + std::to_string(data.cols()) +
                    " features, model expects " + std::to_string(model.n_features));
  std::vector<std::string> warnings;
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    auto& tree = model.trees[t];
    bool missing = false;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& nd = tree.nodes[i];
      if (!nd.is_leaf()) continue;
      if (!nd.sample_indices) {
        missing = true;
        continue;
      }
      for (std::size_t r : *nd.sample_indices)
        if (r >= data.rows())
          throw DataError("tree " + std::to_string(t) + " node " +
                          std::to_string(i) + ": sample index " +
                          std::to_string(r) + " out of range (dataset has " +
                          std::to_string(data.rows()) + " rows)");
    }
    if (missing) route_dataset(tree, data, /*refresh_values=*/false);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& nd = tree.nodes[i];
      if (!nd.is_leaf() || nd.sample_indices->empty()) continue;
      ExactSum sum;
      for (std::size_t r : *nd.sample_indices) sum.add(data.y(r));
      const double mean = sum.value() / static_cast<double>(nd.sample_indices->size());
      if (std::fabs(mean - nd.value) > 1e-6) {
        warnings.push_back("tree " + std::to_string(t) + " node " +
                           std::to_string(i) + ": leaf value " +
                           format_double(nd.value) + " differs from mean target " +
                           format_double(mean) + " of its rows");
      }
    }
  }
  if (!warnings.empty()) {
    warn(warnings.front() +
         (warnings.size() > 1
              ? " (and " + std::to_string(warnings.size() - 1) + " more leaves)"
              : std::string()));
  }
  return warnings;
}

}  // namespace dac

#endif  // DAC_MODEL_IO_HPP_
