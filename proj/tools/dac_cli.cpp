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

// Command-line front end. Exit status: 0 success, 1 usage error, 2 data or
// model error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dac/dac.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Usage problems detected after parsing (bad list syntax, out-of-range
// indices). Messages name the offending flag.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::uint64_t parse_u64(const std::string& text, const std::string& flag) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(flag + ": '" + text + "' is not a nonnegative integer");
  }
}

// Feature list given as 0-based indices or column names.
std::vector<std::size_t> parse_features(const std::string& text,
                                        const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    auto it = std::find(names.begin(), names.end(), item);
    std::size_t f = 0;
    if (it != names.end()) {
      f = static_cast<std::size_t>(it - names.begin());
    } else {
      f = parse_u64(item, "--features");
      if (f >= names.size())
        throw UsageError("--features: index " + item + " out of range (model has " +
                         std::to_string(names.size()) + " features)");
    }
    out.push_back(f);
  }
  if (out.empty()) throw UsageError("--features: empty list");
  std::vector<std::size_t> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw UsageError("--features: duplicate feature");
  return sorted;
}

dac::Regime parse_regime(const std::string& s) {
  if (s == "iid") return dac::Regime::IID;
  if (s == "corr") return dac::Regime::Correlated;
  if (s == "high") return dac::Regime::HighlyCorrelated;
  throw UsageError("--regime: unknown regime '" + s + "' (expected iid, corr or high)");
}

dac::ModelKind parse_model_kind(const std::string& s) {
  if (s == "rf") return dac::ModelKind::RandomForest;
  if (s == "adaboost") return dac::ModelKind::AdaBoostR2;
  throw UsageError("--model-kind: unknown model '" + s + "' (expected rf or adaboost)");
}

void check_output_path(const std::string& path, const std::string& flag) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw UsageError(flag + ": directory '" + parent.string() + "' does not exist");
}

void check_input_path(const std::string& path, const std::string& flag) {
  if (!std::filesystem::is_regular_file(path))
    throw dac::DataError(flag + ": cannot read '" + path + "'");
}

void emit(const std::optional<std::string>& out, const std::string& content) {
  if (out)
    dac::write_file_atomic(*out, content);
  else
    std::cout << content;
}

// Loads the model and its training data and checks they agree.
struct Bound {
  dac::Ensemble model;
  dac::Dataset data;
};

Bound load_bound(const std::string& model_path, const std::string& data_path,
                 const std::optional<std::string>& target) {
  check_input_path(model_path, "--model");
  check_input_path(data_path, "--data");
  Bound b{dac::load_model(model_path), dac::read_csv(data_path, target)};
  if (b.data.cols() != b.model.n_features)
    throw dac::DataError(data_path + ": has " + std::to_string(b.data.cols()) +
                         " feature columns, model '" + model_path + "' expects " +
                         std::to_string(b.model.n_features));
  dac::bind_dataset(b.model, b.data);
  return b;
}

struct CurveOptions {
  std::string model;
  std::string data;
  std::string features;
  std::optional<std::string> target;
  double k = 1.0;
  std::size_t grid = 100;
  bool json = false;
  std::optional<std::string> out;
};

void add_curve_options(CLI::App* cmd, CurveOptions& o, bool with_k) {
  cmd->add_option("--model", o.model, "Model JSON")->required();
  cmd->add_option("--data", o.data, "Training data CSV")->required();
  cmd->add_option("--target", o.target, "Target column name (default: last column)");
  cmd->add_option("--features", o.features, "Feature indices or names, e.g. 0 or 0,1")
      ->required();
  if (with_k)
    cmd->add_option("--k", o.k, "Interval half-width in standard deviations")
        ->check(CLI::NonNegativeNumber);
  cmd->add_option("--grid", o.grid, "Grid points per feature")->check(CLI::Range(2, 100000));
  cmd->add_flag("--json", o.json,
                "Also write a JSON mirror next to --out (JSON only on standard output)");
  cmd->add_option("--out", o.out, "Output file (default: standard output)");
}

// out.csv -> out.json; a path without a .csv extension gets ".json" appended.
std::string json_mirror_path(const std::string& out) {
  std::filesystem::path p(out);
  if (p.extension() == ".csv") return p.replace_extension(".json").string();
  return out + ".json";
}

int run_curve(const CurveOptions& o, bool is_dac) {
  if (o.out) check_output_path(*o.out, "--out");
  auto b = load_bound(o.model, o.data, o.target);
  const dac::FeatureSet s(parse_features(o.features, b.model.feature_names),
                          b.model.n_features);
  dac::DacParams params;
  params.k = o.k;
  params.grid_points_per_dim = o.grid;
  const dac::Grid grid = dac::default_grid(b.data, s, params);
  const dac::Curve curve = is_dac ? dac::ensemble_dac_curve(b.model, b.data, s, grid, params)
                                  : dac::pdp_curve(b.model, b.data, s, grid);
  const auto& names = b.model.feature_names;
  if (!o.out) {
    std::cout << (o.json ? dac::curve_to_json(curve, names) : dac::curve_to_csv(curve, names));
    return 0;
  }
  dac::write_file_atomic(*o.out, dac::curve_to_csv(curve, names));
  if (o.json) dac::write_file_atomic(json_mirror_path(*o.out), dac::curve_to_json(curve, names));
  return 0;
}

std::string sim_row(const std::string& function, const std::string& regime,
                    const std::string& model, const std::string& feature, double dac_mse,
                    double pdp_mse, std::size_t n_train, std::size_t n_test,
                    const std::string& seed) {
  return function + ',' + regime + ',' + model + ',' + feature + ',' +
         dac::format_double(dac_mse) + ',' + dac::format_double(pdp_mse) + ',' +
         std::to_string(n_train) + ',' + std::to_string(n_test) + ',' + seed + '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disentangled attribution curves for tree ensembles"};
  app.require_subcommand(1);

  // train
  std::string train_data, train_task, train_out;
  std::optional<std::string> train_target;
  int train_trees = 50;
  std::uint64_t train_seed = 0;
  std::optional<int> train_depth, train_leaf;
  bool train_adaboost = false;
  auto* train = app.add_subcommand("train", "Fit a forest (or AdaBoost.R2) and save it");
  train->add_option("--data", train_data, "Training CSV")->required();
  train->add_option("--target", train_target, "Target column name (default: last column)");
  train->add_option("--task", train_task, "reg or cls")
      ->required()
      ->check(CLI::IsMember({"reg", "cls"}));
  train->add_option("--model-out", train_out, "Model JSON to write")->required();
  train->add_option("--trees", train_trees, "Number of trees")->check(CLI::PositiveNumber);
  train->add_option("--seed", train_seed, "Random seed");
  train->add_option("--max-depth", train_depth, "Maximum tree depth")
      ->check(CLI::PositiveNumber);
  train->add_option("--min-samples-leaf", train_leaf, "Minimum rows per leaf")
      ->check(CLI::PositiveNumber);
  train->add_flag("--adaboost", train_adaboost, "Fit AdaBoost.R2 (regression only)");

  // predict
  std::string pred_model, pred_data;
  std::optional<std::string> pred_target, pred_out;
  auto* predict = app.add_subcommand("predict", "Predict every row of a CSV");
  predict->add_option("--model", pred_model, "Model JSON")->required();
  predict->add_option("--data", pred_data, "CSV in the training layout")->required();
  predict->add_option("--target", pred_target, "Target column name (default: last column)");
  predict->add_option("--out", pred_out, "Output CSV (default: standard output)");

  CurveOptions dac_opts, pdp_opts;
  auto* dac_cmd = app.add_subcommand("dac", "Attribution curve for one or two features");
  add_curve_options(dac_cmd, dac_opts, true);
  auto* pdp_cmd = app.add_subcommand("pdp", "Partial dependence curve");
  add_curve_options(pdp_cmd, pdp_opts, false);

  // importance
  std::string imp_model, imp_data;
  std::optional<std::string> imp_target, imp_out;
  auto* importance = app.add_subcommand("importance", "Mean decrease in impurity");
  importance->add_option("--model", imp_model, "Model JSON")->required();
  importance->add_option("--data", imp_data, "Training CSV")->required();
  importance->add_option("--target", imp_target, "Target column name (default: last column)");
  importance->add_option("--out", imp_out, "Output CSV (default: standard output)");

  // simulate
  std::string sim_functions = "1,2,3,4,5,6,7,8,9,10", sim_regimes = "iid,corr,high",
              sim_models = "rf", sim_seeds = "0";
  std::optional<std::string> sim_out;
  std::size_t sim_train = 5000, sim_test = 200000;
  int sim_trees = 20;
  auto* simulate = app.add_subcommand("simulate", "Synthetic curve-accuracy benchmark");
  simulate->add_option("--function", sim_functions, "Function ids 1..10, comma separated");
  simulate->add_option("--regime", sim_regimes, "iid, corr, high, comma separated");
  simulate->add_option("--model-kind", sim_models, "rf, adaboost, comma separated");
  simulate->add_option("--seed", sim_seeds, "Seeds, comma separated");
  simulate->add_option("--n-train", sim_train, "Training rows")->check(CLI::PositiveNumber);
  simulate->add_option("--n-test", sim_test, "Test rows")->check(CLI::PositiveNumber);
  simulate->add_option("--trees", sim_trees, "Trees per model")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_out, "Output CSV (default: standard output)");

  // fe-experiment
  std::vector<std::string> fe_data;
  std::optional<std::string> fe_target, fe_out;
  std::string fe_seeds = "0";
  int fe_trees = 50;
  auto* fe = app.add_subcommand("fe-experiment",
                                "Logistic regression with and without a curve feature");
  fe->add_option("--data", fe_data, "Classification CSV (repeatable)")->required();
  fe->add_option("--target", fe_target, "Target column name (default: last column)");
  fe->add_option("--seed", fe_seeds, "Seeds, comma separated");
  fe->add_option("--trees", fe_trees, "Forest size")->check(CLI::PositiveNumber);
  fe->add_option("--out", fe_out, "Output CSV (default: standard output)");

  // export-grid
  std::string grid_data, grid_features;
  std::optional<std::string> grid_target, grid_out;
  std::size_t grid_points = 100;
  auto* export_grid = app.add_subcommand("export-grid", "Write the default evaluation grid");
  export_grid->add_option("--data", grid_data, "Training CSV")->required();
  export_grid->add_option("--target", grid_target, "Target column name (default: last column)");
  export_grid->add_option("--features", grid_features, "Feature indices or names")
      ->required();
  export_grid->add_option("--grid", grid_points, "Grid points per feature")
      ->check(CLI::Range(2, 100000));
  export_grid->add_option("--out", grid_out, "Output CSV (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) {
      if (train_adaboost && train_task != "reg")
        throw UsageError("--adaboost: requires --task reg");
      check_output_path(train_out, "--model-out");
      check_input_path(train_data, "--data");
      const dac::Dataset data = dac::read_csv(train_data, train_target);
      const auto task =
          train_task == "reg" ? dac::Task::Regression : dac::Task::BinaryClassification;
      try {
        data.check_task(task);
      } catch (const dac::DataError& e) {
        throw dac::DataError(train_data + ": " + e.what());
      }
      dac::TrainParams params;
      params.n_trees = train_trees;
      params.seed = train_seed;
      params.max_depth = train_depth;
      params.min_samples_leaf = train_leaf;
      dac::Ensemble model;
      model = train_adaboost ? dac::fit_adaboost_r2(data, params)
                             : dac::fit_random_forest(data, params, task);
      dac::save_model(model, train_out);
    } else if (*predict) {
      if (pred_out) check_output_path(*pred_out, "--out");
      check_input_path(pred_model, "--model");
      check_input_path(pred_data, "--data");
      const dac::Ensemble model = dac::load_model(pred_model);
      const dac::Dataset data = dac::read_csv(pred_data, pred_target);
      if (data.cols() != model.n_features)
        throw dac::DataError(pred_data + ": has " + std::to_string(data.cols()) +
                             " feature columns, model expects " +
                             std::to_string(model.n_features));
      std::string text = "prediction\n";
      for (double p : model.predict(data)) text += dac::format_double(p) + '\n';
      emit(pred_out, text);
    } else if (*dac_cmd) {
      return run_curve(dac_opts, true);
    } else if (*pdp_cmd) {
      return run_curve(pdp_opts, false);
    } else if (*importance) {
      if (imp_out) check_output_path(*imp_out, "--out");
      const auto b = load_bound(imp_model, imp_data, imp_target);
      const auto gini = dac::gini_importance(b.model, b.data);
      std::string text = "feature,importance\n";
      for (std::size_t j = 0; j < gini.size(); ++j)
        text += b.model.feature_names[j] + ',' + dac::format_double(gini[j]) + '\n';
      emit(imp_out, text);
    } else if (*simulate) {
      if (sim_out) check_output_path(*sim_out, "--out");
      std::vector<int> functions;
      for (const auto& f : split_list(sim_functions)) {
        const auto id = parse_u64(f, "--function");
        if (id < 1 || id > static_cast<std::uint64_t>(dac::kSimFunctionCount))
          throw UsageError("--function: id " + f + " outside 1..10");
        functions.push_back(static_cast<int>(id));
      }
      std::vector<dac::Regime> regimes;
      for (const auto& r : split_list(sim_regimes)) regimes.push_back(parse_regime(r));
      std::vector<dac::ModelKind> kinds;
      for (const auto& m : split_list(sim_models)) kinds.push_back(parse_model_kind(m));
      std::vector<std::uint64_t> seeds;
      for (const auto& s : split_list(sim_seeds)) seeds.push_back(parse_u64(s, "--seed"));
      if (functions.empty() || regimes.empty() || kinds.empty() || seeds.empty())
        throw UsageError("simulate: empty --function, --regime, --model-kind or --seed list");

      std::string text = "function,regime,model,feature,dac_mse,pdp_mse,n_train,n_test,seed\n";
      std::string summary;
      for (auto kind : kinds) {
        for (auto regime : regimes) {
          std::vector<double> dac_all, pdp_all;
          const std::string rname(dac::regime_name(regime)), mname(dac::model_kind_name(kind));
          for (auto seed : seeds) {
            for (int f : functions) {
              dac::SimConfig config;
              config.function_id = f;
              config.regime = regime;
              config.model_kind = kind;
              config.n_train = sim_train;
              config.n_test = sim_test;
              config.n_trees = sim_trees;
              config.seed = seed;
              const auto result = dac::run_sim_experiment(config);
              for (const auto& score : result.scores) {
                text += sim_row("F" + std::to_string(f), rname, mname,
                                "x" + std::to_string(score.feature + 1), score.dac_mse,
                                score.pdp_mse, sim_train, sim_test, std::to_string(seed));
                dac_all.push_back(score.dac_mse);
                pdp_all.push_back(score.pdp_mse);
              }
            }
          }
          // Table-style summary: mean and standard error over every
          // (function, feature, seed) entry of this row.
          const auto d = dac::mean_sem(dac_all), p = dac::mean_sem(pdp_all);
          summary += sim_row("mean", rname, mname, "all", d.mean, p.mean, sim_train, sim_test,
                             "all");
          summary += sim_row("sem", rname, mname, "all", d.sem, p.sem, sim_train, sim_test,
                             "all");
        }
      }
      emit(sim_out, text + summary);
    } else if (*fe) {
      if (fe_out) check_output_path(*fe_out, "--out");
      std::vector<std::uint64_t> seeds;
      for (const auto& s : split_list(fe_seeds)) seeds.push_back(parse_u64(s, "--seed"));
      if (seeds.empty()) throw UsageError("--seed: empty list");
      // One row per dataset; with several seeds the accuracies are averaged.
      std::string text = "dataset,rf_acc,logit_acc,logit_dac_acc,difference\n";
      for (const auto& path : fe_data) {
        check_input_path(path, "--data");
        const dac::Dataset data = dac::read_csv(path, fe_target);
        const std::string name = std::filesystem::path(path).stem().string();
        double rf = 0.0, logit = 0.0, logit_dac = 0.0;
        for (auto seed : seeds) {
          dac::FeParams params;
          params.seed = seed;
          params.n_trees = fe_trees;
          const auto r = dac::run_fe_experiment(data, params, name);
          rf += r.rf_accuracy;
          logit += r.logit_accuracy;
          logit_dac += r.logit_dac_accuracy;
        }
        const double m = static_cast<double>(seeds.size());
        rf /= m;
        logit /= m;
        logit_dac /= m;
        text += name + ',' + dac::format_double(rf) + ',' + dac::format_double(logit) + ',' +
                dac::format_double(logit_dac) + ',' + dac::format_double(logit_dac - logit) +
                '\n';
      }
      emit(fe_out, text);
    } else if (*export_grid) {
      if (grid_out) check_output_path(*grid_out, "--out");
      check_input_path(grid_data, "--data");
      const dac::Dataset data = dac::read_csv(grid_data, grid_target);
      const dac::FeatureSet s(parse_features(grid_features, data.feature_names()), data.cols());
      dac::DacParams params;
      params.grid_points_per_dim = grid_points;
      const dac::Grid grid = dac::default_grid(data, s, params);
      std::string text;
      for (std::size_t a = 0; a < s.size(); ++a)
        text += (a ? ",x_" : "x_") + data.feature_names()[s[a]];
      text += '\n';
      for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
        const auto x = grid.coordinates(cell);
        for (std::size_t a = 0; a < x.size(); ++a)
          text += (a ? "," : "") + dac::format_double(x[a]);
        text += '\n';
      }
      emit(grid_out, text);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const dac::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
