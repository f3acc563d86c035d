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

#ifndef DAC_DATASET_HPP_
#define DAC_DATASET_HPP_

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dac/common.hpp"

namespace dac {

enum class Task { Regression, BinaryClassification };

inline std::string_view task_name(Task task) {
  return task == Task::Regression ? "regression" : "binary_classification";
}

/// Dense feature matrix (row-major, n x d) with a target vector.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::size_t n_rows, std::size_t n_cols, std::vector<double> x,
          std::vector<double> y, std::vector<std::string> feature_names = {})
      : n_rows_(n_rows),
        n_cols_(n_cols),
        x_(std::move(x)),
        y_(std::move(y)),
        names_(std::move(feature_names)) {
    if (x_.size() != n_rows_ * n_cols_)
      throw InvalidArgument("dataset: feature matrix has " +
                            std::to_string(x_.size()) + " entries, expected " +
                            std::to_string(n_rows_ * n_cols_));
    if (y_.size() != n_rows_)
      throw InvalidArgument("dataset: target has " + std::to_string(y_.size()) +
                            " entries, expected " + std::to_string(n_rows_));
    if (names_.empty()) {
      for (std::size_t j = 0; j < n_cols_; ++j)
        names_.push_back("x" + std::to_string(j));
    }
    if (names_.size() != n_cols_)
      throw InvalidArgument("dataset: expected " + std::to_string(n_cols_) +
                            " feature names, got " +
                            std::to_string(names_.size()));
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]))
        throw DataError("dataset: non-finite feature value at row " +
                        std::to_string(i / n_cols_) + ", column " +
                        std::to_string(i % n_cols_));
    }
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (!std::isfinite(y_[i]))
        throw DataError("dataset: non-finite target at row " +
                        std::to_string(i));
    }
  }

  std::size_t rows() const { return n_rows_; }
  std::size_t cols() const { return n_cols_; }
  bool empty() const { return n_rows_ == 0; }

  double x(std::size_t i, std::size_t j) const { return x_[i * n_cols_ + j]; }
  double y(std::size_t i) const { return y_[i]; }

  std::span<const double> row(std::size_t i) const {
    return {x_.data() + i * n_cols_, n_cols_};
  }
  const std::vector<double>& features() const { return x_; }
  const std::vector<double>& targets() const { return y_; }
  const std::vector<std::string>& feature_names() const { return names_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(n_rows_);
    for (std::size_t i = 0; i < n_rows_; ++i) out[i] = x(i, j);
    return out;
  }

  /// Rows in the given order (duplicates allowed).
  Dataset subset(std::span<const std::size_t> rows) const {
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(rows.size() * n_cols_);
    y.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= n_rows_)
        throw InvalidArgument("dataset: row " + std::to_string(r) +
                              " out of range");
      auto src = row(r);
      x.insert(x.end(), src.begin(), src.end());
      y.push_back(y_[r]);
    }
    return Dataset(rows.size(), n_cols_, std::move(x), std::move(y), names_);
  }

  Dataset with_targets(std::vector<double> y) const {
    return Dataset(n_rows_, n_cols_, x_, std::move(y), names_);
  }

  /// Appends one feature column at the right.
  Dataset with_column(std::span<const double> column, std::string name) const {
    if (column.size() != n_rows_)
      throw InvalidArgument("dataset: appended column has wrong length");
    std::vector<double> x;
    x.reserve(n_rows_ * (n_cols_ + 1));
    for (std::size_t i = 0; i < n_rows_; ++i) {
      auto src = row(i);
      x.insert(x.end(), src.begin(), src.end());
      x.push_back(column[i]);
    }
    auto names = names_;
    names.push_back(std::move(name));
    return Dataset(n_rows_, n_cols_ + 1, std::move(x), y_, std::move(names));
  }

  /// Checks task-specific target constraints.
  void check_task(Task task) const {
    if (task != Task::BinaryClassification) return;
    for (std::size_t i = 0; i < n_rows_; ++i) {
      if (y_[i] != 0.0 && y_[i] != 1.0)
        throw DataError("dataset: classification target at row " +
                        std::to_string(i) + " is " + format_double(y_[i]) +
                        ", expected 0 or 1");
    }
  }

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<std::string> names_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses a header-prefixed CSV. The target is the column named `target`, or
/// the last column when unset. Columns holding any non-numeric field are
/// integer-encoded in order of first appearance.
inline Dataset parse_csv(std::istream& in, const std::string& source,
                         const std::optional<std::string>& target = {}) {
  std::string line;
  if (!std::getline(in, line))
    throw DataError(source + ": empty file, expected a header row");
  const auto header = detail::split_csv_line(line);
  const std::size_t width = header.size();
  if (width < 2)
    throw DataError(source + ": need at least one feature and a target column");

  std::size_t target_col = width - 1;
  if (target) {
    auto it = std::find(header.begin(), header.end(), *target);
    if (it == header.end())
      throw DataError(source + ": target column '" + *target + "' not found");
    target_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<std::string>> cells(width);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != width)
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " fields, got " +
                      std::to_string(fields.size()));
    for (std::size_t c = 0; c < width; ++c) {
      if (fields[c].empty())
        throw DataError(source + ":" + std::to_string(line_no) +
                        ": missing value in column '" + header[c] + "'");
      cells[c].push_back(std::move(fields[c]));
    }
  }
  const std::size_t n = cells[0].size();
  if (n == 0) throw DataError(source + ": no data rows");

  std::vector<std::vector<double>> numeric(width, std::vector<double>(n));
  for (std::size_t c = 0; c < width; ++c) {
    bool all_numeric = true;
    for (std::size_t i = 0; i < n && all_numeric; ++i) {
      auto v = detail::parse_number(cells[c][i]);
      if (v) numeric[c][i] = *v;
      else all_numeric = false;
    }
    if (!all_numeric) {
      std::map<std::string, double> codes;
      for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] = codes.try_emplace(
            cells[c][i], static_cast<double>(codes.size()));
        numeric[c][i] = it->second;
      }
    }
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < width; ++c)
    if (c != target_col) names.push_back(header[c]);
  const std::size_t d = width - 1;
  std::vector<double> x(n * d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == target_col) y[i] = numeric[c][i];
      else x[i * d + j++] = numeric[c][i];
    }
  }
  return Dataset(n, d, std::move(x), std::move(y), std::move(names));
}

inline Dataset read_csv(const std::string& path,
                        const std::optional<std::string>& target = {}) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return parse_csv(in, path, target);
}

}  // namespace dac

#endif  // DAC_DATASET_HPP_
