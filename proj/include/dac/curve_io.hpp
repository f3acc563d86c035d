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

// Curve files. CSV: header `x_<name1>[,x_<name2>...],value,count`, one row per
// grid cell in row-major order, empty `value` for undefined cells. The JSON
// mirror holds the same columns as an array of row objects.

#ifndef DAC_CURVE_IO_HPP_
#define DAC_CURVE_IO_HPP_

#include <sstream>
#include <string>
#include <vector>

#include "dac/attribution.hpp"
#include "dac/common.hpp"
#include "json.hpp"

namespace dac {

inline std::vector<std::string> curve_columns(const Curve& curve,
                                              const std::vector<std::string>& names) {
  std::vector<std::string> cols;
  for (std::size_t f : curve.features.indices()) {
    if (f >= names.size()) throw InvalidArgument("curve feature has no name");
    cols.push_back("x_" + names[f]);
  }
  return cols;
}

inline std::string curve_to_csv(const Curve& curve,
                                const std::vector<std::string>& names) {
  std::ostringstream out;
  for (const auto& c : curve_columns(curve, names)) out << c << ',';
  out << "value,count\n";
  for (std::size_t cell = 0; cell < curve.size(); ++cell) {
    for (double x : curve.grid.coordinates(cell)) out << format_double(x) << ',';
    if (curve.defined(cell)) out << format_double(curve.values[cell]);
    out << ',' << format_double(curve.counts[cell]) << '\n';
  }
  return out.str();
}

inline std::string curve_to_json(const Curve& curve,
                                 const std::vector<std::string>& names) {
  using nlohmann::json;
  const auto cols = curve_columns(curve, names);
  json rows = json::array();
  for (std::size_t cell = 0; cell < curve.size(); ++cell) {
    json row;
    const auto x = curve.grid.coordinates(cell);
    for (std::size_t a = 0; a < cols.size(); ++a) row[cols[a]] = x[a];
    row["value"] = curve.defined(cell) ? json(curve.values[cell]) : json(nullptr);
    row["count"] = curve.counts[cell];
    rows.push_back(std::move(row));
  }
  json out;
  out["columns"] = cols;
  out["rows"] = std::move(rows);
  return out.dump() + "\n";
}

}  // namespace dac

#endif  // DAC_CURVE_IO_HPP_
