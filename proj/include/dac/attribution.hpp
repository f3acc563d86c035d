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

// Disentangled attribution curves for tree ensembles.
//
// For a feature set S, every leaf of a tree is re-evaluated using only the
// rules on its path that test features in S. The training rows passing those
// rules are trimmed to the box mu +/- k*sigma (per feature in S, statistics
// taken before trimming), and the survivors give the leaf's attribution
// (mean target) and weight (row count). A tree's curve at a grid cell is the
// count-weighted mean over leaves whose box mu +/- k*sigma (statistics after
// trimming) contains the cell; an ensemble's curve is the weighted mean of
// its trees' curves over the trees that cover the cell.
//
// Sums over training rows run in a canonical row order, so curves do not
// depend on the order of rows in the dataset.

#ifndef DAC_ATTRIBUTION_HPP_
#define DAC_ATTRIBUTION_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dac/common.hpp"
#include "dac/dataset.hpp"
#include "dac/ensemble.hpp"
#include "dac/tree.hpp"

namespace dac {

/// Ordered set of distinct feature indices, strictly increasing.
class FeatureSet {
 public:
  FeatureSet() = default;

  FeatureSet(std::vector<std::size_t> indices, std::size_t n_features)
      : indices_(std::move(indices)) {
    if (indices_.empty()) throw InvalidArgument("feature set is empty");
    if (indices_.size() > n_features)
      throw InvalidArgument("feature set larger than the number of features");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] >= n_features)
        throw InvalidArgument("feature " + std::to_string(indices_[i]) +
                              " out of range (" + std::to_string(n_features) +
                              " features)");
      if (i > 0 && indices_[i] <= indices_[i - 1])
        throw InvalidArgument("feature set must be strictly increasing");
    }
  }

  std::size_t size() const { return indices_.size(); }
  std::size_t operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<std::size_t>& indices() const { return indices_; }

  /// Position of feature f within the set.
  std::optional<std::size_t> position(std::size_t f) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), f);
    if (it == indices_.end() || *it != f) return std::nullopt;
    return static_cast<std::size_t>(it - indices_.begin());
  }

  bool operator==(const FeatureSet&) const = default;

 private:
  std::vector<std::size_t> indices_;
};

struct DacParams {
  double k = 1.0;  // smoothing multiplier on sigma
  std::size_t grid_points_per_dim = 100;

  void validate() const {
    if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArgument("k must be >= 0");
    if (grid_points_per_dim < 2)
      throw InvalidArgument("grid_points_per_dim must be >= 2");
  }
};

/// Cartesian product of per-feature axes. Cells are numbered row-major: the
/// last axis varies fastest.
struct Grid {
  std::vector<std::vector<double>> axes;

  std::size_t dims() const { return axes.size(); }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return axes.empty() ? 0 : n;
  }

  std::vector<std::size_t> unflatten(std::size_t cell) const {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      idx[a] = cell % axes[a].size();
      cell /= axes[a].size();
    }
    return idx;
  }

  std::size_t flatten(std::span<const std::size_t> idx) const {
    std::size_t cell = 0;
    for (std::size_t a = 0; a < axes.size(); ++a) cell = cell * axes[a].size() + idx[a];
    return cell;
  }

  std::vector<double> coordinates(std::size_t cell) const {
    auto idx = unflatten(cell);
    std::vector<double> out(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) out[a] = axes[a][idx[a]];
    return out;
  }

  void validate() const {
    if (axes.empty()) throw InvalidArgument("grid has no axes");
    for (const auto& a : axes) {
      if (a.empty()) throw InvalidArgument("grid axis is empty");
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i])) throw InvalidArgument("grid axis is not finite");
        if (i > 0 && !(a[i] > a[i - 1]))
          throw InvalidArgument("grid axis must be strictly increasing");
      }
    }
  }

  bool operator==(const Grid&) const = default;
};

/// Per feature in S, grid_points_per_dim evenly spaced points from the
/// feature's minimum to its maximum. A constant feature gets a single point.
inline Grid default_grid(const Dataset& data, const FeatureSet& features,
                         const DacParams& params) {
  if (data.empty()) throw InvalidArgument("default_grid: empty dataset");
  params.validate();
  Grid grid;
  for (std::size_t f : features.indices()) {
    if (f >= data.cols()) throw InvalidArgument("default_grid: feature out of range");
    double lo = data.x(0, f), hi = lo;
    for (std::size_t i = 1; i < data.rows(); ++i) {
      lo = std::min(lo, data.x(i, f));
      hi = std::max(hi, data.x(i, f));
    }
    std::vector<double> axis;
    if (lo == hi) {
      warn("feature '" + data.feature_names()[f] +
           "' is constant; using a single grid point");
      axis.push_back(lo);
    } else {
      const std::size_t m = params.grid_points_per_dim;
      axis.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(m - 1);
        axis[i] = lo + (hi - lo) * t;
      }
      axis.back() = hi;
    }
    grid.axes.push_back(std::move(axis));
  }
  return grid;
}

/// Grid-valued curve. A cell is defined exactly when its count is positive;
/// undefined cells hold NaN.
struct Curve {
  FeatureSet features;
  Grid grid;
  std::vector<double> values;
  std::vector<double> counts;

  static Curve undefined_on(FeatureSet features, Grid grid) {
    Curve c{std::move(features), std::move(grid), {}, {}};
    c.values.assign(c.grid.cell_count(), std::numeric_limits<double>::quiet_NaN());
    c.counts.assign(c.grid.cell_count(), 0.0);
    return c;
  }

  std::size_t size() const { return values.size(); }
  bool defined(std::size_t cell) const { return counts[cell] > 0.0; }
  std::size_t defined_count() const {
    return static_cast<std::size_t>(
        std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }));
  }
};

using DacCurve = Curve;

/// Boundary slack for the closed-box tests |x - center| <= half. Two-point
/// sets put both points at exactly one standard deviation from their mean,
/// so the comparison needs room for rounding in mean and sigma.
inline constexpr double kBoundarySlack = 1e-9;

inline bool within_box(double x, double center, double half) {
  return std::fabs(x - center) <= half + kBoundarySlack * (std::fabs(center) + half);
}

struct LeafSummary {
  int leaf_id = -1;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::size_t count = 0;
  double mean_y = 0.0;
  // Per feature in S: [mu - k sigma, mu + k sigma].
  std::vector<std::pair<double, double>> interval;
  double k = 1.0;

  /// Whether grid coordinates `x` (one per feature in S) fall inside the
  /// closed accumulation box.
  bool covers(std::span<const double> x) const {
    for (std::size_t j = 0; j < mu.size(); ++j)
      if (!within_box(x[j], mu[j], k * sigma[j])) return false;
    return true;
  }
};

namespace detail {

// Rows passing a set of S-rules form an axis-aligned box:
// lo[j] <= x < hi[j] for every position j in S.
struct RuleBox {
  std::vector<double> lo;
  std::vector<double> hi;
  auto operator<=>(const RuleBox&) const = default;
};

inline RuleBox rule_box(std::span<const SplitRule> rules, const FeatureSet& s) {
  RuleBox box{std::vector<double>(s.size(), -std::numeric_limits<double>::infinity()),
              std::vector<double>(s.size(), std::numeric_limits<double>::infinity())};
  for (const auto& r : rules) {
    auto pos = s.position(r.feature);
    if (!pos) continue;
    if (r.direction == Direction::GE) box.lo[*pos] = std::max(box.lo[*pos], r.threshold);
    else box.hi[*pos] = std::min(box.hi[*pos], r.threshold);
  }
  return box;
}

struct BoxStats {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::size_t count = 0;
  double mean_y = 0.0;
};

// The S-columns and targets of a dataset in a canonical row order: sorted
// by (x_S..., y). Sums taken in this order depend only on the multiset of
// rows, not on their order in the dataset.
struct SortedRows {
  std::vector<std::vector<double>> x;  // x[j][pos] for position j in S
  std::vector<double> y;

  SortedRows(const Dataset& data, const FeatureSet& s) {
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      for (std::size_t f : s.indices()) {
        const double xa = data.x(a, f), xb = data.x(b, f);
        if (xa != xb) return xa < xb;
      }
      return data.y(a) < data.y(b);
    });
    x.assign(s.size(), std::vector<double>(order.size()));
    y.resize(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      for (std::size_t j = 0; j < s.size(); ++j) x[j][pos] = data.x(order[pos], s[j]);
      y[pos] = data.y(order[pos]);
    }
  }

  std::size_t size() const { return y.size(); }
  std::size_t dims() const { return x.size(); }
};

// Mean and population standard deviation of each S-column over `rows`
// (positions into the sorted view, ascending).
inline void column_moments(const SortedRows& view, std::span<const std::size_t> rows,
                           std::vector<double>& mu, std::vector<double>& sigma) {
  const std::size_t dims = view.dims();
  const double m = static_cast<double>(rows.size());
  mu.assign(dims, 0.0);
  sigma.assign(dims, 0.0);
  if (rows.empty()) return;
  for (std::size_t j = 0; j < dims; ++j) {
    const auto& col = view.x[j];
    double sum = 0.0;
    for (std::size_t r : rows) sum += col[r];
    mu[j] = sum / m;
    if (rows.size() > 1) {
      double sq = 0.0;
      for (std::size_t r : rows) {
        const double dev = col[r] - mu[j];
        sq += dev * dev;
      }
      sigma[j] = std::sqrt(sq / m);
    }
  }
}

inline BoxStats summarize_box(const SortedRows& view, const RuleBox& box, double k) {
  const std::size_t dims = view.dims();
  // Rows are sorted on the first S-column, so its rules select a range.
  const auto& first = view.x[0];
  const auto begin = static_cast<std::size_t>(
      std::lower_bound(first.begin(), first.end(), box.lo[0]) - first.begin());
  const auto end = static_cast<std::size_t>(
      std::lower_bound(first.begin() + begin, first.end(), box.hi[0]) - first.begin());
  std::vector<std::size_t> members;
  members.reserve(end - begin);
  for (std::size_t pos = begin; pos < end; ++pos) {
    bool in = true;
    for (std::size_t j = 1; j < dims && in; ++j) {
      const double v = view.x[j][pos];
      in = v >= box.lo[j] && v < box.hi[j];
    }
    if (in) members.push_back(pos);
  }

  BoxStats out;
  std::vector<double> mu, sigma;
  column_moments(view, members, mu, sigma);

  // Single trimming pass with the pre-trim statistics.
  std::vector<std::size_t> kept;
  kept.reserve(members.size());
  for (std::size_t pos : members) {
    bool keep = true;
    for (std::size_t j = 0; j < dims && keep; ++j)
      keep = within_box(view.x[j][pos], mu[j], k * sigma[j]);
    if (keep) kept.push_back(pos);
  }

  column_moments(view, kept, out.mu, out.sigma);
  out.count = kept.size();
  if (!kept.empty()) {
    double ys = 0.0;
    for (std::size_t pos : kept) ys += view.y[pos];
    out.mean_y = ys / static_cast<double>(kept.size());
  }
  return out;
}

inline LeafSummary to_summary(int leaf, const BoxStats& st, double k) {
  LeafSummary out;
  out.leaf_id = leaf;
  out.mu = st.mu;
  out.sigma = st.sigma;
  out.count = st.count;
  out.mean_y = st.mean_y;
  out.k = k;
  for (std::size_t j = 0; j < st.mu.size(); ++j)
    out.interval.emplace_back(st.mu[j] - k * st.sigma[j], st.mu[j] + k * st.sigma[j]);
  return out;
}

inline void check_inputs(const DecisionTree& tree, const Dataset& data,
                         const FeatureSet& s, double k) {
  if (s.size() == 0) throw InvalidArgument("feature set is empty");
  for (std::size_t f : s.indices())
    if (f >= data.cols()) throw InvalidArgument("feature set exceeds dataset width");
  if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArgument("k must be >= 0");
  if (tree.nodes.empty()) throw InvalidArgument("tree has no nodes");
  for (const auto& nd : tree.nodes)
    if (!nd.is_leaf() && static_cast<std::size_t>(nd.feature) >= data.cols())
      throw InvalidArgument("tree splits on a feature the dataset does not have");
}

// Index range [first, last) of axis points inside the closed box around
// `center` with half width `half`.
inline std::pair<std::size_t, std::size_t> covered_range(
    const std::vector<double>& axis, double center, double half) {
  auto first = std::partition_point(axis.begin(), axis.end(), [&](double g) {
    return g < center && !within_box(g, center, half);
  });
  auto last = std::partition_point(first, axis.end(), [&](double g) {
    return g <= center || within_box(g, center, half);
  });
  return {static_cast<std::size_t>(first - axis.begin()),
          static_cast<std::size_t>(last - axis.begin())};
}

// Visits every cell in the box of per-axis index ranges.
template <typename Fn>
void for_each_cell(const Grid& grid,
                   const std::vector<std::pair<std::size_t, std::size_t>>& ranges,
                   Fn&& fn) {
  const std::size_t dims = ranges.size();
  for (const auto& [a, b] : ranges)
    if (a >= b) return;
  std::vector<std::size_t> idx(dims);
  for (std::size_t a = 0; a < dims; ++a) idx[a] = ranges[a].first;
  while (true) {
    fn(grid.flatten(idx));
    std::size_t a = dims;
    while (a-- > 0) {
      if (++idx[a] < ranges[a].second) break;
      idx[a] = ranges[a].first;
    }
    if (a == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace detail

/// Summary of one leaf restricted to the rules on S.
inline LeafSummary leaf_summary(const DecisionTree& tree, int leaf_id,
                                const Dataset& data, const FeatureSet& s,
                                double k) {
  detail::check_inputs(tree, data, s, k);
  if (leaf_id < 0 || static_cast<std::size_t>(leaf_id) >= tree.nodes.size() ||
      !tree.nodes[leaf_id].is_leaf())
    throw InvalidArgument("leaf_summary: node " + std::to_string(leaf_id) +
                          " is not a leaf");
  const auto rules = tree.path_rules(leaf_id);
  const detail::SortedRows view(data, s);
  const auto stats = detail::summarize_box(view, detail::rule_box(rules, s), k);
  return detail::to_summary(leaf_id, stats, k);
}

namespace detail {

inline std::vector<LeafSummary> leaf_summaries(const DecisionTree& tree,
                                               const SortedRows& view,
                                               const FeatureSet& s, double k) {
  std::map<RuleBox, BoxStats> cache;
  std::vector<LeafSummary> out;
  for (const auto& path : tree.leaf_paths()) {
    auto box = rule_box(path.rules, s);
    auto it = cache.find(box);
    if (it == cache.end()) it = cache.emplace(box, summarize_box(view, box, k)).first;
    out.push_back(to_summary(path.leaf, it->second, k));
  }
  return out;
}

inline DacCurve tree_dac_curve(const DecisionTree& tree, const SortedRows& view,
                               const FeatureSet& s, const Grid& grid, double k) {
  DacCurve curve = DacCurve::undefined_on(s, grid);
  std::vector<double> acc(grid.cell_count(), 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> ranges(s.size());
  for (const auto& leaf : leaf_summaries(tree, view, s, k)) {
    if (leaf.count == 0) continue;
    for (std::size_t j = 0; j < s.size(); ++j)
      ranges[j] = covered_range(grid.axes[j], leaf.mu[j], k * leaf.sigma[j]);
    const double c = static_cast<double>(leaf.count);
    const double mass = leaf.mean_y * c;
    for_each_cell(grid, ranges, [&](std::size_t cell) {
      acc[cell] += mass;
      curve.counts[cell] += c;
    });
  }
  for (std::size_t cell = 0; cell < acc.size(); ++cell)
    if (curve.counts[cell] > 0.0) curve.values[cell] = acc[cell] / curve.counts[cell];
  return curve;
}

inline void check_grid(const Grid& grid, const FeatureSet& s) {
  grid.validate();
  if (grid.dims() != s.size())
    throw InvalidArgument("grid has " + std::to_string(grid.dims()) +
                          " axes but the feature set has " + std::to_string(s.size()));
}

}  // namespace detail

/// All leaf summaries of a tree, in depth-first leaf order. Leaves whose
/// S-rules describe the same box share one computation.
inline std::vector<LeafSummary> leaf_summaries(const DecisionTree& tree,
                                               const Dataset& data,
                                               const FeatureSet& s, double k) {
  detail::check_inputs(tree, data, s, k);
  return detail::leaf_summaries(tree, detail::SortedRows(data, s), s, k);
}

/// Attribution curve of a single tree on `grid`.
inline DacCurve tree_dac_curve(const DecisionTree& tree, const Dataset& data,
                               const FeatureSet& s, const Grid& grid, double k) {
  detail::check_grid(grid, s);
  detail::check_inputs(tree, data, s, k);
  return detail::tree_dac_curve(tree, detail::SortedRows(data, s), s, grid, k);
}

/// Weighted mean of per-tree curves. At each cell the weights are
/// renormalized over the trees whose curve is defined there.
inline DacCurve ensemble_dac_curve(const Ensemble& model, const Dataset& data,
                                   const FeatureSet& s, const Grid& grid,
                                   const DacParams& params) {
  params.validate();
  if (data.cols() != model.n_features)
    throw InvalidArgument("dataset has " + std::to_string(data.cols()) +
                          " features, model expects " + std::to_string(model.n_features));
  detail::check_grid(grid, s);
  for (const auto& tree : model.trees) detail::check_inputs(tree, data, s, params.k);
  const detail::SortedRows view(data, s);
  const std::size_t cells = grid.cell_count();
  DacCurve out = DacCurve::undefined_on(s, grid);
  std::vector<double> num(cells, 0.0), den(cells, 0.0);

  // Trees are evaluated in parallel batches and reduced in tree order.
  const std::size_t m = model.trees.size();
  const std::size_t batch = std::max<std::size_t>(1, worker_count());
  std::vector<DacCurve> curves;
  for (std::size_t start = 0; start < m; start += batch) {
    const std::size_t end = std::min(m, start + batch);
    curves.assign(end - start, DacCurve{});
    parallel_for(end - start, [&](std::size_t i) {
      curves[i] = detail::tree_dac_curve(model.trees[start + i], view, s, grid, params.k);
    });
    for (std::size_t i = 0; i < end - start; ++i) {
      const double w = model.weights[start + i];
      if (w <= 0.0) continue;
      const auto& c = curves[i];
      for (std::size_t cell = 0; cell < cells; ++cell) {
        if (!c.defined(cell)) continue;
        num[cell] += w * c.values[cell];
        den[cell] += w;
        out.counts[cell] += c.counts[cell];
      }
    }
  }
  for (std::size_t cell = 0; cell < cells; ++cell)
    if (out.counts[cell] > 0.0) out.values[cell] = num[cell] / den[cell];
  return out;
}

namespace detail {

// Value of the nearest defined cell to `idx`: first along each axis (in
// axis order, nearest step first, lower index on ties), otherwise anywhere by
// squared index distance.
inline double nearest_defined(const Curve& curve, std::vector<std::size_t> idx) {
  const Grid& g = curve.grid;
  std::optional<std::pair<std::size_t, double>> best;  // (distance, value)
  for (std::size_t a = 0; a < g.dims(); ++a) {
    const std::size_t n = g.axes[a].size();
    const std::size_t orig = idx[a];
    for (std::size_t step = 1; step < n; ++step) {
      if (best && step >= best->first) break;
      bool found = false;
      for (int sign : {-1, 1}) {
        if (sign < 0 && orig < step) continue;
        const std::size_t pos = sign < 0 ? orig - step : orig + step;
        if (pos >= n) continue;
        idx[a] = pos;
        const std::size_t cell = g.flatten(idx);
        if (curve.defined(cell)) {
          best = {step, curve.values[cell]};
          found = true;
          break;
        }
      }
      if (found) break;
    }
    idx[a] = orig;
  }
  if (best) return best->second;

  double best_d = std::numeric_limits<double>::infinity();
  double value = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t cell = 0; cell < curve.size(); ++cell) {
    if (!curve.defined(cell)) continue;
    auto other = g.unflatten(cell);
    double d = 0.0;
    for (std::size_t a = 0; a < g.dims(); ++a) {
      const double diff = static_cast<double>(other[a]) - static_cast<double>(idx[a]);
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      value = curve.values[cell];
    }
  }
  return value;
}

}  // namespace detail

/// Multilinear interpolation of a curve at x (one coordinate per feature in
/// S). Coordinates outside the grid are clamped to it; undefined corners are
/// replaced by the nearest defined cell.
inline double evaluate_curve(const Curve& curve, std::span<const double> x) {
  const Grid& g = curve.grid;
  if (x.size() != g.dims())
    throw InvalidArgument("evaluate_curve: expected " + std::to_string(g.dims()) +
                          " coordinates, got " + std::to_string(x.size()));
  if (curve.defined_count() == 0)
    throw InvalidArgument("evaluate_curve: curve is undefined everywhere");

  const std::size_t dims = g.dims();
  std::vector<std::size_t> lo(dims), hi(dims);
  std::vector<double> t(dims, 0.0);
  for (std::size_t a = 0; a < dims; ++a) {
    const auto& axis = g.axes[a];
    const double v = std::clamp(x[a], axis.front(), axis.back());
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
    if (i + 1 >= axis.size()) {
      lo[a] = hi[a] = axis.size() - 1;
    } else {
      lo[a] = i;
      hi[a] = i + 1;
      t[a] = (v - axis[i]) / (axis[i + 1] - axis[i]);
    }
  }

  double out = 0.0;
  std::vector<std::size_t> idx(dims);
  for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
    double weight = 1.0;
    for (std::size_t a = 0; a < dims; ++a) {
      const bool upper = (corner >> a) & 1u;
      idx[a] = upper ? hi[a] : lo[a];
      weight *= upper ? t[a] : 1.0 - t[a];
    }
    if (weight == 0.0) continue;
    const std::size_t cell = g.flatten(idx);
    const double v = curve.defined(cell) ? curve.values[cell]
                                         : detail::nearest_defined(curve, idx);
    out += weight * v;
  }
  return out;
}

}  // namespace dac

#endif  // DAC_ATTRIBUTION_HPP_
