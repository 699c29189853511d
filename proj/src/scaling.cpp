#include "softsqueeze/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "softsqueeze/errors.hpp"
#include "softsqueeze/oracle.hpp"

namespace softsqueeze::analysis {

Censored collectivity_crossing(std::span<const ScalingRow> rows, double threshold) {
  if (rows.empty()) throw AnalysisError("collectivity crossing needs at least one size");
  if (rows.front().result.collectivity < threshold) return {static_cast<double>(rows.front().n), true};
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double c0 = rows[k - 1].result.collectivity;
    const double c1 = rows[k].result.collectivity;
    if (c0 >= threshold && c1 < threshold) {
      const double l0 = std::log(static_cast<double>(rows[k - 1].n));
      const double l1 = std::log(static_cast<double>(rows[k].n));
      const double w = (c0 - threshold) / (c0 - c1);
      return {std::exp(l0 + w * (l1 - l0)), false};
    }
  }
  return {static_cast<double>(rows.back().n), true};
}

Censored saturated_squeezing(std::span<const ScalingRow> rows, double tolerance) {
  if (rows.empty()) throw AnalysisError("saturated squeezing needs at least one size");
  const double last = rows.back().result.xi2_opt;
  if (rows.size() < 2) return {last, true};
  const double prev = rows[rows.size() - 2].result.xi2_opt;
  return {last, !(std::abs(last - prev) < tolerance * prev)};
}

OatCurve::OatCurve(std::size_t n_max) : n_max_(n_max) {
  if (n_max < 4) throw InvalidSpecError("OAT curve needs n_max >= 4");
  double prev = xi2(kMinSize);
  for (double x = kMinSize; x < static_cast<double>(n_max);) {
    x = std::min(static_cast<double>(n_max), std::ceil(x * 1.25));
    const double v = xi2(static_cast<std::size_t>(x));
    if (!(v < prev)) throw AnalysisError("OAT optimal squeezing is not strictly decreasing in N");
    prev = v;
  }
}

double OatCurve::xi2(std::size_t n) const {
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;
  const double v = oracle::oat_optimum(n, 1.0).xi2;
  cache_.emplace(n, v);
  return v;
}

Censored OatCurve::effective_size(double target) const {
  if (!(target > 0)) throw AnalysisError("effective OAT size needs a positive squeezing parameter");
  if (target >= xi2(kMinSize)) return {static_cast<double>(kMinSize), target > xi2(kMinSize)};
  if (target < xi2(n_max_)) return {static_cast<double>(n_max_), true};
  std::size_t lo = kMinSize, hi = n_max_;  // xi2(lo) >= target > ... >= xi2(hi)
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (xi2(mid) >= target ? lo : hi) = mid;
  }
  const double y0 = std::log(xi2(lo)), y1 = std::log(xi2(hi));
  const double x0 = std::log(static_cast<double>(lo)), x1 = std::log(static_cast<double>(hi));
  const double w = (y0 - std::log(target)) / (y0 - y1);
  return {std::exp(x0 + w * (x1 - x0)), false};
}

ScalingTable scaling_scan(const ScalingScanSpec& spec, const CellSimulator& simulate) {
  if (spec.lengths.empty() || spec.r_b.empty()) throw InvalidSpecError("scaling scan needs sizes and radii");
  ScalingTable table;
  std::vector<int> lengths = spec.lengths;
  std::sort(lengths.begin(), lengths.end());
  std::size_t largest = 0;
  for (double r_b : spec.r_b) {
    const std::size_t first = table.rows.size();
    for (int length : lengths) {
      lattice::LatticeSpec lat{spec.dimension, std::vector<int>(spec.dimension, length), spec.boundary};
      lat.validate();
      auto outcome = simulate(lat, r_b);
      ScalingRow row;
      row.n = lat.n_sites();
      row.length = length;
      row.r_b = r_b;
      row.n_b_tilde = outcome.n_b + 1;
      row.result = optimal_squeezing(outcome.series);
      table.rows.push_back(row);
      largest = std::max(largest, row.n);
    }
    std::span<const ScalingRow> rows(table.rows.data() + first, table.rows.size() - first);
    ScalingReduction red;
    red.r_b = r_b;
    red.n_b_tilde = rows.back().n_b_tilde;
    red.n_095 = collectivity_crossing(rows);
    red.xi2_inf = saturated_squeezing(rows);
    table.reductions.push_back(red);
  }
  OatCurve curve(std::max<std::size_t>(4096, 4 * largest));
  for (auto& red : table.reductions) {
    red.n_oat = curve.effective_size(red.xi2_inf.value);
    red.n_oat.censored = red.n_oat.censored || red.xi2_inf.censored;
  }
  return table;
}

}  // namespace softsqueeze::analysis
