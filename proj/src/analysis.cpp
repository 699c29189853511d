#include "softsqueeze/analysis.hpp"

#include <cmath>
#include <random>

#include "softsqueeze/errors.hpp"

namespace softsqueeze::analysis {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalized(const Vec3& a) {
  const double len = std::sqrt(dot(a, a));
  return {a[0] / len, a[1] / len, a[2] / len};
}

double quadratic_form(const Moments& m, const Vec3& u, const Vec3& v) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s += u[a] * m.covariance(a, b) * v[b];
  return s;
}

void check_bloch(const Moments& m, std::size_t n) {
  const double len = m.bloch_length();
  if (!(len > 1e-6 * static_cast<double>(n)) || !std::isfinite(len))
    throw AnalysisError("squeezing undefined: Bloch vector vanishes");
}

}  // namespace

double squeezing_parameter_in_basis(const Moments& m, std::size_t n, const Vec3& e1, const Vec3& e2) {
  check_bloch(m, n);
  const double v11 = quadratic_form(m, e1, e1);
  const double v22 = quadratic_form(m, e2, e2);
  const double v12 = quadratic_form(m, e1, e2);
  const double half_diff = 0.5 * (v11 - v22);
  const double lambda_min = 0.5 * (v11 + v22) - std::sqrt(half_diff * half_diff + v12 * v12);
  const double len = m.bloch_length();
  return static_cast<double>(n) * lambda_min / (len * len);
}

double squeezing_parameter(const Moments& m, std::size_t n) {
  check_bloch(m, n);
  const Vec3 b = normalized({m.first[0], m.first[1], m.first[2]});
  // Helper axis least aligned with the Bloch vector.
  int k = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(b[a]) < std::abs(b[k])) k = a;
  Vec3 helper{0.0, 0.0, 0.0};
  helper[k] = 1.0;
  const Vec3 e1 = normalized(cross(b, helper));
  const Vec3 e2 = cross(b, e1);
  return squeezing_parameter_in_basis(m, n, e1, e2);
}

double squeezing_parameter_or_nan(const Moments& m, std::size_t n) {
  const double len = m.bloch_length();
  if (!(len > 1e-6 * static_cast<double>(n)) || !std::isfinite(len)) return std::numeric_limits<double>::quiet_NaN();
  return squeezing_parameter(m, n);
}

double collectivity(const Moments& m, std::size_t n) {
  const double s = 0.5 * static_cast<double>(n);
  return m.total_spin_squared() / (s * (s + 1.0));
}

double contrast(const Moments& m, std::size_t n) { return m.bloch_length() / (0.5 * static_cast<double>(n)); }

void annotate(ObservableSeries& series) {
  const std::size_t len = series.size();
  series.xi2.resize(len);
  series.collectivity.resize(len);
  series.contrast.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    const Moments& m = series.moments[k];
    series.xi2[k] = squeezing_parameter_or_nan(m, series.n_sites);
    series.collectivity[k] = collectivity(m, series.n_sites);
    series.contrast[k] = contrast(m, series.n_sites);
  }
}

SqueezingResult optimal_squeezing(const ObservableSeries& series) {
  if (series.size() == 0) throw AnalysisError("empty observable series");
  std::vector<double> xi2 = series.xi2;
  if (xi2.size() != series.size()) {
    xi2.resize(series.size());
    for (std::size_t k = 0; k < series.size(); ++k)
      xi2[k] = squeezing_parameter_or_nan(series.moments[k], series.n_sites);
  }
  bool found = false;
  SqueezingResult r;
  for (std::size_t k = 0; k < xi2.size(); ++k) {
    if (std::isnan(xi2[k])) continue;
    if (!found || xi2[k] < r.xi2_opt) {
      r.xi2_opt = xi2[k];
      r.index = k;
      found = true;
    }
  }
  if (!found) throw AnalysisError("squeezing undefined at every recorded time");
  const Moments& m = series.moments[r.index];
  r.xi2_opt_db = to_db(r.xi2_opt);
  r.t_opt = series.times[r.index];
  r.contrast = contrast(m, series.n_sites);
  r.collectivity = collectivity(m, series.n_sites);
  r.boundary_minimum = r.index + 1 == series.size();
  return r;
}

double bootstrap_xi2_error(const TrajectoryBlocks& blocks, std::size_t time_index, std::size_t resamples,
                           std::uint64_t seed) {
  const std::size_t nb = blocks.n_blocks();
  if (nb < 2 || time_index >= blocks.n_times) return std::numeric_limits<double>::quiet_NaN();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nb - 1);
  double sum = 0.0, sum2 = 0.0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    TrajectoryBlocks::Sums acc{};
    double count = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t chosen = pick(rng);
      const auto& s = blocks.sums[chosen * blocks.n_times + time_index];
      for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += s[q];
      count += static_cast<double>(blocks.counts[chosen]);
    }
    const double xi2 = squeezing_parameter_or_nan(moments_from_sums(acc, count, blocks.n_sites, blocks.estimator), blocks.n_sites);
    if (std::isnan(xi2)) continue;
    sum += xi2;
    sum2 += xi2 * xi2;
    ++used;
  }
  if (used < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mean = sum / used;
  return std::sqrt(std::max(0.0, (sum2 / used - mean * mean) * used / (used - 1.0)));
}

}  // namespace softsqueeze::analysis
