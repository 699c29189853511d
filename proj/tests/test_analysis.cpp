#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "softsqueeze/analysis.hpp"
#include "softsqueeze/engine.hpp"
#include "softsqueeze/errors.hpp"
#include "softsqueeze/oracle.hpp"
#include "softsqueeze/scaling.hpp"

using namespace softsqueeze;
using namespace softsqueeze::analysis;

namespace {

Moments coherent_z(double n) {
  Moments m;
  m.first = {0.0, 0.0, n / 2};
  m.second = {n / 4, n / 4, n * n / 4, 0.0, 0.0, 0.0};
  return m;
}

Eigen::Matrix3d second_matrix(const Moments& m) {
  Eigen::Matrix3d s;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s(a, b) = m.second_moment(a, b);
  return s;
}

Moments rotate(const Moments& m, const Eigen::Matrix3d& r) {
  Eigen::Vector3d f(m.first[0], m.first[1], m.first[2]);
  Eigen::Vector3d rf = r * f;
  Eigen::Matrix3d rs = r * second_matrix(m) * r.transpose();
  Moments out;
  for (int a = 0; a < 3; ++a) out.first[a] = rf[a];
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) out.second[pair_index(a, b)] = rs(a, b);
  return out;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

ObservableSeries series_from(const std::vector<double>& xi2) {
  ObservableSeries s;
  s.n_sites = 4;
  for (std::size_t k = 0; k < xi2.size(); ++k) {
    s.push(0.1 * k, coherent_z(4));
    s.xi2.push_back(xi2[k]);
    s.collectivity.push_back(1.0);
    s.contrast.push_back(1.0);
  }
  return s;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("coherent state has unit squeezing parameter") {
  for (double n : {1.0, 7.0, 100.0}) {
    CHECK(squeezing_parameter(coherent_z(n), static_cast<std::size_t>(n)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(collectivity(coherent_z(n), static_cast<std::size_t>(n)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("vanishing Bloch vector") {
  Moments m;
  m.second = {1, 1, 1, 0, 0, 0};
  CHECK_THROWS_AS(squeezing_parameter(m, 4), AnalysisError);
  CHECK(std::isnan(squeezing_parameter_or_nan(m, 4)));
}

TEST_CASE("OAT state matches the dense oracle") {
  const std::size_t n = 4;
  std::vector<double> v(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 0;
  auto j = lattice::CouplingMatrix::from_values(n, v);
  oracle::DenseOperatorSet ops(n);
  const double t = 0.3;
  auto psi = oracle::evolve_state(ops.hamiltonian({models::Variant::oat}, j), ops.coherent_state(models::Axis::x),
                                  std::vector<double>{t})[0];
  CHECK(squeezing_parameter(oracle::state_moments(ops, psi), n) ==
        doctest::Approx(squeezing_parameter(oracle::oat_moments(n, 1.0, t), n)).epsilon(1e-10));
}

TEST_CASE("basis independence and rotation invariance") {
  std::mt19937_64 rng(42);
  auto m0 = oracle::oat_moments(30, 1.0, 0.12);
  const double ref = squeezing_parameter(m0, 30);
  CHECK(ref < 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    auto rot = random_rotation(rng);
    auto m = rotate(m0, rot);
    CHECK(squeezing_parameter(m, 30) == doctest::Approx(ref).epsilon(1e-12));

    Eigen::Vector3d b(m.first[0], m.first[1], m.first[2]);
    b.normalize();
    Eigen::Vector3d e1 = b.unitOrthogonal();
    Eigen::Vector3d e2 = b.cross(e1);
    std::uniform_real_distribution<double> ang(0, 2 * M_PI);
    const double phi = ang(rng);
    Eigen::Vector3d f1 = std::cos(phi) * e1 + std::sin(phi) * e2;
    Eigen::Vector3d f2 = b.cross(f1);
    const double a = squeezing_parameter_in_basis(m, 30, {e1[0], e1[1], e1[2]}, {e2[0], e2[1], e2[2]});
    const double c = squeezing_parameter_in_basis(m, 30, {f1[0], f1[1], f1[2]}, {f2[0], f2[1], f2[2]});
    CHECK(std::abs(a - c) < 1e-12);
  }
}

TEST_CASE("dB mapping sign") {
  CHECK(to_db(0.5) < 0);
  CHECK(to_db(2.0) > 0);
  CHECK(to_db(1.0) == 0.0);
}

TEST_CASE("optimal squeezing on a grid") {
  auto dec = series_from({1.0, 0.9, 0.8, 0.7});
  auto r = optimal_squeezing(dec);
  CHECK(r.boundary_minimum);
  CHECK(r.index == 3);

  auto tie = series_from({1.0, 0.6, 0.8, 0.6, 0.9});
  r = optimal_squeezing(tie);
  CHECK(r.index == 1);
  CHECK(r.t_opt == doctest::Approx(0.1));
  CHECK_FALSE(r.boundary_minimum);
  CHECK(r.xi2_opt_db == doctest::Approx(to_db(0.6)));

  const double nan = std::nan("");
  CHECK_THROWS_AS(optimal_squeezing(series_from({nan, nan})), AnalysisError);
  CHECK_THROWS_AS(optimal_squeezing(ObservableSeries{}), AnalysisError);
}

TEST_CASE("OAT N=64 grid minimum matches direct minimisation") {
  auto opt = oracle::oat_optimum(64, 1.0);
  auto grid = oracle::uniform_grid(0.2, 20000);
  auto r = optimal_squeezing(oracle::oat_reference(64, 1.0, grid));
  CHECK(r.xi2_opt == doctest::Approx(opt.xi2).epsilon(1e-6));
  CHECK(std::abs(r.t_opt - opt.t) <= 2e-5);
  CHECK(r.xi2_opt >= opt.xi2 * (1 - 1e-12));
}

TEST_CASE("closed-form OAT squeezing matches Dicke-basis moments") {
  for (std::size_t n : {3u, 10u, 64u, 301u}) {
    for (double t : {0.0, 0.01, 0.07, 0.3, 0.9}) {
      const double direct = squeezing_parameter_or_nan(oracle::oat_moments(n, 1.0, t), n);
      const double closed = oracle::oat_xi2(n, 1.0, t);
      if (std::isnan(direct)) continue;
      CHECK(closed == doctest::Approx(direct).epsilon(1e-9));
    }
  }
}

TEST_CASE("collectivity of a singlet") {
  oracle::DenseOperatorSet ops(2);
  oracle::State psi = oracle::State::Zero(4);
  psi[1] = 1 / std::sqrt(2.0);
  psi[2] = -1 / std::sqrt(2.0);
  CHECK(collectivity(oracle::state_moments(ops, psi), 2) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("XX chain stays collective near the optimum") {
  auto j = lattice::coupling_matrix(lattice::build_lattice({1, {8}, lattice::Boundary::open}),
                                    {lattice::PotentialKind::sharp_cutoff, 2.0, 1.0});
  models::ModelSpec m{models::Variant::xx_rwa};
  auto grid = oracle::uniform_grid(4.0, 200);
  auto exact = optimal_squeezing(oracle::exact_series(m, j, {}, models::Axis::z, grid));
  CHECK(exact.collectivity > 0.85);
  CHECK(exact.collectivity < 1.0);
  dtwa::EnsembleSpec e{4000, 0.02, 4.0, 1, 5, models::Axis::z};
  auto dtwa_run = dtwa::run_ensemble(m, j, {}, e);
  auto r = optimal_squeezing(dtwa_run.series);
  CHECK(r.collectivity == doctest::Approx(exact.collectivity).epsilon(0.02));
}

TEST_CASE("bootstrap error is positive and finite") {
  auto j = lattice::coupling_matrix(lattice::build_lattice({1, {6}, lattice::Boundary::open}),
                                    {lattice::PotentialKind::sharp_cutoff, 2.0, 1.0});
  dtwa::EnsembleSpec e{640, 0.02, 1.0, 10, 9, models::Axis::z};
  auto run = dtwa::run_ensemble({models::Variant::xx_rwa}, j, {}, e);
  const double err = bootstrap_xi2_error(run.blocks, 5, 200, 1);
  CHECK(err > 0);
  CHECK(err < 0.2);
  CHECK(bootstrap_xi2_error(run.blocks, 5, 200, 1) == err);
}

TEST_CASE("collectivity crossing and censoring") {
  auto row = [](std::size_t n, double c, double xi2) {
    ScalingRow r;
    r.n = n;
    r.result.collectivity = c;
    r.result.xi2_opt = xi2;
    return r;
  };
  std::vector<ScalingRow> rows = {row(16, 0.99, 0.3), row(64, 0.97, 0.2), row(256, 0.93, 0.15)};
  auto c = collectivity_crossing(rows);
  CHECK_FALSE(c.censored);
  CHECK(c.value == doctest::Approx(std::exp(std::log(64.0) + 0.5 * std::log(4.0))));
  rows.pop_back();
  c = collectivity_crossing(rows);
  CHECK(c.censored);
  CHECK(c.value == 64.0);
  CHECK(saturated_squeezing(rows).censored);
  rows.push_back(row(256, 0.97, 0.199));
  auto s = saturated_squeezing(rows);
  CHECK_FALSE(s.censored);
  CHECK(s.value == 0.199);
}

TEST_CASE("effective OAT size of the OAT family is N") {
  OatCurve curve(512);
  for (std::size_t n : {8u, 40u, 100u, 333u}) {
    auto e = curve.effective_size(curve.xi2(n));
    CHECK_FALSE(e.censored);
    CHECK(e.value == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
  }
  CHECK(curve.effective_size(1e-6).censored);
}

TEST_CASE("Ising squeezing saturates with N") {
  ScalingScanSpec spec{1, {32, 64, 128}, {2.0}, lattice::Boundary::open};
  auto table = scaling_scan(spec, [](const lattice::LatticeSpec& lat, double r_b) {
    auto j = lattice::coupling_matrix(lattice::build_lattice(lat), {lattice::PotentialKind::sharp_cutoff, r_b, 1.0});
    return CellOutcome{oracle::ising_closed_form(j, {}, false, oracle::uniform_grid(3.0, 300)), j.n_b};
  });
  REQUIRE(table.rows.size() == 3);
  const double a = table.rows[1].result.xi2_opt, b = table.rows[2].result.xi2_opt;
  CHECK(std::abs(a - b) < 0.05 * a);
  REQUIRE(table.reductions.size() == 1);
  CHECK(table.reductions[0].n_b_tilde == 5);
  CHECK_FALSE(table.reductions[0].xi2_inf.censored);
  CHECK_FALSE(table.reductions[0].n_oat.censored);
  CHECK(table.reductions[0].n_oat.value < 32);
}

}
