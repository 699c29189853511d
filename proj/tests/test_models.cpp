#include <doctest.h>

#include <random>

#include "softsqueeze/errors.hpp"
#include "softsqueeze/lattice.hpp"
#include "softsqueeze/models.hpp"

using namespace softsqueeze;
using namespace softsqueeze::models;

namespace {

std::vector<Vec3> random_spins(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Vec3> s(n);
  for (auto& v : s) v = {u(rng), u(rng), u(rng)};
  return s;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("XX field of a pair") {
  auto j = lattice::CouplingMatrix::from_values(2, {0.0, 1.3, 1.3, 0.0});
  std::vector<Vec3> s = {Vec3{0.1, 0.2, 0.3}, Vec3{0.4, -0.2, 0.25}};
  auto f = drift_field({Variant::xx_rwa}, j, s, 0);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == doctest::Approx(1.3 * -0.2 / 2));
  CHECK(f[2] == doctest::Approx(1.3 * 0.25 / 2));
}

TEST_CASE("Ising field vanishes without longitudinal terms and zero S_z") {
  auto j = lattice::coupling_matrix(lattice::build_lattice({1, {5}, lattice::Boundary::open}),
                                    {lattice::PotentialKind::soft_core_vdw, 2.0, 1.0});
  std::vector<Vec3> s(5, Vec3{0.5, 0.5, 0.0});
  DriftModel d({Variant::ising}, j);
  for (std::size_t i = 0; i < 5; ++i) {
    auto f = d.field(s, i);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 0.0);
    CHECK(f[2] == 0.0);
  }
}

TEST_CASE("detuning compensation cancels the homogeneous longitudinal field") {
  auto j = lattice::coupling_matrix(lattice::build_lattice({2, {5, 5}, lattice::Boundary::periodic}),
                                    {lattice::PotentialKind::soft_core_vdw, 1.7, 1.0});
  ModelSpec m{Variant::lab_frame_driven, 3.0, true, false, false};
  DriftModel d(m, j);
  CHECK(d.detuning() == doctest::Approx(j.b_parallel[0]));
  std::vector<Vec3> s(25, Vec3{0.5, 0.5, 0.0});
  auto f = d.field(s, 7);
  CHECK(f[0] == doctest::Approx(3.0));
  CHECK(f[1] == 0.0);
  CHECK(f[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("OAT and gOAT fields") {
  const std::size_t n = 4;
  auto j = lattice::CouplingMatrix::from_values(n, {0, 1, 2, 0, 1, 0, 1, 3, 2, 1, 0, 1, 0, 3, 1, 0});
  auto s = random_spins(n, 3);
  Vec3 t{};
  for (const auto& v : s)
    for (int a = 0; a < 3; ++a) t[a] += v[a];
  auto oat = drift_field({Variant::oat}, j, s, 1);
  CHECK(oat[0] == 0.0);
  CHECK(oat[2] == doctest::Approx(j.j_bar * (t[2] - s[1][2])));
  auto g = drift_field({Variant::goat}, j, s, 1);
  Vec3 expect{};
  for (std::size_t k = 0; k < n; ++k)
    for (int a = 0; a < 3; ++a) expect[a] += j(1, k) * s[k][a];
  expect[0] -= j.j_bar * (t[0] - s[1][0]);
  for (int a = 0; a < 3; ++a) CHECK(g[a] == doctest::Approx(expect[a]));
}

TEST_CASE("field is the gradient of the classical energy") {
  auto j = lattice::coupling_matrix(lattice::build_lattice({2, {3, 3}, lattice::Boundary::open}),
                                    {lattice::PotentialKind::soft_core_vdw, 1.4, 1.0});
  for (auto v : {Variant::ising, Variant::xx_rwa, Variant::lab_frame_driven, Variant::oat, Variant::goat}) {
    ModelSpec m{v, 2.0, true, false, true};
    DriftModel d(m, j);
    auto s = random_spins(9, 11);
    const double h = 1e-6;
    for (std::size_t i : {0u, 4u, 8u})
      for (int a = 0; a < 3; ++a) {
        auto p = s, q = s;
        p[i][a] += h;
        q[i][a] -= h;
        CAPTURE(to_string(v));
        CHECK(d.field(s, i)[a] == doctest::Approx((d.energy(p) - d.energy(q)) / (2 * h)).epsilon(1e-6));
      }
  }
}

TEST_CASE("translation covariance on a periodic lattice") {
  auto j = lattice::coupling_matrix(lattice::build_lattice({1, {8}, lattice::Boundary::periodic}),
                                    {lattice::PotentialKind::soft_core_vdw, 2.2, 1.0});
  auto s = random_spins(8, 5);
  std::vector<Vec3> shifted(8);
  for (std::size_t i = 0; i < 8; ++i) shifted[(i + 3) % 8] = s[i];
  for (auto v : {Variant::ising, Variant::xx_rwa, Variant::lab_frame_driven, Variant::oat, Variant::goat}) {
    DriftModel d({v, 1.0, true, false, true}, j);
    for (std::size_t i = 0; i < 8; ++i)
      for (int a = 0; a < 3; ++a) CHECK(d.field(shifted, (i + 3) % 8)[a] == doctest::Approx(d.field(s, i)[a]));
  }
}

TEST_CASE("vanishing drift") {
  const auto single = lattice::CouplingMatrix::from_values(1, {0.0});
  for (auto v : {Variant::xx_rwa, Variant::oat, Variant::goat, Variant::ising}) CHECK(DriftModel({v}, single).vanishing());
  CHECK_FALSE(DriftModel({Variant::lab_frame_driven, 2.0}, single).vanishing());
  CHECK(DriftModel({Variant::lab_frame_driven, 0.0}, single).vanishing());
  const auto pair = lattice::CouplingMatrix::from_values(2, {0.0, 1.0, 1.0, 0.0});
  CHECK_FALSE(DriftModel({Variant::xx_rwa}, pair).vanishing());
}

TEST_CASE("size mismatch") {
  auto j = lattice::CouplingMatrix::from_values(2, {0.0, 1.0, 1.0, 0.0});
  DriftModel d({Variant::xx_rwa}, j);
  std::vector<Vec3> s(3);
  std::vector<Vec3> out(3);
  CHECK_THROWS_AS(d.fields(s, out), DimensionError);
}

TEST_CASE("rotating-frame rates") {
  auto r = rotating_frame_rates(0.0, 0.0);
  CHECK(!r.any());
  r = rotating_frame_rates(2.0, 0.0);
  CHECK(r.x == 2.0);
  CHECK(r.y == 1.0);
  CHECK(r.z == 1.0);
  r = rotating_frame_rates(0.3, 0.3);
  CHECK(r.x == doctest::Approx(0.3));
  CHECK(r.y == doctest::Approx(0.3));
  CHECK(r.z == doctest::Approx(0.3));
  auto a = rotating_frame_rates(0.2, 0.7), b = rotating_frame_rates(1.1, 0.4), c = rotating_frame_rates(1.3, 1.1);
  CHECK(a.y + b.y == doctest::Approx(c.y));
  CHECK(a.x + b.x == doctest::Approx(c.x));
  CHECK_THROWS_AS(rotating_frame_rates(-1.0, 0.0), InvalidSpecError);
}

TEST_CASE("physical rates") {
  auto p = physical_rates(0.5, 2.0, 4.0, 0.0);
  CHECK(p.gamma_minus == doctest::Approx(1.0));
  CHECK(p.gamma_d == doctest::Approx(2.0));
  p = physical_rates(1e-9, 1.0, 1.0, 0.0);
  CHECK(p.gamma_minus == doctest::Approx(0.0));
  p = physical_rates(0.02, 0.5, 0.5, 0.0);
  CHECK(p.gamma_minus == doctest::Approx(0.01));
  CHECK(p.gamma_d == doctest::Approx(0.01));
  CHECK_THROWS_AS(physical_rates(0.0, 1.0, 1.0, 0.0), InvalidSpecError);
  CHECK_THROWS_AS(physical_rates(1.0, 1.0, 1.0, 0.0), InvalidSpecError);
}

TEST_CASE("gapped OAT decomposition") {
  auto two = lattice::CouplingMatrix::from_values(2, {0.0, 0.7, 0.7, 0.0});
  CHECK(goat_decomposition_check(two) <= 1e-14);
  auto chain = lattice::coupling_matrix(lattice::build_lattice({1, {4}, lattice::Boundary::open}),
                                        {lattice::PotentialKind::sharp_cutoff, 1.0, 1.0});
  CHECK(goat_decomposition_check(chain) <= 1e-12);
  auto vdw = lattice::coupling_matrix(lattice::build_lattice({2, {3, 3}, lattice::Boundary::open}),
                                      {lattice::PotentialKind::soft_core_vdw, 1.6, 1.0});
  CHECK(goat_decomposition_check(vdw) <= 1e-12);
  auto big = lattice::coupling_matrix(lattice::build_lattice({1, {11}, lattice::Boundary::open}),
                                      {lattice::PotentialKind::sharp_cutoff, 1.0, 1.0});
  CHECK_THROWS_AS(goat_decomposition_check(big), ResourceError);
}

}
