#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "softsqueeze/errors.hpp"
#include "softsqueeze/planner.hpp"

using namespace softsqueeze;
using namespace softsqueeze::planner;

namespace {

const std::filesystem::path kDataDir = SOFTSQUEEZE_DATA_DIR;

struct Row {
  const char* label;
  double a_um;
  double c6_ghz;
  double tau_us;
};

// Lattice spacing, C6/2π and 300 K lifetime as tabulated.
constexpr Row kTable[] = {
    {"Sr88_41S3S1", 0.651, 1.5, 20.0},   {"Sr88_60S3S1", 1.79, 156.0, 61.3}, {"Sr88_80S3S1", 3.76, 4800.0, 137.0},
    {"Rb87_60S", 1.74, 138.0, 101.0},    {"Cs133_60S", 1.62, 107.0, 95.6},
};

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("species table matches the tabulated values") {
  const auto& table = builtin_species();
  REQUIRE(table.size() == std::size(kTable));
  for (std::size_t k = 0; k < table.size(); ++k) {
    CAPTURE(kTable[k].label);
    CHECK(table[k].label == kTable[k].label);
    CHECK(table[k].lattice_spacing_um == kTable[k].a_um);
    CHECK(table[k].c6_over_2pi_hz_um6 == kTable[k].c6_ghz * 1e9);
    CHECK(table[k].lifetime_us == kTable[k].tau_us);
  }
}

TEST_CASE("shipped species file equals the built-in table") {
  CHECK(load_species(kDataDir / "species.json") == builtin_species());
}

TEST_CASE("species file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "softsqueeze_species_roundtrip.json";
  save_species(builtin_species(), path);
  CHECK(load_species(path) == builtin_species());
  std::filesystem::remove(path);
}

TEST_CASE("unknown species lists suggestions and labels") {
  try {
    find_species(builtin_species(), "Sr88_60S");
    FAIL("expected an error");
  } catch (const InvalidSpecError& e) {
    const std::string msg = e.what();
    const auto suggestions = msg.substr(0, msg.find("available"));
    CHECK(suggestions.find("did you mean") != std::string::npos);
    CHECK(suggestions.find("Sr88_60S3S1") != std::string::npos);
    for (const auto& row : kTable) CHECK(msg.find(row.label) != std::string::npos);
  }
}

TEST_CASE("J0 from Rabi frequency and Rydberg fraction") {
  const auto& sr60 = find_species(builtin_species(), "Sr88_60S3S1");
  auto p = dressing_from(kTwoPi * 10e6, 0.01, sr60);
  CHECK(p.j0_magnitude() == doctest::Approx(kTwoPi * 10e3).epsilon(1e-12));
  CHECK(std::abs(p.delta) == doctest::Approx(kTwoPi * 50e6).epsilon(1e-12));
  CHECK(p.delta < 0);
  CHECK(p.r_b_phys_um == doctest::Approx(3.41).epsilon(2e-3));
  CHECK(p.r_b == doctest::Approx(1.90).epsilon(3e-3));
  CHECK(sr60.c6_angular() / std::pow(p.r_b_phys_um, 6) == doctest::Approx(-2.0 * p.delta).epsilon(1e-12));
}

TEST_CASE("J0 = f^(3/2) Omega and f round trip on a grid") {
  for (const auto& s : builtin_species()) {
    for (double f : {1e-4, 1e-3, 0.01, 0.05, 0.2}) {
      for (double nu : {1e5, 1e6, 1e7, 3e7}) {
        auto p = dressing_from(kTwoPi * nu, f, s);
        CHECK(std::abs(p.j0_magnitude() - std::pow(f, 1.5) * p.omega) <= 1e-12 * p.j0_magnitude());
        CHECK(std::abs(rydberg_fraction(p.omega, p.delta) - f) <= 1e-12 * f);
      }
    }
  }
}

TEST_CASE("dressing_for_blockade inverts dressing_from") {
  const auto& s = find_species(builtin_species(), "Cs133_60S");
  auto p = dressing_from(kTwoPi * 4e6, 0.02, s);
  auto q = dressing_for_blockade(p.r_b, 0.02, s);
  CHECK(q.omega == doctest::Approx(p.omega).epsilon(1e-12));
  CHECK(q.j0 == doctest::Approx(p.j0).epsilon(1e-12));
}

TEST_CASE("dressing input validation") {
  const auto& s = builtin_species().front();
  CHECK_THROWS_AS(dressing_from(kTwoPi * 1e6, 0.0, s), InvalidSpecError);
  CHECK_THROWS_AS(dressing_from(kTwoPi * 1e6, 0.25, s), InvalidSpecError);
  CHECK_THROWS_AS(dressing_from(kTwoPi * 1e6, 0.01, s, +1), InvalidSpecError);
  CHECK_NOTHROW(dressing_from(kTwoPi * 1e6, 0.01, s, -1));
  CHECK(dressing_warnings(dressing_from(kTwoPi * 1e6, 0.05, s)).empty());
  CHECK(dressing_warnings(dressing_from(kTwoPi * 1e6, 0.06, s)).size() == 1);
}

TEST_CASE("Sr lifetime fit") {
  const auto t80 = lifetime(80, kSrTripletQuantumDefect, kSrLifetimeFit.a_per_us, kSrLifetimeFit.b_per_us);
  const auto t41 = lifetime(41, kSrTripletQuantumDefect, kSrLifetimeFit.a_per_us, kSrLifetimeFit.b_per_us);
  CHECK(std::abs(t80.tau_us - 137.0) <= 1.0);
  CHECK(std::abs(t41.tau_us - 20.0) <= 1.0);
  CHECK(t80.gamma_per_us * t80.tau_us == doctest::Approx(1.0));
  const double r = lifetime(50, 0.0, 1.0, 0.0).tau_us / lifetime(25, 0.0, 1.0, 0.0).tau_us;
  CHECK(r == doctest::Approx(8.0).epsilon(1e-14));
  CHECK_THROWS_AS(lifetime(3, 3.4, 1.0, 1.0), InvalidSpecError);
}

TEST_CASE("n* scaling laws") {
  LevelParams ref{60.0 - 3.4, kTwoPi * 5e6, -kTwoPi * 50e6, kTwoPi * 5e3, 1.79, kTwoPi * 156e9, 1.9, kTwoPi * 15e3,
                  0.02};
  auto same = scaling_project(ref, ref.n_star);
  CHECK(same.j0 == doctest::Approx(ref.j0).epsilon(1e-14));
  CHECK(same.lattice_spacing_um == doctest::Approx(ref.lattice_spacing_um).epsilon(1e-14));
  CHECK(same.gamma_per_us.value() == doctest::Approx(*ref.gamma_per_us).epsilon(1e-14));

  auto doubled = scaling_project(ref, 2 * ref.n_star);
  CHECK(doubled.j0 == doctest::Approx(ref.j0 / 8).epsilon(1e-14));
  CHECK(doubled.r_b == ref.r_b);
  const double vdw_ratio = (doubled.c6 / std::pow(doubled.lattice_spacing_um, 6)) / (ref.c6 / std::pow(ref.lattice_spacing_um, 6));
  CHECK(vdw_ratio == doctest::Approx(1.0 / 8).epsilon(1e-12));

  for (std::optional<LifetimeFit> fit : {std::optional<LifetimeFit>{}, std::optional<LifetimeFit>{kSrLifetimeFit}}) {
    auto two_step = scaling_project(scaling_project(ref, 70.0, fit), 83.0, fit);
    auto direct = scaling_project(ref, 83.0, fit);
    CHECK(two_step.omega == doctest::Approx(direct.omega).epsilon(1e-12));
    CHECK(two_step.delta == doctest::Approx(direct.delta).epsilon(1e-12));
    CHECK(two_step.n_j_bar == doctest::Approx(direct.n_j_bar).epsilon(1e-12));
    CHECK(two_step.lattice_spacing_um == doctest::Approx(direct.lattice_spacing_um).epsilon(1e-12));
    CHECK(two_step.c6 == doctest::Approx(direct.c6).epsilon(1e-12));
    CHECK(two_step.gamma_per_us.value() == doctest::Approx(direct.gamma_per_us.value()).epsilon(1e-12));
  }
}

TEST_CASE("constraint thresholds are inclusive") {
  DressingParams p;
  p.omega = kTwoPi * 11e6;
  auto r = constraint_check(p, kTwoPi * 1e3);
  CHECK_FALSE(r.omega_ok);
  CHECK(r.n_j_bar_ok);
  CHECK(r.violations.size() == 1);

  p.omega = kTwoPi * 10e6;
  r = constraint_check(p, kTwoPi * 20e3);
  CHECK(r.ok());
  CHECK(r.violations.empty());
  REQUIRE(r.transverse_presets.size() == 2);
  CHECK(r.transverse_presets[0].first == 2.5);
  CHECK(r.transverse_presets[1].second == doctest::Approx(12.5 * kTwoPi * 20e3).epsilon(1e-15));

  r = constraint_check(p, kTwoPi * 20.001e3);
  CHECK_FALSE(r.n_j_bar_ok);
  CHECK(constraint_check(p, kTwoPi * 30e3, {}, false).ok());
}

TEST_CASE("overlay curves") {
  const auto& sr80 = find_species(builtin_species(), "Sr88_80S3S1");
  std::vector<double> grid;
  for (double r = 1.0; r <= 6.0 + 1e-9; r += 0.25) grid.push_back(r);
  auto lo_f = fig3_overlay(sr80, 0.001, grid);
  auto hi_f = fig3_overlay(sr80, 0.01, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(hi_f[k].gamma_ratio < lo_f[k].gamma_ratio);
    CHECK(std::abs(lo_f[k].j0 - std::pow(0.001, 1.5) * lo_f[k].omega) <= 1e-12 * lo_f[k].j0);
    if (k == 0) continue;
    CHECK(lo_f[k].omega < lo_f[k - 1].omega);
    CHECK(lo_f[k].gamma_ratio > lo_f[k - 1].gamma_ratio);
  }
  // The curve is cut where Ω or NJ̄ exceed their limits and continues feasibly beyond.
  CHECK_FALSE(lo_f.front().feasible);
  CHECK(lo_f.back().feasible);
  std::size_t switches = 0;
  for (std::size_t k = 1; k < lo_f.size(); ++k) switches += lo_f[k].feasible != lo_f[k - 1].feasible;
  CHECK(switches == 1);
}

}  // TEST_SUITE
