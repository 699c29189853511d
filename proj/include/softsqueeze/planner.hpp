#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softsqueeze/lattice.hpp"

namespace softsqueeze::planner {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Total Rydberg decay rate γ = a·n*⁻³ + b·n*⁻², coefficients in μs⁻¹.
struct LifetimeFit {
  double a_per_us = 0.0;
  double b_per_us = 0.0;

  bool operator==(const LifetimeFit&) const = default;
};

/// One row of the species table. Frequencies are ordinary (Hz); C6 is
/// quoted as C6/2π.
struct SpeciesRecord {
  std::string label;
  std::string element;
  std::string state;
  int n = 0;
  double lattice_spacing_um = 0.0;
  double c6_over_2pi_hz_um6 = 0.0;
  double lifetime_us = 0.0;  // at 300 K
  double quantum_defect = 0.0;
  std::optional<LifetimeFit> fit;

  double n_star() const { return n - quantum_defect; }
  /// C6 in rad/s·μm⁶.
  double c6_angular() const { return kTwoPi * c6_over_2pi_hz_um6; }
  /// Total Rydberg decay rate in s⁻¹ from the tabulated lifetime.
  double decay_rate_per_s() const { return 1e6 / lifetime_us; }

  bool operator==(const SpeciesRecord&) const = default;
};

/// Default quantum defect for Sr 5sns ³S₁, pinned so that the Sr fit
/// reproduces τ(n=80) = 137 μs.
inline constexpr double kSrTripletQuantumDefect = 3.4;
inline constexpr LifetimeFit kSrLifetimeFit{2070.0, 15.8};

/// Built-in species table (lattice spacing, C6/2π, lifetime at 300 K).
const std::vector<SpeciesRecord>& builtin_species();

std::vector<SpeciesRecord> load_species(const std::filesystem::path& path);
void save_species(const std::vector<SpeciesRecord>& species, const std::filesystem::path& path);

/// Looks a label up; unknown labels raise InvalidSpecError listing the
/// closest available labels.
const SpeciesRecord& find_species(const std::vector<SpeciesRecord>& table, const std::string& label);

/// Weak-dressing parameters, angular frequencies in rad/s.
struct DressingParams {
  double omega = 0.0;
  double delta = 0.0;  // sign opposite to C6
  double f = 0.0;      // Ω²/(4Δ²)
  double r_b_phys_um = 0.0;
  double r_b = 0.0;    // lattice units
  double j0 = 0.0;     // Ω⁴/(8Δ³), signed

  double j0_magnitude() const { return std::abs(j0); }
};

/// Dressing from Rabi frequency and Rydberg fraction. `detuning_sign` may pin
/// the sign of Δ; it must be opposite to the sign of C6.
DressingParams dressing_from(double omega, double f, const SpeciesRecord& species,
                             std::optional<int> detuning_sign = std::nullopt);

/// Inverse of dressing_from at fixed f: the Rabi frequency giving blockade
/// radius r_b (lattice units).
DressingParams dressing_for_blockade(double r_b, double f, const SpeciesRecord& species);

/// Rydberg fractions above this leave the weak-dressing regime.
inline constexpr double kWeakDressingFraction = 0.05;

std::vector<std::string> dressing_warnings(const DressingParams& params);

/// Rydberg fraction Ω²/(4Δ²).
double rydberg_fraction(double omega, double delta);

struct Lifetime {
  double gamma_per_us = 0.0;
  double tau_us = 0.0;
};

Lifetime lifetime(double n, double quantum_defect, double a_fit, double b_fit);

/// Parameters that follow the Rydberg-level power laws.
struct LevelParams {
  double n_star = 0.0;
  double omega = 0.0;
  double delta = 0.0;
  double j0 = 0.0;
  double lattice_spacing_um = 0.0;
  double c6 = 0.0;
  double r_b = 0.0;
  double n_j_bar = 0.0;
  std::optional<double> gamma_per_us;
};

/// Ω, Δ, J0, NJ̄ ∝ n*⁻³; a ∝ n*^{7/3}; C6 ∝ n*¹¹; r_b (lattice units) fixed.
/// The decay rate follows the lifetime fit when given, else n*⁻³.
LevelParams scaling_project(const LevelParams& reference, double target_n_star,
                            std::optional<LifetimeFit> fit = std::nullopt);

struct Constraints {
  double omega_max = kTwoPi * 10e6;     // rad/s
  double n_j_bar_max = kTwoPi * 20e3;   // rad/s
};

struct ConstraintReport {
  bool omega_ok = true;
  bool n_j_bar_ok = true;
  std::vector<std::string> violations;
  /// Suggested transverse fields B = ratio·NJ̄ for the preset ratios.
  std::vector<std::pair<double, double>> transverse_presets;

  bool ok() const { return violations.empty(); }
};

/// Thresholds are inclusive. With require_transverse = false (Ising
/// protocol) only the Ω limit applies.
ConstraintReport constraint_check(const DressingParams& params, double n_j_bar, const Constraints& limits = {},
                                  bool require_transverse = true);

struct OverlayPoint {
  double r_b = 0.0;
  double omega = 0.0;   // rad/s
  double j0 = 0.0;      // |J0|, rad/s
  double n_j_bar = 0.0; // rad/s
  double gamma_minus = 0.0;  // s⁻¹
  double gamma_ratio = 0.0;  // γ_-/J0
  double jbar_tau_over_f = 0.0;
  bool feasible = true;
  std::string violations;
};

lattice::LatticeSpec default_overlay_lattice();

/// Parameter curve along r_b at fixed f (γ_- = γ_d = fγ_r/2, soft-core vdW
/// couplings on the given lattice).
std::vector<OverlayPoint> fig3_overlay(const SpeciesRecord& species, double f, std::span<const double> r_b_grid,
                                       const lattice::LatticeSpec& lattice = default_overlay_lattice(),
                                       const Constraints& limits = {}, bool require_transverse = true);

}  // namespace softsqueeze::planner
