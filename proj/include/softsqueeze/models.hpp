#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "softsqueeze/lattice.hpp"

namespace softsqueeze::models {

using Vec3 = std::array<double, 3>;

enum class Axis { x = 0, y = 1, z = 2 };

std::string to_string(Axis a);
Axis axis_from_string(const std::string& name);

enum class Variant { ising, xx_rwa, lab_frame_driven, oat, goat };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct ModelSpec {
  Variant variant = Variant::xx_rwa;
  double b_field = 0.0;  // transverse field, lab-frame model only
  bool detuning_compensation = false;
  bool echo_pulse = false;
  bool include_longitudinal = false;

  void validate() const;
  bool rotating_frame() const {
    return variant == Variant::xx_rwa || variant == Variant::oat || variant == Variant::goat;
  }
};

struct ChannelRates {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool any() const { return x > 0.0 || y > 0.0 || z > 0.0; }
};

/// Physical decay γ_- (jump s^-) and dephasing γ_d (jump n = 1/2 + s^z).
struct DissipationSpec {
  double gamma_minus = 0.0;
  double gamma_d = 0.0;

  void validate() const;
  bool any() const { return gamma_minus > 0.0 || gamma_d > 0.0; }
  ChannelRates rotating_frame_rates() const;
};

/// Dephasing rates seen in the frame of a strong transverse drive along x:
/// (γ_-, (γ_-+γ_d)/2, (γ_-+γ_d)/2) for jump operators (s_x, s_y, s_z).
ChannelRates rotating_frame_rates(double gamma_minus, double gamma_d);

/// Effective two-level rates from the dressed-state picture with Rydberg
/// fraction f: γ_- = f γ_rg + (1-f) γ_eg and γ_d = f γ_re.
DissipationSpec physical_rates(double f, double gamma_rg, double gamma_re, double gamma_eg);

/// Classical effective fields Ω_i = ∂H_cl/∂S_i, with dS_i/dt = Ω_i × S_i.
///
/// Couplings are held as a compressed neighbour list so short-range lattices
/// cost O(N·neighbours) per evaluation. Collective terms (OAT, the S_x² part
/// of gOAT) exclude the self-interaction, which is a constant for spin-1/2.
class DriftModel {
 public:
  DriftModel(const ModelSpec& model, const lattice::CouplingMatrix& couplings);

  std::size_t size() const { return n_; }
  const ModelSpec& spec() const { return model_; }

  /// Uniform detuning δ subtracted in the lab-frame model (0 unless
  /// compensation is enabled).
  double detuning() const { return delta_; }

  void fields(std::span<const Vec3> spins, std::span<Vec3> out) const;
  Vec3 field(std::span<const Vec3> spins, std::size_t i) const;
  double energy(std::span<const Vec3> spins) const;

  /// True when every field is identically zero (no couplings, no single-body terms).
  bool vanishing() const { return vanishing_; }

 private:
  void check_size(std::size_t n) const {
    if (n != n_) size_error(n);
  }
  [[noreturn]] void size_error(std::size_t n) const;

  ModelSpec model_;
  std::size_t n_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
  std::vector<double> b_parallel_;
  double j_bar_ = 0.0;
  double delta_ = 0.0;
  bool longitudinal_ = false;
  bool vanishing_ = false;
};

Vec3 drift_field(const ModelSpec& model, const lattice::CouplingMatrix& couplings,
                 std::span<const Vec3> config, std::size_t i);

/// Maximum absolute entry of H_RWA - ½H_gOAT - ½Σ_{i<j}(J̄ - J_ij) s_i^x s_j^x
/// after removing its trace part. The two sides differ by the constant
/// -J̄N/16 coming from the self terms of S_x², which carries no dynamics.
double goat_decomposition_check(const lattice::CouplingMatrix& couplings);

}  // namespace softsqueeze::models
