#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

#include "softsqueeze/observables.hpp"

namespace softsqueeze::analysis {

using Vec3 = std::array<double, 3>;

/// Wineland parameter ξ² = N·min⟨ΔS_⊥²⟩/|⟨S⟩|². Throws AnalysisError when
/// |⟨S⟩| <= 1e-6·N.
double squeezing_parameter(const Moments& m, std::size_t n);
double squeezing_parameter_or_nan(const Moments& m, std::size_t n);

/// Same quantity evaluated in a caller-supplied orthonormal basis (e1, e2) of
/// the plane perpendicular to the Bloch vector.
double squeezing_parameter_in_basis(const Moments& m, std::size_t n, const Vec3& e1, const Vec3& e2);

/// ⟨S²⟩ / ((N/2)(N/2+1)).
double collectivity(const Moments& m, std::size_t n);

/// |⟨S⟩| / (N/2).
double contrast(const Moments& m, std::size_t n);

inline double to_db(double x) { return 10.0 * std::log10(x); }

/// Fills the derived ξ², collectivity and contrast columns.
void annotate(ObservableSeries& series);

struct SqueezingResult {
  double xi2_opt = std::numeric_limits<double>::quiet_NaN();
  double xi2_opt_db = std::numeric_limits<double>::quiet_NaN();
  double t_opt = 0.0;
  std::size_t index = 0;
  double contrast = 0.0;
  double collectivity = 0.0;
  bool boundary_minimum = false;
  double xi2_err = std::numeric_limits<double>::quiet_NaN();
};

/// Grid minimum of ξ²(t); ties go to the earlier time. No interpolation.
SqueezingResult optimal_squeezing(const ObservableSeries& series);

/// Standard deviation of ξ² at one recorded time over block-bootstrap
/// resamples of the trajectory ensemble.
double bootstrap_xi2_error(const TrajectoryBlocks& blocks, std::size_t time_index, std::size_t resamples,
                           std::uint64_t seed);

}  // namespace softsqueeze::analysis
