#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "softsqueeze/analysis.hpp"
#include "softsqueeze/lattice.hpp"

namespace softsqueeze::analysis {

/// A value that may only be a bound because the scan range was too small.
struct Censored {
  double value = 0.0;
  bool censored = false;
};

struct ScalingRow {
  std::size_t n = 0;
  int length = 0;
  double r_b = 0.0;
  int n_b_tilde = 0;  // sites within r_b including the reference site
  SqueezingResult result;
};

struct ScalingReduction {
  double r_b = 0.0;
  int n_b_tilde = 0;
  Censored n_095;   // size where collectivity at t_opt crosses 0.95
  Censored xi2_inf; // ξ²_opt at the largest size, converged to 2%
  Censored n_oat;   // OAT size with the same optimal squeezing as xi2_inf
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  std::vector<ScalingReduction> reductions;
};

struct ScalingScanSpec {
  int dimension = 1;
  std::vector<int> lengths;
  std::vector<double> r_b;
  lattice::Boundary boundary = lattice::Boundary::open;
};

struct CellOutcome {
  ObservableSeries series;
  int n_b = 0;
};

/// Runs one cell of the scan for the given lattice and blockade radius.
using CellSimulator = std::function<CellOutcome(const lattice::LatticeSpec&, double r_b)>;

ScalingTable scaling_scan(const ScalingScanSpec& spec, const CellSimulator& simulate);

/// Rows must share r_b and be sorted by n. Linear interpolation in log N
/// between the bracketing sizes; censored at the largest size when no
/// crossing is found.
Censored collectivity_crossing(std::span<const ScalingRow> rows, double threshold = 0.95);

/// ξ²_opt at the largest size, censored unless it changed by < 2% from the
/// second largest.
Censored saturated_squeezing(std::span<const ScalingRow> rows, double tolerance = 0.02);

/// Optimal one-axis-twisting squeezing as a function of N, cached and
/// checked to decrease strictly before inversion.
class OatCurve {
 public:
  // N = 2 only reaches its infimum as the Bloch vector vanishes, so the curve starts at 3.
  static constexpr std::size_t kMinSize = 3;

  explicit OatCurve(std::size_t n_max = 4096);

  double xi2(std::size_t n) const;
  std::size_t n_max() const { return n_max_; }

  /// N' with ξ²_OAT(N') = xi2, interpolated in log-log between integers.
  /// Values below the curve at n_max are censored at n_max, values above it at kMinSize.
  Censored effective_size(double xi2) const;

 private:
  std::size_t n_max_;
  mutable std::map<std::size_t, double> cache_;
};

}  // namespace softsqueeze::analysis
