#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace softsqueeze::lattice {

enum class Boundary { open, periodic };

struct LatticeSpec {
  int dimension = 1;              // 1 or 2
  std::vector<int> lengths{1};    // one entry per axis
  Boundary boundary = Boundary::open;

  std::size_t n_sites() const;
  void validate() const;
};

using Coordinate = std::array<double, 2>;

/// Site positions in lattice units, row-major (x fastest in 1D, last axis
/// fastest in 2D), together with the metric implied by the boundary.
class Lattice {
 public:
  explicit Lattice(LatticeSpec spec);

  const LatticeSpec& spec() const { return spec_; }
  std::size_t size() const { return coords_.size(); }
  const std::vector<Coordinate>& coordinates() const { return coords_; }

  /// Euclidean distance, minimum image under periodic boundaries.
  double distance(std::size_t i, std::size_t j) const;

  /// Site nearest to the geometric center; ties go to the lowest index.
  std::size_t central_site() const;

 private:
  LatticeSpec spec_;
  std::vector<Coordinate> coords_;
};

Lattice build_lattice(const LatticeSpec& spec);

enum class PotentialKind { soft_core_vdw, sharp_cutoff };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::soft_core_vdw;
  double r_b = 1.0;
  double j_plateau = 1.0;

  void validate() const;
  double operator()(double r) const;
};

/// Symmetric N×N couplings with zero diagonal plus the aggregates that the
/// models and planner need.
struct CouplingMatrix {
  std::size_t n_sites = 0;
  std::vector<double> values;  // row-major N×N
  double j_bar = 0.0;          // (N-1) j_bar = (1/N) sum_ij J_ij
  int n_b = 0;                 // neighbours within r_b of the bulk reference site
  std::vector<double> b_parallel;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n_sites + j]; }
  double row_sum(std::size_t i) const;
  /// N·J̄, the collective interaction scale used for transverse-field ratios.
  double n_j_bar() const { return static_cast<double>(n_sites) * j_bar; }

  /// Builds a matrix from explicit values and fills j_bar and b_parallel.
  /// n_b is left at zero since there is no geometry.
  static CouplingMatrix from_values(std::size_t n, std::vector<double> values);
};

CouplingMatrix coupling_matrix(const Lattice& lattice, const PotentialSpec& potential);

std::vector<double> longitudinal_field(const CouplingMatrix& couplings);

double mean_coupling(const CouplingMatrix& couplings);

}  // namespace softsqueeze::lattice
