#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "softsqueeze/lattice.hpp"
#include "softsqueeze/models.hpp"
#include "softsqueeze/observables.hpp"

namespace softsqueeze::oracle {

using Complex = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using State = Eigen::VectorXcd;
using Density = Eigen::MatrixXcd;
using models::Axis;

inline constexpr std::size_t kMaxStateSpins = 14;
inline constexpr std::size_t kMaxLindbladSpins = 8;

/// Spin-1/2 operators on the 2^N computational basis. Bit i of a basis index
/// is 1 when spin i points up (s_i^z = +1/2).
class DenseOperatorSet {
 public:
  explicit DenseOperatorSet(std::size_t n_spins, std::size_t max_spins = kMaxStateSpins);

  std::size_t n_spins() const { return n_; }
  std::size_t dim() const { return dim_; }

  SparseOp zero() const;
  SparseOp identity() const;
  SparseOp spin(std::size_t i, Axis a) const;
  SparseOp pair(std::size_t i, Axis a, std::size_t j, Axis b) const;
  SparseOp raising(std::size_t i) const;
  SparseOp lowering(std::size_t i) const;
  SparseOp number(std::size_t i) const;  // 1/2 + s^z
  SparseOp collective(Axis a) const;

  /// Quantum counterpart of the classical drift model. The Ising form keeps
  /// J_ij s^z s^z plus (optionally) Σ B_i^∥ s^z; constants are dropped.
  SparseOp hamiltonian(const models::ModelSpec& model, const lattice::CouplingMatrix& couplings) const;

  State coherent_state(Axis a) const;

 private:
  struct Factor {
    std::size_t site;
    char op;  // 'x', 'y', 'z', '+', '-', 'n'
  };
  SparseOp product(std::span<const Factor> factors, Complex coef = 1.0) const;

  std::size_t n_;
  std::size_t dim_;
};

double hermiticity_error(const SparseOp& op);

/// Largest |[s_i^x, s_j^y] - iδ_ij s_i^z| over the sampled pairs.
double commutator_check(const DenseOperatorSet& ops, std::size_t samples = 6);

struct Channel {
  double rate;
  SparseOp jump;
};

/// Per-site channels for the model: rotating-frame variants get the three
/// dephasing channels (s_x, s_y, s_z); Ising/lab-frame variants get the
/// physical decay s^- and dephasing n.
std::vector<Channel> model_channels(const DenseOperatorSet& ops, const models::ModelSpec& model,
                                    const models::DissipationSpec& dissipation);

using StateVisitor = std::function<void(std::size_t, double, const State&)>;
using DensityVisitor = std::function<void(std::size_t, double, const Density&)>;

/// Propagates ψ along an ascending time grid (starting at or after t=0) with
/// truncated Taylor steps; each step keeps adding terms until they fall below
/// machine precision.
void evolve_state(const SparseOp& h, const State& psi0, std::span<const double> t_grid, const StateVisitor& visit);
std::vector<State> evolve_state(const SparseOp& h, const State& psi0, std::span<const double> t_grid);

struct LindbladOptions {
  bool monitor_positivity = true;
  double positivity_tolerance = 1e-9;
  double trace_tolerance = 1e-9;
};

void evolve_lindblad(const SparseOp& h, const std::vector<Channel>& channels, const Density& rho0,
                     std::span<const double> t_grid, const DensityVisitor& visit,
                     const LindbladOptions& options = {});
std::vector<Density> evolve_lindblad(const SparseOp& h, const std::vector<Channel>& channels, const Density& rho0,
                                     std::span<const double> t_grid, const LindbladOptions& options = {});

Moments state_moments(const DenseOperatorSet& ops, const State& psi);
Moments density_moments(const DenseOperatorSet& ops, const Density& rho);

/// Exact collective observables for a model started in the +axis coherent
/// state; Lindblad propagation whenever the dissipation is non-zero.
ObservableSeries exact_series(const models::ModelSpec& model, const lattice::CouplingMatrix& couplings,
                              const models::DissipationSpec& dissipation, models::Axis initial_axis,
                              std::span<const double> t_grid, const LindbladOptions& options = {});

/// OAT H = (J̄/2) S_z² from the +x coherent state in the Dicke basis.
ObservableSeries oat_reference(std::size_t n, double j_bar, std::span<const double> t_grid);
Moments oat_moments(std::size_t n, double j_bar, double t);
/// Closed-form OAT squeezing parameter; NaN once the Bloch vector has collapsed.
double oat_xi2(std::size_t n, double j_bar, double t);

struct OatOptimum {
  double xi2;
  double t;
};

/// Continuous minimisation of ξ²(t) for OAT (Brent search bracketed around the
/// first minimum).
OatOptimum oat_optimum(std::size_t n, double j_bar);

/// Product-form one- and two-spin correlators for Ising couplings with decay
/// (s^-, rate γ_-) and dephasing (n, rate γ_d), started from a product state
/// along a transverse axis.
ObservableSeries ising_closed_form(const lattice::CouplingMatrix& couplings, const models::DissipationSpec& dissipation,
                                   bool include_longitudinal, std::span<const double> t_grid,
                                   models::Axis initial_axis = models::Axis::x);

std::vector<double> uniform_grid(double t_max, std::size_t n_intervals);

}  // namespace softsqueeze::oracle
