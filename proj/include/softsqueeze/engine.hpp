#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "softsqueeze/lattice.hpp"
#include "softsqueeze/models.hpp"
#include "softsqueeze/observables.hpp"

namespace softsqueeze::dtwa {

using models::Axis;
using models::Vec3;
using Rng = std::mt19937_64;

struct TrajectoryState {
  std::vector<Vec3> spins;
  double time = 0.0;
};

struct EnsembleSpec {
  std::size_t n_traj = 1;
  double dt = 0.02;
  double t_max = 1.0;
  std::size_t sample_stride = 1;
  std::uint64_t master_seed = 0;
  Axis initial_axis = Axis::z;

  void validate() const;
  /// Number of integration steps, round(t_max/dt).
  std::size_t n_steps() const;
};

struct RunOptions {
  unsigned workers = 0;  // 0: SOFTSQUEEZE_WORKERS or hardware concurrency
  std::size_t block_size = 64;
  bool debug_checks = false;
  /// Test hook: start every trajectory from the mean state (transverse
  /// components zero) instead of sampling the discrete Wigner function.
  bool unsampled_initial = false;
  SecondMomentEstimator estimator = SecondMomentEstimator::classical;
};

/// Seed of trajectory `index`; depends only on (master_seed, index).
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Discrete Wigner sample of the +axis coherent state: the component along
/// the axis is +1/2 and each transverse component is ±1/2 with equal odds.
TrajectoryState sample_initial(std::size_t n, Axis axis, Rng& rng);

/// One operator-split step: RK4 for dS_i/dt = Ω_i × S_i (each spin then
/// rescaled to its pre-step length), followed by exact rotations about x, y,
/// z through Gaussian angles of variance γ_μ·dt. Returns max_i |Ω_i|·dt at
/// the start of the step.
double step_trajectory(TrajectoryState& state, const models::DriftModel& drift, const models::ChannelRates& rates,
                       double dt, Rng& rng);

/// π rotation about x: (S_x, S_y, S_z) -> (S_x, -S_y, -S_z).
void apply_echo(TrajectoryState& state);

struct EnsembleResult {
  ObservableSeries series;
  TrajectoryBlocks blocks;
  std::size_t n_steps = 0;
  std::optional<std::size_t> echo_step;
  double max_norm_deviation = 0.0;  // max over trajectories, spins and steps
  double max_field_dt = 0.0;
};

EnsembleResult run_ensemble(const models::ModelSpec& model, const lattice::CouplingMatrix& couplings,
                            const models::DissipationSpec& dissipation, const EnsembleSpec& ensemble,
                            const RunOptions& options = {});

/// Single trajectory recorded at every sample_stride step; used for
/// conservation diagnostics.
std::vector<TrajectoryState> run_trajectory(const models::ModelSpec& model, const lattice::CouplingMatrix& couplings,
                                            const models::DissipationSpec& dissipation, const EnsembleSpec& ensemble,
                                            std::uint64_t trajectory_index, const RunOptions& options = {});

/// Worker count actually used for `requested` (0 = automatic).
unsigned resolve_workers(unsigned requested);

}  // namespace softsqueeze::dtwa
