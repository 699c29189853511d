#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace softsqueeze {

/// Index of the symmetrized second moments ⟨S_μS_ν⟩_sym.
enum class Pair { xx = 0, yy = 1, zz = 2, xy = 3, xz = 4, yz = 5 };

constexpr std::size_t pair_index(int mu, int nu) {
  if (mu == nu) return static_cast<std::size_t>(mu);
  const int lo = mu < nu ? mu : nu;
  const int hi = mu < nu ? nu : mu;
  return lo == 0 ? (hi == 1 ? 3 : 4) : 5;
}

/// Collective first and symmetrized second moments at one instant.
struct Moments {
  std::array<double, 3> first{};
  std::array<double, 6> second{};

  double second_moment(int mu, int nu) const { return second[pair_index(mu, nu)]; }
  double covariance(int mu, int nu) const { return second_moment(mu, nu) - first[mu] * first[nu]; }
  double total_spin_squared() const { return second[0] + second[1] + second[2]; }
  double bloch_length() const;
};

/// Time-resolved collective observables; the common output of the trajectory
/// engine and the exact references.
struct ObservableSeries {
  std::size_t n_sites = 0;
  std::size_t n_traj = 0;  // 0 for exact references
  std::vector<double> times;
  std::vector<Moments> moments;
  std::vector<std::array<double, 3>> first_err;  // standard errors, zero when exact

  // Derived columns, filled by analysis::annotate.
  std::vector<double> xi2;  // NaN where the Bloch vector vanishes
  std::vector<double> collectivity;
  std::vector<double> contrast;

  std::optional<double> echo_time;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
  void push(double t, const Moments& m, const std::array<double, 3>& err = {0.0, 0.0, 0.0});
};

}  // namespace softsqueeze

namespace softsqueeze {

/// Classical: ⟨S_μS_ν⟩ is the plain trajectory average of T_μT_ν.
/// Diagonal-corrected: same-site contributions to ⟨S_μ²⟩ are replaced by
/// their exact value N/4.
enum class SecondMomentEstimator { classical, diagonal_corrected };

/// Per-block trajectory sums used to rebuild moments and to bootstrap.
/// Layout of each entry: [0,3) Σ_traj T_μ with T_μ = Σ_i S_i^μ, [3,9)
/// Σ_traj T_μT_ν in pair order, [9,12) Σ_traj Σ_i (S_i^μ)².
struct TrajectoryBlocks {
  using Sums = std::array<double, 12>;
  std::size_t n_sites = 0;
  std::size_t n_times = 0;
  SecondMomentEstimator estimator = SecondMomentEstimator::classical;
  std::vector<std::size_t> counts;  // trajectories per block
  std::vector<Sums> sums;           // block-major: sums[block * n_times + t]

  std::size_t n_blocks() const { return counts.size(); }
};

/// Ensemble moments from summed trajectory data.
Moments moments_from_sums(const TrajectoryBlocks::Sums& sums, double count, std::size_t n_sites,
                          SecondMomentEstimator estimator = SecondMomentEstimator::classical);

}  // namespace softsqueeze
