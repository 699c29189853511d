// Exact Ising dynamics with decay and dephasing. The Hamiltonian and both
// jump operators are diagonal (or basis-permuting) in the z basis, so every
// spin not carrying a coherence behaves as a classical two-state Markov chain
// (up decays to down at rate γ_-) that imprints a phase on its neighbours.
// Correlators therefore factorise into products of single-spin averages.

#include <algorithm>
#include <cmath>
#include <complex>
#include <iterator>

#include "softsqueeze/analysis.hpp"
#include "softsqueeze/errors.hpp"
#include "softsqueeze/oracle.hpp"

namespace softsqueeze::oracle {

namespace {

using Complex = std::complex<double>;

// (e^{z t} - 1) / z with its small-argument series.
Complex expm1_over(Complex z, double t) {
  const Complex zt = z * t;
  if (std::abs(zt) < 1e-5) return t * (1.0 + zt / 2.0 + zt * zt / 6.0);
  return (std::exp(zt) - 1.0) / z;
}

struct SpectatorAverage {
  Complex up;
  Complex down;
};

// Weighted phase average of a spectator spin that rotates a coherence at
// frequency φ·s^z while decaying from up to down at rate γ.
SpectatorAverage spectator(double phi, double gamma, double p_up, double t) {
  const Complex half_phase(0.0, 0.5 * phi);
  const Complex up = p_up * std::exp((half_phase - gamma) * t);
  const Complex rotated = std::exp(-half_phase * t);
  const Complex down = rotated * ((1.0 - p_up) + gamma * p_up * expm1_over(2.0 * half_phase - gamma, t));
  return {up, down};
}

}  // namespace

ObservableSeries ising_closed_form(const lattice::CouplingMatrix& couplings, const models::DissipationSpec& dissipation,
                                   bool include_longitudinal, std::span<const double> t_grid,
                                   models::Axis initial_axis) {
  dissipation.validate();
  if (initial_axis == models::Axis::z)
    throw InvalidSpecError("closed-form Ising dynamics need a transverse initial axis (x or y)");
  const std::size_t n = couplings.n_sites;
  const double gm = dissipation.gamma_minus;
  const double coherence_rate = 0.5 * (dissipation.gamma_minus + dissipation.gamma_d);

  // Initial single-spin state: ρ_{↓↑} = ⟨s^+⟩ and p_up = 1/2 + ⟨s^z⟩.
  const Complex c0 = initial_axis == models::Axis::x ? Complex(0.5, 0.0) : Complex(0.0, 0.5);
  const double p_up0 = 0.5;

  std::vector<double> h(n, 0.0);
  if (include_longitudinal) h = couplings.b_parallel;

  // Spectators coupled to neither spin of a pair contribute a factor of one.
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (k != i && couplings(i, k) != 0.0) neighbours[i].push_back(k);
  std::vector<std::size_t> shared;
  shared.reserve(n);

  ObservableSeries series;
  series.n_sites = n;
  std::vector<Complex> phi_single(n * n), psi_single(n * n), plus(n), prefix(n + 1), suffix(n + 1);

  for (double t : t_grid) {
    const double p_up = p_up0 * std::exp(-gm * t);
    const double z = p_up - 0.5;

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) {
          phi_single[i * n + k] = 1.0;
          psi_single[i * n + k] = 0.0;
          continue;
        }
        const SpectatorAverage a = spectator(couplings(i, k), gm, p_up0, t);
        phi_single[i * n + k] = a.up + a.down;
        psi_single[i * n + k] = 0.5 * (a.up - a.down);
      }
    }

    Moments m;
    double zz_pairs = 0.0;
    Complex first_plus = 0.0, pz_sum = 0.0;
    double xx = 0.0, yy = 0.0, xy = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
      const Complex own = c0 * std::exp(Complex(-coherence_rate, h[i]) * t);
      prefix[0] = 1.0;
      for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * phi_single[i * n + k];
      suffix[n] = 1.0;
      for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * phi_single[i * n + k];
      plus[i] = own * prefix[n];
      first_plus += plus[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        // ⟨s_i^+ s_j^z⟩: spectator j weighted by its s^z value.
        pz_sum += own * prefix[j] * suffix[j + 1] * psi_single[i * n + j];
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Complex pp = c0 * c0 * std::exp(Complex(-2.0 * coherence_rate, h[i] + h[j]) * t);
        Complex pm = c0 * std::conj(c0) * std::exp(Complex(-2.0 * coherence_rate, h[i] - h[j]) * t);
        shared.clear();
        std::set_union(neighbours[i].begin(), neighbours[i].end(), neighbours[j].begin(), neighbours[j].end(),
                       std::back_inserter(shared));
        for (std::size_t k : shared) {
          if (k == i || k == j) continue;
          const SpectatorAverage a = spectator(couplings(i, k) + couplings(j, k), gm, p_up0, t);
          const SpectatorAverage b = spectator(couplings(i, k) - couplings(j, k), gm, p_up0, t);
          pp *= a.up + a.down;
          pm *= b.up + b.down;
        }
        // Ordered pairs (i,j) and (j,i): pp is symmetric, pm swaps to its conjugate.
        xx += pp.real() + pm.real();
        yy += -pp.real() + pm.real();
        xy += pp.imag();
        zz_pairs += 2.0 * z * z;
      }
    }

    const double quarter_n = 0.25 * static_cast<double>(n);
    m.first = {first_plus.real(), first_plus.imag(), static_cast<double>(n) * z};
    m.second[0] = xx + quarter_n;
    m.second[1] = yy + quarter_n;
    m.second[2] = zz_pairs + quarter_n;
    m.second[3] = xy;
    m.second[4] = pz_sum.real();
    m.second[5] = pz_sum.imag();
    series.push(t, m);
  }
  analysis::annotate(series);
  return series;
}

}  // namespace softsqueeze::oracle
