#include "softsqueeze/oracle.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

#include "softsqueeze/analysis.hpp"
#include "softsqueeze/errors.hpp"

namespace softsqueeze::oracle {

namespace {

using Triplet = Eigen::Triplet<Complex>;
constexpr Complex kI{0.0, 1.0};

char axis_op(Axis a) { return "xyz"[static_cast<int>(a)]; }

// Applies a single-site operator to basis index k. Returns false when the
// matrix element vanishes.
bool apply_factor(char op, std::size_t site, std::size_t& k, Complex& amp) {
  const std::size_t mask = std::size_t{1} << site;
  const bool up = (k & mask) != 0;
  switch (op) {
    case 'z': amp *= up ? 0.5 : -0.5; return true;
    case 'n': if (!up) return false; return true;
    case 'x': k ^= mask; amp *= 0.5; return true;
    case 'y': k ^= mask; amp *= up ? Complex(0.0, 0.5) : Complex(0.0, -0.5); return true;
    case '+': if (up) return false; k ^= mask; return true;
    case '-': if (!up) return false; k ^= mask; return true;
  }
  return false;
}

double inf_norm(const SparseOp& op) {
  double best = 0.0;
  for (int r = 0; r < op.outerSize(); ++r) {
    double s = 0.0;
    for (SparseOp::InnerIterator it(op, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

// Truncated Taylor series exp(h·A) v with A given as an action.
template <typename Vec, typename Apply>
Vec taylor_step(const Vec& v, double h, Apply&& apply) {
  Vec result = v;
  Vec term = v;
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  for (int k = 1; k <= 80; ++k) {
    term = apply(term) * (h / k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-17 * scale) return result;
  }
  throw NumericalError("Taylor propagator failed to converge");
}

template <typename Vec, typename Apply, typename Visit>
void propagate(const Vec& v0, std::span<const double> t_grid, double rate_bound, Apply&& apply, Visit&& visit) {
  if (t_grid.empty()) return;
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] >= t_grid[k - 1])) throw InvalidSpecError("time grid must be ascending");
  if (t_grid.front() < 0.0) throw InvalidSpecError("time grid must start at t >= 0");
  const double h_max = rate_bound > 0.0 ? 1.0 / rate_bound : std::numeric_limits<double>::infinity();
  Vec v = v0;
  double t = 0.0;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double target = t_grid[k];
    while (t < target) {
      const double remaining = target - t;
      const int pieces = static_cast<int>(std::ceil(remaining / h_max));
      const double h = remaining / std::max(1, pieces);
      v = taylor_step(v, h, apply);
      t = (pieces <= 1) ? target : t + h;
    }
    visit(k, target, v);
  }
}

}  // namespace

DenseOperatorSet::DenseOperatorSet(std::size_t n_spins, std::size_t max_spins) : n_(n_spins) {
  if (n_spins < 1) throw InvalidSpecError("operator set needs at least one spin");
  if (n_spins > max_spins)
    throw ResourceError("exact operators limited to N <= " + std::to_string(max_spins) + ", got N = " +
                        std::to_string(n_spins));
  dim_ = std::size_t{1} << n_spins;
}

SparseOp DenseOperatorSet::product(std::span<const Factor> factors, Complex coef) const {
  std::vector<Triplet> trips;
  trips.reserve(dim_);
  for (std::size_t col = 0; col < dim_; ++col) {
    std::size_t k = col;
    Complex amp = coef;
    bool alive = true;
    // Rightmost factor acts first.
    for (auto it = factors.rbegin(); it != factors.rend() && alive; ++it) alive = apply_factor(it->op, it->site, k, amp);
    if (alive && amp != Complex(0.0)) trips.emplace_back(static_cast<int>(k), static_cast<int>(col), amp);
  }
  SparseOp op(dim_, dim_);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

SparseOp DenseOperatorSet::zero() const { return SparseOp(dim_, dim_); }

SparseOp DenseOperatorSet::identity() const {
  SparseOp op(dim_, dim_);
  op.setIdentity();
  return op;
}

SparseOp DenseOperatorSet::spin(std::size_t i, Axis a) const {
  const Factor f[] = {{i, axis_op(a)}};
  return product(f);
}

SparseOp DenseOperatorSet::pair(std::size_t i, Axis a, std::size_t j, Axis b) const {
  const Factor f[] = {{i, axis_op(a)}, {j, axis_op(b)}};
  return product(f);
}

SparseOp DenseOperatorSet::raising(std::size_t i) const {
  const Factor f[] = {{i, '+'}};
  return product(f);
}

SparseOp DenseOperatorSet::lowering(std::size_t i) const {
  const Factor f[] = {{i, '-'}};
  return product(f);
}

SparseOp DenseOperatorSet::number(std::size_t i) const {
  const Factor f[] = {{i, 'n'}};
  return product(f);
}

SparseOp DenseOperatorSet::collective(Axis a) const {
  SparseOp total = zero();
  for (std::size_t i = 0; i < n_; ++i) total += spin(i, a);
  return total;
}

SparseOp DenseOperatorSet::hamiltonian(const models::ModelSpec& model,
                                       const lattice::CouplingMatrix& couplings) const {
  using models::Variant;
  if (couplings.n_sites != n_) throw DimensionError("couplings do not match operator set size");
  SparseOp h = zero();
  auto add_pairs = [&](Axis a, double scale) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (couplings(i, j) != 0.0) h += (scale * couplings(i, j)) * pair(i, a, j, a);
  };
  switch (model.variant) {
    case Variant::ising:
    case Variant::lab_frame_driven: {
      add_pairs(Axis::z, 1.0);
      const bool lab = model.variant == Variant::lab_frame_driven;
      if (model.include_longitudinal || lab)
        for (std::size_t i = 0; i < n_; ++i) h += couplings.b_parallel[i] * spin(i, Axis::z);
      if (lab) {
        models::DriftModel drift(model, couplings);
        h += model.b_field * collective(Axis::x) - drift.detuning() * collective(Axis::z);
      }
      break;
    }
    case Variant::xx_rwa:
      add_pairs(Axis::y, 0.5);
      add_pairs(Axis::z, 0.5);
      break;
    case Variant::oat: {
      const SparseOp sz = collective(Axis::z);
      h = (0.5 * couplings.j_bar) * SparseOp(sz * sz);
      break;
    }
    case Variant::goat: {
      add_pairs(Axis::x, 1.0);
      add_pairs(Axis::y, 1.0);
      add_pairs(Axis::z, 1.0);
      const SparseOp sx = collective(Axis::x);
      h -= (0.5 * couplings.j_bar) * SparseOp(sx * sx);
      break;
    }
  }
  h.prune(Complex(0.0), 0.0);
  return h;
}

State DenseOperatorSet::coherent_state(Axis a) const {
  Complex up = 1.0, down = 0.0;
  if (a == Axis::x) {
    up = down = 1.0 / std::sqrt(2.0);
  } else if (a == Axis::y) {
    up = 1.0 / std::sqrt(2.0);
    down = kI / std::sqrt(2.0);
  }
  State psi(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    Complex amp = 1.0;
    for (std::size_t i = 0; i < n_; ++i) amp *= (k >> i) & 1u ? up : down;
    psi[k] = amp;
  }
  return psi;
}

double hermiticity_error(const SparseOp& op) {
  const SparseOp diff = op - SparseOp(op.adjoint());
  double worst = 0.0;
  for (int r = 0; r < diff.outerSize(); ++r)
    for (SparseOp::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double commutator_check(const DenseOperatorSet& ops, std::size_t samples) {
  double worst = 0.0;
  const std::size_t n = ops.n_spins();
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t i = (s * 7) % n;
    const std::size_t j = (s * 3 + s / 2) % n;
    const SparseOp x = ops.spin(i, Axis::x);
    const SparseOp y = ops.spin(j, Axis::y);
    SparseOp comm = SparseOp(x * y) - SparseOp(y * x);
    if (i == j) comm -= kI * ops.spin(i, Axis::z);
    for (int r = 0; r < comm.outerSize(); ++r)
      for (SparseOp::InnerIterator it(comm, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

std::vector<Channel> model_channels(const DenseOperatorSet& ops, const models::ModelSpec& model,
                                    const models::DissipationSpec& dissipation) {
  dissipation.validate();
  std::vector<Channel> channels;
  const std::size_t n = ops.n_spins();
  if (model.rotating_frame()) {
    const models::ChannelRates r = dissipation.rotating_frame_rates();
    const double rates[3] = {r.x, r.y, r.z};
    for (int a = 0; a < 3; ++a)
      if (rates[a] > 0.0)
        for (std::size_t i = 0; i < n; ++i) channels.push_back({rates[a], ops.spin(i, static_cast<Axis>(a))});
  } else {
    if (dissipation.gamma_minus > 0.0)
      for (std::size_t i = 0; i < n; ++i) channels.push_back({dissipation.gamma_minus, ops.lowering(i)});
    if (dissipation.gamma_d > 0.0)
      for (std::size_t i = 0; i < n; ++i) channels.push_back({dissipation.gamma_d, ops.number(i)});
  }
  return channels;
}

void evolve_state(const SparseOp& h, const State& psi0, std::span<const double> t_grid, const StateVisitor& visit) {
  const double norm0 = psi0.squaredNorm();
  const SparseOp minus_ih = Complex(0.0, -1.0) * h;
  propagate(
      psi0, t_grid, inf_norm(h), [&](const State& v) -> State { return minus_ih * v; },
      [&](std::size_t k, double t, const State& psi) {
        if (std::abs(psi.squaredNorm() - norm0) > 1e-10 * norm0)
          throw NumericalError("state norm drifted beyond 1e-10 at t = " + std::to_string(t));
        visit(k, t, psi);
      });
}

std::vector<State> evolve_state(const SparseOp& h, const State& psi0, std::span<const double> t_grid) {
  std::vector<State> out;
  out.reserve(t_grid.size());
  evolve_state(h, psi0, t_grid, [&](std::size_t, double, const State& psi) { out.push_back(psi); });
  return out;
}

void evolve_lindblad(const SparseOp& h, const std::vector<Channel>& channels, const Density& rho0,
                     std::span<const double> t_grid, const DensityVisitor& visit, const LindbladOptions& options) {
  const Eigen::Index dim = h.rows();
  if (dim > (Eigen::Index{1} << kMaxLindbladSpins))
    throw ResourceError("Lindblad propagation limited to N <= " + std::to_string(kMaxLindbladSpins));
  // ρ' = Kρ + (Kρ)† + Σ γ L ρ L†, with K = -iH - ½ Σ γ L†L.
  SparseOp k_op = Complex(0.0, -1.0) * h;
  double bound = 2.0 * inf_norm(h);
  std::vector<SparseOp> jumps;
  std::vector<double> rates;
  for (const Channel& c : channels) {
    if (c.rate <= 0.0) continue;
    const SparseOp ldl = SparseOp(c.jump.adjoint()) * c.jump;
    k_op -= (0.5 * c.rate) * ldl;
    jumps.push_back(c.jump);
    rates.push_back(c.rate);
    const double ln = inf_norm(c.jump);
    bound += 2.0 * c.rate * ln * ln;
  }
  const double trace0 = rho0.trace().real();
  auto apply = [&](const Density& rho) -> Density {
    Density kr = k_op * rho;
    Density out = kr + kr.adjoint();
    for (std::size_t c = 0; c < jumps.size(); ++c) {
      const Density lr = jumps[c] * rho;
      out.noalias() += rates[c] * (jumps[c] * Density(lr.adjoint()));
    }
    return out;
  };
  propagate(rho0, t_grid, bound, apply, [&](std::size_t k, double t, const Density& rho) {
    if (std::abs(rho.trace().real() - trace0) > options.trace_tolerance)
      throw NumericalError("density-matrix trace drifted at t = " + std::to_string(t));
    if (options.monitor_positivity) {
      const Density herm = 0.5 * (rho + rho.adjoint());
      Eigen::SelfAdjointEigenSolver<Density> es(herm, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -options.positivity_tolerance)
        throw NumericalError("density matrix lost positivity at t = " + std::to_string(t));
    }
    visit(k, t, rho);
  });
}

std::vector<Density> evolve_lindblad(const SparseOp& h, const std::vector<Channel>& channels, const Density& rho0,
                                     std::span<const double> t_grid, const LindbladOptions& options) {
  std::vector<Density> out;
  out.reserve(t_grid.size());
  evolve_lindblad(
      h, channels, rho0, t_grid, [&](std::size_t, double, const Density& rho) { out.push_back(rho); }, options);
  return out;
}

Moments state_moments(const DenseOperatorSet& ops, const State& psi) {
  Moments m;
  State v[3];
  for (int a = 0; a < 3; ++a) {
    v[a] = ops.collective(static_cast<Axis>(a)) * psi;
    m.first[a] = psi.dot(v[a]).real();
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) m.second[pair_index(a, b)] = v[a].dot(v[b]).real();
  return m;
}

Moments density_moments(const DenseOperatorSet& ops, const Density& rho) {
  Moments m;
  SparseOp s[3];
  Density sr[3];
  for (int a = 0; a < 3; ++a) {
    s[a] = ops.collective(static_cast<Axis>(a));
    sr[a] = s[a] * rho;
    m.first[a] = sr[a].trace().real();
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      // Re Tr(S_b S_a ρ) is the symmetrized moment for Hermitian ρ.
      Complex tr = 0.0;
      for (int r = 0; r < s[b].outerSize(); ++r)
        for (SparseOp::InnerIterator it(s[b], r); it; ++it) tr += it.value() * sr[a](it.col(), it.row());
      m.second[pair_index(a, b)] = tr.real();
    }
  }
  return m;
}

namespace {

// Bit-flips every spin: the π pulse about x up to a global phase.
State flip_all(const State& psi) {
  const Eigen::Index dim = psi.size();
  State out(dim);
  for (Eigen::Index k = 0; k < dim; ++k) out[k] = psi[(dim - 1) ^ k];
  return out;
}

Density flip_all(const Density& rho) {
  const Eigen::Index dim = rho.rows();
  Density out(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b) out(a, b) = rho((dim - 1) ^ a, (dim - 1) ^ b);
  return out;
}

// Runs `evolve` over the grid, inserting an x π pulse at t_echo when set.
template <typename Vec, typename Evolve, typename Visit>
void with_echo(const Vec& v0, std::span<const double> grid, std::optional<double> t_echo, Evolve&& evolve,
               Visit&& visit) {
  if (!t_echo) {
    evolve(v0, grid, visit);
    return;
  }
  std::vector<double> first, second;
  for (double t : grid) (t <= *t_echo ? first : second).push_back(t);
  first.push_back(*t_echo);
  Vec at_echo = v0;
  std::size_t index = 0;
  evolve(v0, std::span<const double>(first), [&](std::size_t k, double t, const Vec& v) {
    if (k + 1 == first.size()) {
      at_echo = v;
      return;
    }
    visit(index++, t, v);
  });
  const Vec flipped = flip_all(at_echo);
  std::vector<double> shifted;
  for (double t : second) shifted.push_back(t - *t_echo);
  evolve(flipped, std::span<const double>(shifted),
         [&](std::size_t, double t, const Vec& v) { visit(index++, t + *t_echo, v); });
}

}  // namespace

ObservableSeries exact_series(const models::ModelSpec& model, const lattice::CouplingMatrix& couplings,
                              const models::DissipationSpec& dissipation, models::Axis initial_axis,
                              std::span<const double> t_grid, const LindbladOptions& options) {
  const std::size_t n = couplings.n_sites;
  const bool open = dissipation.any();
  DenseOperatorSet ops(n, open ? kMaxLindbladSpins : kMaxStateSpins);
  const SparseOp h = ops.hamiltonian(model, couplings);
  const State psi0 = ops.coherent_state(initial_axis);
  std::optional<double> t_echo;
  if (model.echo_pulse && !t_grid.empty()) t_echo = 0.5 * t_grid.back();

  ObservableSeries series;
  series.n_sites = n;
  series.echo_time = t_echo;
  if (!open) {
    with_echo(
        psi0, t_grid, t_echo,
        [&](const State& v, std::span<const double> g, const auto& vis) {
          evolve_state(h, v, g, [&](std::size_t k, double t, const State& s) { vis(k, t, s); });
        },
        [&](std::size_t, double t, const State& psi) { series.push(t, state_moments(ops, psi)); });
  } else {
    const auto channels = model_channels(ops, model, dissipation);
    const Density rho0 = psi0 * psi0.adjoint();
    with_echo(
        rho0, t_grid, t_echo,
        [&](const Density& v, std::span<const double> g, const auto& vis) {
          evolve_lindblad(
              h, channels, v, g, [&](std::size_t k, double t, const Density& r) { vis(k, t, r); }, options);
        },
        [&](std::size_t, double t, const Density& rho) { series.push(t, density_moments(ops, rho)); });
  }
  analysis::annotate(series);
  return series;
}

Moments oat_moments(std::size_t n, double j_bar, double t) {
  const double s = 0.5 * static_cast<double>(n);
  std::vector<Complex> c(n + 1);
  std::vector<double> m(n + 1), ap(n + 1);
  const double log_norm = -0.5 * static_cast<double>(n) * std::log(2.0);
  for (std::size_t k = 0; k <= n; ++k) {
    m[k] = static_cast<double>(k) - s;
    const double log_amp = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) + log_norm;
    const double phase = -0.5 * j_bar * m[k] * m[k] * t;
    c[k] = std::exp(log_amp) * Complex(std::cos(phase), std::sin(phase));
    ap[k] = std::sqrt(std::max(0.0, s * (s + 1.0) - m[k] * (m[k] + 1.0)));
  }
  double sz = 0.0, sz2 = 0.0, spsm = 0.0;
  Complex sp = 0.0, sp2 = 0.0, spz = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double p = std::norm(c[k]);
    sz += p * m[k];
    sz2 += p * m[k] * m[k];
    spsm += p * 2.0 * (s * (s + 1.0) - m[k] * m[k]);
    if (k + 1 <= n) {
      const Complex a = std::conj(c[k + 1]) * ap[k] * c[k];
      sp += a;
      spz += a * 0.5 * (m[k] + m[k + 1]);
    }
    if (k + 2 <= n) sp2 += std::conj(c[k + 2]) * ap[k + 1] * ap[k] * c[k];
  }
  Moments mo;
  mo.first = {sp.real(), sp.imag(), sz};
  // S± = S_x ± iS_y; {S+,S-} = 2(S² - S_z²).
  mo.second[0] = 0.25 * (2.0 * sp2.real() + spsm);
  mo.second[1] = 0.25 * (-2.0 * sp2.real() + spsm);
  mo.second[2] = sz2;
  mo.second[3] = 0.5 * sp2.imag();
  mo.second[4] = spz.real();
  mo.second[5] = spz.imag();
  return mo;
}

ObservableSeries oat_reference(std::size_t n, double j_bar, std::span<const double> t_grid) {
  if (n < 2) throw InvalidSpecError("OAT reference needs N >= 2");
  ObservableSeries series;
  series.n_sites = n;
  for (double t : t_grid) series.push(t, oat_moments(n, j_bar, t));
  analysis::annotate(series);
  return series;
}

double oat_xi2(std::size_t n, double j_bar, double t) {
  // H = (J̄/2) S_z², coherent state along x.
  const double nd = static_cast<double>(n);
  const double half = 0.5 * j_bar * t;
  const double c_half = std::cos(half);
  const double len = 0.5 * nd * std::pow(c_half, nd - 1.0);
  if (!(std::abs(len) > 1e-6 * nd)) return std::numeric_limits<double>::quiet_NaN();
  const double a = 1.0 - std::pow(std::cos(2.0 * half), nd - 2.0);
  const double b = 4.0 * std::sin(half) * std::pow(c_half, nd - 2.0);
  const double v_min = 0.25 * nd * (1.0 + 0.25 * (nd - 1.0) * (a - std::hypot(a, b)));
  return nd * v_min / (len * len);
}

OatOptimum oat_optimum(std::size_t n, double j_bar) {
  if (n < 2) throw InvalidSpecError("OAT optimum needs N >= 2");
  if (!(j_bar > 0.0)) throw InvalidSpecError("OAT optimum needs J̄ > 0");
  const double window = std::min(M_PI, 6.0 / std::sqrt(static_cast<double>(n))) / j_bar;
  constexpr int kScan = 2000;
  auto xi2_at = [&](double t) {
    const double v = oat_xi2(n, j_bar, t);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    const double v = xi2_at(window * k / kScan);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  const double lo = window * std::max(0, best - 1) / kScan;
  const double hi = window * std::min(kScan, best + 1) / kScan;
  const auto [t, v] = boost::math::tools::brent_find_minima(xi2_at, lo, hi, 52);
  return {v, t};
}

std::vector<double> uniform_grid(double t_max, std::size_t n_intervals) {
  std::vector<double> grid(n_intervals + 1);
  for (std::size_t k = 0; k <= n_intervals; ++k) grid[k] = t_max * static_cast<double>(k) / n_intervals;
  return grid;
}

}  // namespace softsqueeze::oracle
