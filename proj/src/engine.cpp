#include "softsqueeze/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "softsqueeze/analysis.hpp"
#include "softsqueeze/errors.hpp"

namespace softsqueeze::dtwa {

namespace {

constexpr double kFieldStepWarning = 0.2;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm2(const Vec3& a) { return a[0] * a[0] + a[1] * a[1] + a[2] * a[2]; }

// Rotation of s about axis `a` by angle θ (right-handed).
void rotate(Vec3& s, int a, double theta) {
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double sb = s[b], sc = s[c];
  s[b] = cs * sb - sn * sc;
  s[c] = sn * sb + cs * sc;
}

struct Workspace {
  std::vector<Vec3> fields, k1, k2, k3, k4, tmp;
  std::vector<double> norms;
  explicit Workspace(std::size_t n) : fields(n), k1(n), k2(n), k3(n), k4(n), tmp(n), norms(n) {}
};

double derivative(const models::DriftModel& drift, std::span<const Vec3> s, std::vector<Vec3>& fields,
                  std::vector<Vec3>& out) {
  drift.fields(s, fields);
  double max_field = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = cross(fields[i], s[i]);
    max_field = std::max(max_field, norm2(fields[i]));
  }
  return std::sqrt(max_field);
}

double rk4_step(const models::DriftModel& drift, std::vector<Vec3>& s, double dt, Workspace& w) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) w.norms[i] = std::sqrt(norm2(s[i]));
  const double max_field = derivative(drift, s, w.fields, w.k1);
  auto stage = [&](const std::vector<Vec3>& k, double h) {
    for (std::size_t i = 0; i < n; ++i)
      for (int a = 0; a < 3; ++a) w.tmp[i][a] = s[i][a] + h * k[i][a];
  };
  stage(w.k1, 0.5 * dt);
  derivative(drift, w.tmp, w.fields, w.k2);
  stage(w.k2, 0.5 * dt);
  derivative(drift, w.tmp, w.fields, w.k3);
  stage(w.k3, dt);
  derivative(drift, w.tmp, w.fields, w.k4);
  // Restore each spin's length by rescaling only the components the step
  // moved, so components with zero drift (S_z under Ising) stay bit-exact.
  for (std::size_t i = 0; i < n; ++i) {
    bool moved[3];
    double fixed = 0.0, free = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double inc = dt / 6.0 * (w.k1[i][a] + 2.0 * w.k2[i][a] + 2.0 * w.k3[i][a] + w.k4[i][a]);
      moved[a] = inc != 0.0;
      s[i][a] += inc;
      (moved[a] ? free : fixed) += s[i][a] * s[i][a];
    }
    const double target = w.norms[i] * w.norms[i] - fixed;
    if (free > 0.0 && target > 0.0) {
      const double scale = std::sqrt(target / free);
      for (int a = 0; a < 3; ++a)
        if (moved[a]) s[i][a] *= scale;
    }
  }
  return max_field;
}

void apply_dephasing(std::vector<Vec3>& s, const models::ChannelRates& rates, double dt, Rng& rng, bool debug_checks) {
  if (!rates.any()) return;
  const double sigma[3] = {std::sqrt(rates.x * dt), std::sqrt(rates.y * dt), std::sqrt(rates.z * dt)};
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& spin : s) {
    const double before = norm2(spin);
    for (int a = 0; a < 3; ++a)
      if (sigma[a] > 0.0) rotate(spin, a, sigma[a] * gauss(rng));
    if (debug_checks && std::abs(norm2(spin) - before) > 1e-12)
      throw NumericalError("dephasing rotation changed a spin length");
  }
}

double step_with(TrajectoryState& state, const models::DriftModel& drift, const models::ChannelRates& rates,
                 double dt, Rng& rng, Workspace& w, bool debug_checks) {
  auto& s = state.spins;
  const double max_field = drift.vanishing() ? 0.0 : rk4_step(drift, s, dt, w);
  apply_dephasing(s, rates, dt, rng, debug_checks);
  state.time += dt;
  return max_field * dt;
}

void check_finite(const TrajectoryState& state, std::uint64_t traj, std::size_t step) {
  for (std::size_t i = 0; i < state.spins.size(); ++i) {
    for (double c : state.spins[i]) {
      if (!std::isfinite(c)) {
        std::ostringstream msg;
        msg << "non-finite spin component in trajectory " << traj << " at step " << step << " (t = " << state.time
            << ", site " << i << ")";
        throw NumericalError(msg.str());
      }
    }
  }
}

void validate_dissipation(const models::ModelSpec& model, const models::DissipationSpec& dissipation) {
  dissipation.validate();
  if (dissipation.any() && !model.rotating_frame())
    throw InvalidSpecError("trajectory dissipation is only available for rotating-frame models (xx_rwa, oat, goat)");
}

Rng trajectory_rng(std::uint64_t master, std::uint64_t index) {
  const std::uint64_t s = trajectory_seed(master, index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace

void EnsembleSpec::validate() const {
  if (n_traj < 1) throw InvalidSpecError("n_traj must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidSpecError("dt must be positive");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidSpecError("t_max must be positive");
  if (sample_stride < 1) throw InvalidSpecError("sample_stride must be >= 1");
}

std::size_t EnsembleSpec::n_steps() const {
  return static_cast<std::size_t>(std::max(1.0, std::round(t_max / dt)));
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SOFTSQUEEZE_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrajectoryState sample_initial(std::size_t n, Axis axis, Rng& rng) {
  TrajectoryState state;
  state.spins.resize(n);
  const int a = static_cast<int>(axis);
  for (auto& s : state.spins) {
    s[a] = 0.5;
    s[(a + 1) % 3] = (rng() >> 63) ? 0.5 : -0.5;
    s[(a + 2) % 3] = (rng() >> 63) ? 0.5 : -0.5;
  }
  return state;
}

double step_trajectory(TrajectoryState& state, const models::DriftModel& drift, const models::ChannelRates& rates,
                       double dt, Rng& rng) {
  Workspace w(state.spins.size());
  return step_with(state, drift, rates, dt, rng, w, false);
}

void apply_echo(TrajectoryState& state) {
  for (auto& s : state.spins) {
    s[1] = -s[1];
    s[2] = -s[2];
  }
}

namespace {

// Runs one trajectory, calling `record(time_index, state)` on each sample.
template <typename Record>
void integrate(const models::DriftModel& drift, const models::ChannelRates& rates, const EnsembleSpec& ensemble,
               std::optional<std::size_t> echo_step, std::uint64_t traj, const RunOptions& options, Workspace& w,
               double& max_norm_dev, double& max_field_dt, Record&& record) {
  Rng rng = trajectory_rng(ensemble.master_seed, traj);
  TrajectoryState state = sample_initial(drift.size(), ensemble.initial_axis, rng);
  if (options.unsampled_initial) {
    const int a = static_cast<int>(ensemble.initial_axis);
    for (auto& s : state.spins) {
      s[(a + 1) % 3] = 0.0;
      s[(a + 2) % 3] = 0.0;
    }
  }
  std::vector<double> initial_norm(state.spins.size());
  for (std::size_t i = 0; i < state.spins.size(); ++i) initial_norm[i] = norm2(state.spins[i]);

  const std::size_t n_steps = ensemble.n_steps();
  std::size_t slot = 0;
  record(slot++, state);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    max_field_dt = std::max(max_field_dt, step_with(state, drift, rates, ensemble.dt, rng, w, options.debug_checks));
    state.time = static_cast<double>(k) * ensemble.dt;
    check_finite(state, traj, k);
    for (std::size_t i = 0; i < state.spins.size(); ++i)
      max_norm_dev = std::max(max_norm_dev, std::abs(norm2(state.spins[i]) - initial_norm[i]));
    if (k % ensemble.sample_stride == 0) record(slot++, state);
    if (echo_step && k == *echo_step) apply_echo(state);
  }
}

}  // namespace

EnsembleResult run_ensemble(const models::ModelSpec& model, const lattice::CouplingMatrix& couplings,
                            const models::DissipationSpec& dissipation, const EnsembleSpec& ensemble,
                            const RunOptions& options) {
  ensemble.validate();
  validate_dissipation(model, dissipation);
  const models::DriftModel drift(model, couplings);
  const models::ChannelRates rates =
      model.rotating_frame() ? dissipation.rotating_frame_rates() : models::ChannelRates{};
  const std::size_t n = couplings.n_sites;
  const std::size_t n_steps = ensemble.n_steps();
  const std::size_t n_times = n_steps / ensemble.sample_stride + 1;
  std::optional<std::size_t> echo_step;
  if (model.echo_pulse) echo_step = n_steps / 2;

  const std::size_t block = std::max<std::size_t>(1, options.block_size);
  const std::size_t n_blocks = (ensemble.n_traj + block - 1) / block;

  EnsembleResult result;
  result.n_steps = n_steps;
  result.echo_step = echo_step;
  TrajectoryBlocks& blocks = result.blocks;
  blocks.n_sites = n;
  blocks.n_times = n_times;
  blocks.estimator = options.estimator;
  blocks.counts.assign(n_blocks, 0);
  blocks.sums.assign(n_blocks * n_times, TrajectoryBlocks::Sums{});

  std::vector<double> block_norm_dev(n_blocks, 0.0), block_field_dt(n_blocks, 0.0);
  std::vector<std::exception_ptr> errors(n_blocks);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    Workspace w(n);
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        const std::size_t first = b * block;
        const std::size_t last = std::min(ensemble.n_traj, first + block);
        TrajectoryBlocks::Sums* sums = &blocks.sums[b * n_times];
        for (std::size_t traj = first; traj < last; ++traj) {
          integrate(drift, rates, ensemble, echo_step, traj, options, w, block_norm_dev[b], block_field_dt[b],
                    [&](std::size_t slot, const TrajectoryState& state) {
                      double t[3] = {0.0, 0.0, 0.0};
                      double d[3] = {0.0, 0.0, 0.0};
                      for (const Vec3& s : state.spins)
                        for (int a = 0; a < 3; ++a) {
                          t[a] += s[a];
                          d[a] += s[a] * s[a];
                        }
                      auto& acc = sums[slot];
                      for (int a = 0; a < 3; ++a) {
                        acc[a] += t[a];
                        acc[9 + a] += d[a];
                        for (int c = a; c < 3; ++c) acc[3 + pair_index(a, c)] += t[a] * t[c];
                      }
                    });
        }
        blocks.counts[b] = last - first;
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };

  const unsigned n_workers = std::min<unsigned>(resolve_workers(options.workers), static_cast<unsigned>(n_blocks));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_workers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t b = 0; b < n_blocks; ++b) {
    result.max_norm_deviation = std::max(result.max_norm_deviation, block_norm_dev[b]);
    result.max_field_dt = std::max(result.max_field_dt, block_field_dt[b]);
  }

  ObservableSeries& series = result.series;
  series.n_sites = n;
  series.n_traj = ensemble.n_traj;
  const double count = static_cast<double>(ensemble.n_traj);
  for (std::size_t k = 0; k < n_times; ++k) {
    TrajectoryBlocks::Sums total{};
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const auto& s = blocks.sums[b * n_times + k];
      for (std::size_t q = 0; q < total.size(); ++q) total[q] += s[q];
    }
    const Moments m = moments_from_sums(total, count, n, options.estimator);
    std::array<double, 3> err{0.0, 0.0, 0.0};
    if (ensemble.n_traj > 1) {
      for (int a = 0; a < 3; ++a) {
        const double var = (total[3 + a] / count - m.first[a] * m.first[a]) * count / (count - 1.0);
        err[a] = std::sqrt(std::max(0.0, var) / count);
      }
    }
    series.push(static_cast<double>(k * ensemble.sample_stride) * ensemble.dt, m, err);
  }
  if (echo_step) series.echo_time = static_cast<double>(*echo_step) * ensemble.dt;
  if (result.max_field_dt > kFieldStepWarning) {
    std::ostringstream msg;
    msg << "max |Omega| dt = " << result.max_field_dt << " exceeds " << kFieldStepWarning
        << "; reduce dt for accurate integration";
    series.warnings.push_back(msg.str());
  }
  analysis::annotate(series);
  return result;
}

std::vector<TrajectoryState> run_trajectory(const models::ModelSpec& model, const lattice::CouplingMatrix& couplings,
                                            const models::DissipationSpec& dissipation, const EnsembleSpec& ensemble,
                                            std::uint64_t trajectory_index, const RunOptions& options) {
  ensemble.validate();
  validate_dissipation(model, dissipation);
  const models::DriftModel drift(model, couplings);
  const models::ChannelRates rates =
      model.rotating_frame() ? dissipation.rotating_frame_rates() : models::ChannelRates{};
  std::optional<std::size_t> echo_step;
  if (model.echo_pulse) echo_step = ensemble.n_steps() / 2;
  Workspace w(couplings.n_sites);
  double norm_dev = 0.0, field_dt = 0.0;
  std::vector<TrajectoryState> out;
  integrate(drift, rates, ensemble, echo_step, trajectory_index, options, w, norm_dev, field_dt,
            [&](std::size_t, const TrajectoryState& s) { out.push_back(s); });
  return out;
}

}  // namespace softsqueeze::dtwa
