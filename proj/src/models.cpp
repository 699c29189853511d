#include "softsqueeze/models.hpp"

#include <algorithm>
#include <cmath>

#include "softsqueeze/errors.hpp"
#include "softsqueeze/oracle.hpp"

namespace softsqueeze::models {

std::string to_string(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

Axis axis_from_string(const std::string& name) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  throw InvalidSpecError("unknown axis '" + name + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ising: return "ising";
    case Variant::xx_rwa: return "xx_rwa";
    case Variant::lab_frame_driven: return "lab_frame_driven";
    case Variant::oat: return "oat";
    case Variant::goat: return "goat";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "ising") return Variant::ising;
  if (name == "xx_rwa" || name == "xx") return Variant::xx_rwa;
  if (name == "lab_frame_driven" || name == "lab") return Variant::lab_frame_driven;
  if (name == "oat") return Variant::oat;
  if (name == "goat") return Variant::goat;
  throw InvalidSpecError("unknown model variant '" + name + "'");
}

void ModelSpec::validate() const {
  if (!(b_field >= 0.0) || !std::isfinite(b_field)) throw InvalidSpecError("transverse field must be finite and >= 0");
}

void DissipationSpec::validate() const {
  if (!(gamma_minus >= 0.0) || !(gamma_d >= 0.0)) throw InvalidSpecError("decoherence rates must be >= 0");
}

ChannelRates DissipationSpec::rotating_frame_rates() const {
  return models::rotating_frame_rates(gamma_minus, gamma_d);
}

ChannelRates rotating_frame_rates(double gamma_minus, double gamma_d) {
  if (!(gamma_minus >= 0.0) || !(gamma_d >= 0.0)) throw InvalidSpecError("decoherence rates must be >= 0");
  const double transverse = 0.5 * (gamma_minus + gamma_d);
  return {gamma_minus, transverse, transverse};
}

DissipationSpec physical_rates(double f, double gamma_rg, double gamma_re, double gamma_eg) {
  if (!(f > 0.0 && f < 1.0)) throw InvalidSpecError("Rydberg fraction must lie in (0, 1)");
  if (!(gamma_rg >= 0.0 && gamma_re >= 0.0 && gamma_eg >= 0.0))
    throw InvalidSpecError("decay rates must be >= 0");
  return {f * gamma_rg + (1.0 - f) * gamma_eg, f * gamma_re};
}

DriftModel::DriftModel(const ModelSpec& model, const lattice::CouplingMatrix& couplings)
    : model_(model), n_(couplings.n_sites), b_parallel_(couplings.b_parallel), j_bar_(couplings.j_bar) {
  model_.validate();
  row_start_.reserve(n_ + 1);
  row_start_.push_back(0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = couplings(i, j);
      if (v != 0.0) {
        col_.push_back(j);
        val_.push_back(v);
      }
    }
    row_start_.push_back(col_.size());
  }
  longitudinal_ = model_.include_longitudinal || model_.variant == Variant::lab_frame_driven;
  if (model_.variant == Variant::lab_frame_driven && model_.detuning_compensation && n_ > 0) {
    double s = 0.0;
    for (double b : b_parallel_) s += b;
    delta_ = s / static_cast<double>(n_);
  }
  const bool no_bias = !longitudinal_ || std::all_of(b_parallel_.begin(), b_parallel_.end(), [](double b) { return b == 0.0; });
  const bool no_drive = model_.variant != Variant::lab_frame_driven || model_.b_field == 0.0;
  vanishing_ = val_.empty() && j_bar_ == 0.0 && delta_ == 0.0 && no_bias && no_drive;
}

void DriftModel::size_error(std::size_t n) const {
  throw DimensionError("spin configuration has " + std::to_string(n) + " spins, couplings have " +
                                    std::to_string(n_));
}

void DriftModel::fields(std::span<const Vec3> spins, std::span<Vec3> out) const {
  check_size(spins.size());
  check_size(out.size());
  switch (model_.variant) {
    case Variant::ising:
    case Variant::lab_frame_driven: {
      const double bx = model_.variant == Variant::lab_frame_driven ? model_.b_field : 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        double hz = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) hz += val_[k] * spins[col_[k]][2];
        if (longitudinal_) hz += b_parallel_[i];
        out[i] = {bx, 0.0, hz - delta_};
      }
      break;
    }
    case Variant::xx_rwa:
      for (std::size_t i = 0; i < n_; ++i) {
        double hy = 0.0, hz = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
          const Vec3& s = spins[col_[k]];
          hy += val_[k] * s[1];
          hz += val_[k] * s[2];
        }
        out[i] = {0.0, 0.5 * hy, 0.5 * hz};
      }
      break;
    case Variant::oat: {
      double total_z = 0.0;
      for (const Vec3& s : spins) total_z += s[2];
      for (std::size_t i = 0; i < n_; ++i) out[i] = {0.0, 0.0, j_bar_ * (total_z - spins[i][2])};
      break;
    }
    case Variant::goat: {
      double total_x = 0.0;
      for (const Vec3& s : spins) total_x += s[0];
      for (std::size_t i = 0; i < n_; ++i) {
        Vec3 h{0.0, 0.0, 0.0};
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
          const Vec3& s = spins[col_[k]];
          for (int a = 0; a < 3; ++a) h[a] += val_[k] * s[a];
        }
        h[0] -= j_bar_ * (total_x - spins[i][0]);
        out[i] = h;
      }
      break;
    }
  }
}

Vec3 DriftModel::field(std::span<const Vec3> spins, std::size_t i) const {
  std::vector<Vec3> out(n_);
  fields(spins, out);
  return out.at(i);
}

double DriftModel::energy(std::span<const Vec3> spins) const {
  check_size(spins.size());
  double e = 0.0;
  switch (model_.variant) {
    case Variant::ising:
    case Variant::lab_frame_driven: {
      const double bx = model_.variant == Variant::lab_frame_driven ? model_.b_field : 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        double hz = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) hz += val_[k] * spins[col_[k]][2];
        e += 0.5 * hz * spins[i][2];
        if (longitudinal_) e += b_parallel_[i] * spins[i][2];
        e += bx * spins[i][0] - delta_ * spins[i][2];
      }
      break;
    }
    case Variant::xx_rwa:
      for (std::size_t i = 0; i < n_; ++i) {
        double hy = 0.0, hz = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
          hy += val_[k] * spins[col_[k]][1];
          hz += val_[k] * spins[col_[k]][2];
        }
        e += 0.25 * (hy * spins[i][1] + hz * spins[i][2]);
      }
      break;
    case Variant::oat: {
      double tz = 0.0, self = 0.0;
      for (const Vec3& s : spins) {
        tz += s[2];
        self += s[2] * s[2];
      }
      e = 0.5 * j_bar_ * (tz * tz - self);
      break;
    }
    case Variant::goat: {
      double tx = 0.0, self = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        tx += spins[i][0];
        self += spins[i][0] * spins[i][0];
        double dot = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
          const Vec3& s = spins[col_[k]];
          dot += val_[k] * (s[0] * spins[i][0] + s[1] * spins[i][1] + s[2] * spins[i][2]);
        }
        e += 0.5 * dot;
      }
      e -= 0.5 * j_bar_ * (tx * tx - self);
      break;
    }
  }
  return e;
}

Vec3 drift_field(const ModelSpec& model, const lattice::CouplingMatrix& couplings, std::span<const Vec3> config,
                 std::size_t i) {
  if (i >= couplings.n_sites) throw DimensionError("site index out of range");
  return DriftModel(model, couplings).field(config, i);
}

double goat_decomposition_check(const lattice::CouplingMatrix& couplings) {
  const std::size_t n = couplings.n_sites;
  if (n > 10) throw ResourceError("gOAT decomposition check is limited to N <= 10");
  oracle::DenseOperatorSet ops(n, 10);
  ModelSpec xx{.variant = Variant::xx_rwa};
  ModelSpec goat{.variant = Variant::goat};
  oracle::SparseOp remainder = ops.zero();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      remainder += (couplings.j_bar - couplings(i, j)) * ops.pair(i, Axis::x, j, Axis::x);
  Eigen::MatrixXcd diff = Eigen::MatrixXcd(ops.hamiltonian(xx, couplings)) -
                          0.5 * Eigen::MatrixXcd(ops.hamiltonian(goat, couplings)) -
                          0.5 * Eigen::MatrixXcd(remainder);
  const std::complex<double> shift = diff.trace() / static_cast<double>(ops.dim());
  diff.diagonal().array() -= shift;
  return diff.cwiseAbs().maxCoeff();
}

}  // namespace softsqueeze::models
