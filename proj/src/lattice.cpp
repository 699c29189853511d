#include "softsqueeze/lattice.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "softsqueeze/errors.hpp"

namespace softsqueeze::lattice {

namespace {

// Distances equal to r_b up to rounding count as inside the blockade.
constexpr double kTieTolerance = 1e-9;

}  // namespace

std::size_t LatticeSpec::n_sites() const {
  std::size_t n = 1;
  for (int len : lengths) n *= static_cast<std::size_t>(len);
  return n;
}

void LatticeSpec::validate() const {
  if (dimension != 1 && dimension != 2)
    throw InvalidSpecError("lattice dimension must be 1 or 2, got " + std::to_string(dimension));
  if (static_cast<int>(lengths.size()) != dimension)
    throw InvalidSpecError("lattice needs one length per axis");
  for (int len : lengths)
    if (len < 1) throw InvalidSpecError("lattice axis length must be >= 1");
}

Lattice::Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.dimension == 1) {
    for (int x = 0; x < spec_.lengths[0]; ++x) coords_.push_back({double(x), 0.0});
  } else {
    for (int r = 0; r < spec_.lengths[0]; ++r)
      for (int c = 0; c < spec_.lengths[1]; ++c) coords_.push_back({double(r), double(c)});
  }
}

double Lattice::distance(std::size_t i, std::size_t j) const {
  double d2 = 0.0;
  for (int axis = 0; axis < spec_.dimension; ++axis) {
    double d = std::abs(coords_[i][axis] - coords_[j][axis]);
    if (spec_.boundary == Boundary::periodic) {
      const double len = spec_.lengths[axis];
      d = std::min(d, len - d);
    }
    d2 += d * d;
  }
  return std::sqrt(d2);
}

std::size_t Lattice::central_site() const {
  Coordinate center{0.0, 0.0};
  for (int axis = 0; axis < spec_.dimension; ++axis) center[axis] = 0.5 * (spec_.lengths[axis] - 1);
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    const double dx = coords_[i][0] - center[0];
    const double dy = coords_[i][1] - center[1];
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2 - 1e-12) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

Lattice build_lattice(const LatticeSpec& spec) { return Lattice(spec); }

void PotentialSpec::validate() const {
  if (!(r_b > 0.0)) throw InvalidSpecError("blockade radius r_b must be positive");
  if (!(j_plateau > 0.0)) throw InvalidSpecError("plateau coupling must be positive");
}

double PotentialSpec::operator()(double r) const {
  switch (kind) {
    case PotentialKind::soft_core_vdw: {
      const double x = r / r_b;
      const double x3 = x * x * x;
      return j_plateau / (1.0 + x3 * x3);
    }
    case PotentialKind::sharp_cutoff:
      return (r > 0.0 && r <= r_b + kTieTolerance) ? j_plateau : 0.0;
  }
  return 0.0;
}

double CouplingMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_sites; ++j) s += values[i * n_sites + j];
  return s;
}

double mean_coupling(const CouplingMatrix& couplings) {
  const std::size_t n = couplings.n_sites;
  if (n < 2) return 0.0;
  double total = 0.0;
  for (double v : couplings.values) total += v;
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<double> longitudinal_field(const CouplingMatrix& couplings) {
  std::vector<double> b(couplings.n_sites);
  for (std::size_t i = 0; i < couplings.n_sites; ++i) b[i] = 0.5 * couplings.row_sum(i);
  return b;
}

CouplingMatrix CouplingMatrix::from_values(std::size_t n, std::vector<double> values) {
  if (values.size() != n * n) throw DimensionError("coupling matrix must have N*N entries");
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i * n + i] != 0.0) throw InvalidSpecError("coupling matrix diagonal must be zero");
    for (std::size_t j = 0; j < i; ++j) {
      if (values[i * n + j] != values[j * n + i]) throw InvalidSpecError("coupling matrix must be symmetric");
      if (values[i * n + j] < 0.0) throw InvalidSpecError("couplings must be non-negative");
    }
  }
  CouplingMatrix m;
  m.n_sites = n;
  m.values = std::move(values);
  m.j_bar = mean_coupling(m);
  m.b_parallel = longitudinal_field(m);
  return m;
}

CouplingMatrix coupling_matrix(const Lattice& lattice, const PotentialSpec& potential) {
  potential.validate();
  const std::size_t n = lattice.size();
  CouplingMatrix m;
  m.n_sites = n;
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double v = potential(lattice.distance(i, j));
      m.values[i * n + j] = v;
      m.values[j * n + i] = v;
    }
  }
  m.j_bar = mean_coupling(m);
  m.b_parallel = longitudinal_field(m);

  const std::size_t ref = lattice.spec().boundary == Boundary::periodic ? 0 : lattice.central_site();
  for (std::size_t j = 0; j < n; ++j)
    if (j != ref && lattice.distance(ref, j) <= potential.r_b + kTieTolerance) ++m.n_b;
  return m;
}

}  // namespace softsqueeze::lattice
