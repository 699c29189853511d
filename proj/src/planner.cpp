#include "softsqueeze/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "softsqueeze/errors.hpp"

namespace softsqueeze::planner {

namespace {

using nlohmann::json;

SpeciesRecord make(std::string label, std::string element, std::string state, int n, double a_um,
                   double c6_ghz, double tau_us, double defect, std::optional<LifetimeFit> fit) {
  return {std::move(label), std::move(element), std::move(state), n, a_um, c6_ghz * 1e9, tau_us, defect, fit};
}

void check_record(const SpeciesRecord& s) {
  if (s.label.empty()) throw InvalidSpecError("species record without label");
  if (!(s.lattice_spacing_um > 0) || !(s.c6_over_2pi_hz_um6 > 0) || !(s.lifetime_us > 0) || s.n <= 0)
    throw InvalidSpecError("species " + s.label + ": lattice spacing, C6, lifetime and n must be positive");
  if (s.n_star() <= 0) throw InvalidSpecError("species " + s.label + ": n* must be positive");
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const bool same = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                        std::tolower(static_cast<unsigned char>(b[j - 1]));
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (same ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

void check_fraction(double f) {
  if (!(f > 0.0 && f < 0.25)) throw InvalidSpecError("Rydberg fraction f must lie in (0, 0.25)");
}

DressingParams from_delta_magnitude(double abs_delta, double f, const SpeciesRecord& species) {
  DressingParams p;
  p.f = f;
  p.omega = 2.0 * abs_delta * std::sqrt(f);
  p.delta = -abs_delta;  // C6 > 0 for every tabulated species
  p.r_b_phys_um = std::pow(species.c6_angular() / (2.0 * abs_delta), 1.0 / 6.0);
  p.r_b = p.r_b_phys_um / species.lattice_spacing_um;
  p.j0 = std::pow(p.omega, 4) / (8.0 * std::pow(p.delta, 3));
  return p;
}

}  // namespace

const std::vector<SpeciesRecord>& builtin_species() {
  static const std::vector<SpeciesRecord> table = {
      make("Sr88_41S3S1", "Sr", "5s41s 3S1", 41, 0.651, 1.5, 20.0, kSrTripletQuantumDefect, kSrLifetimeFit),
      make("Sr88_60S3S1", "Sr", "5s60s 3S1", 60, 1.79, 156.0, 61.3, kSrTripletQuantumDefect, kSrLifetimeFit),
      make("Sr88_80S3S1", "Sr", "5s80s 3S1", 80, 3.76, 4800.0, 137.0, kSrTripletQuantumDefect, kSrLifetimeFit),
      make("Rb87_60S", "Rb", "60S", 60, 1.74, 138.0, 101.0, 3.13, std::nullopt),
      make("Cs133_60S", "Cs", "60S", 60, 1.62, 107.0, 95.6, 4.05, std::nullopt),
  };
  return table;
}

std::vector<SpeciesRecord> load_species(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open species file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string(), e.what());
  }
  if (!doc.contains("version") || doc["version"] != 1) throw ConfigError(path.string() + ":version", "expected version 1");
  if (!doc.contains("species") || !doc["species"].is_array())
    throw ConfigError(path.string() + ":species", "missing species list");
  std::vector<SpeciesRecord> out;
  const auto& list = doc["species"];
  for (std::size_t k = 0; k < list.size(); ++k) {
    const auto& e = list[k];
    const std::string where = "species[" + std::to_string(k) + "]";
    try {
      SpeciesRecord s;
      s.label = e.at("label").get<std::string>();
      s.element = e.at("element").get<std::string>();
      s.state = e.at("state").get<std::string>();
      s.n = e.at("n").get<int>();
      s.lattice_spacing_um = e.at("lattice_spacing_um").get<double>();
      s.c6_over_2pi_hz_um6 = e.at("c6_over_2pi_ghz_um6").get<double>() * 1e9;
      s.lifetime_us = e.at("lifetime_us").get<double>();
      s.quantum_defect = e.at("quantum_defect").get<double>();
      if (e.contains("lifetime_fit"))
        s.fit = LifetimeFit{e["lifetime_fit"].at("a_per_us").get<double>(),
                            e["lifetime_fit"].at("b_per_us").get<double>()};
      check_record(s);
      out.push_back(std::move(s));
    } catch (const json::exception& ex) {
      throw ConfigError(where, ex.what());
    }
  }
  return out;
}

void save_species(const std::vector<SpeciesRecord>& species, const std::filesystem::path& path) {
  json list = json::array();
  for (const auto& s : species) {
    json e = {{"label", s.label},
              {"element", s.element},
              {"state", s.state},
              {"n", s.n},
              {"lattice_spacing_um", s.lattice_spacing_um},
              {"c6_over_2pi_ghz_um6", s.c6_over_2pi_hz_um6 / 1e9},
              {"lifetime_us", s.lifetime_us},
              {"quantum_defect", s.quantum_defect}};
    if (s.fit) e["lifetime_fit"] = {{"a_per_us", s.fit->a_per_us}, {"b_per_us", s.fit->b_per_us}};
    list.push_back(std::move(e));
  }
  std::ofstream out(path);
  if (!out) throw ResourceError("cannot write " + path.string());
  out << json{{"version", 1}, {"species", list}}.dump(2) << '\n';
}

const SpeciesRecord& find_species(const std::vector<SpeciesRecord>& table, const std::string& label) {
  for (const auto& s : table)
    if (s.label == label) return s;
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& s : table) ranked.emplace_back(edit_distance(label, s.label), s.label);
  std::sort(ranked.begin(), ranked.end());
  std::ostringstream msg;
  msg << "unknown species '" << label << "'; did you mean ";
  for (std::size_t k = 0; k < std::min<std::size_t>(3, ranked.size()); ++k)
    msg << (k ? ", " : "") << ranked[k].second;
  msg << "? available:";
  for (const auto& s : table) msg << ' ' << s.label;
  throw InvalidSpecError(msg.str());
}

DressingParams dressing_from(double omega, double f, const SpeciesRecord& species, std::optional<int> detuning_sign) {
  if (!(omega > 0)) throw InvalidSpecError("Rabi frequency must be positive");
  check_fraction(f);
  check_record(species);
  if (detuning_sign && *detuning_sign * species.c6_angular() >= 0)
    throw InvalidSpecError("detuning sign must be opposite to the sign of C6");
  auto p = from_delta_magnitude(omega / (2.0 * std::sqrt(f)), f, species);
  p.omega = omega;
  return p;
}

DressingParams dressing_for_blockade(double r_b, double f, const SpeciesRecord& species) {
  if (!(r_b > 0)) throw InvalidSpecError("blockade radius must be positive");
  check_fraction(f);
  check_record(species);
  const double r_phys = r_b * species.lattice_spacing_um;
  auto p = from_delta_magnitude(species.c6_angular() / (2.0 * std::pow(r_phys, 6)), f, species);
  p.r_b = r_b;
  p.r_b_phys_um = r_phys;
  return p;
}

std::vector<std::string> dressing_warnings(const DressingParams& params) {
  std::vector<std::string> w;
  if (params.f > kWeakDressingFraction) {
    std::ostringstream m;
    m << "Rydberg fraction f = " << params.f << " exceeds " << kWeakDressingFraction
      << "; the weak-dressing expansion loses accuracy";
    w.push_back(m.str());
  }
  return w;
}

double rydberg_fraction(double omega, double delta) { return omega * omega / (4.0 * delta * delta); }

Lifetime lifetime(double n, double quantum_defect, double a_fit, double b_fit) {
  const double n_star = n - quantum_defect;
  if (!(n_star > 0)) throw InvalidSpecError("effective principal quantum number must be positive");
  const double gamma = a_fit / (n_star * n_star * n_star) + b_fit / (n_star * n_star);
  if (!(gamma > 0)) throw InvalidSpecError("lifetime fit gives a nonpositive decay rate");
  return {gamma, 1.0 / gamma};
}

LevelParams scaling_project(const LevelParams& reference, double target_n_star, std::optional<LifetimeFit> fit) {
  if (!(reference.n_star > 0) || !(target_n_star > 0)) throw InvalidSpecError("n* must be positive");
  const double s = target_n_star / reference.n_star;
  const double inv3 = 1.0 / (s * s * s);
  LevelParams out = reference;
  out.n_star = target_n_star;
  out.omega *= inv3;
  out.delta *= inv3;
  out.j0 *= inv3;
  out.n_j_bar *= inv3;
  out.lattice_spacing_um *= std::pow(s, 7.0 / 3.0);
  out.c6 *= std::pow(s, 11.0);
  if (fit)
    out.gamma_per_us = lifetime(target_n_star, 0.0, fit->a_per_us, fit->b_per_us).gamma_per_us;
  else if (reference.gamma_per_us)
    out.gamma_per_us = *reference.gamma_per_us * inv3;
  return out;
}

ConstraintReport constraint_check(const DressingParams& params, double n_j_bar, const Constraints& limits,
                                  bool require_transverse) {
  ConstraintReport r;
  auto khz = [](double w) { return w / kTwoPi / 1e3; };
  if (params.omega > limits.omega_max) {
    r.omega_ok = false;
    std::ostringstream m;
    m << "Omega = 2pi x " << khz(params.omega) / 1e3 << " MHz exceeds 2pi x " << khz(limits.omega_max) / 1e3
      << " MHz";
    r.violations.push_back(m.str());
  }
  if (require_transverse && n_j_bar > limits.n_j_bar_max) {
    r.n_j_bar_ok = false;
    std::ostringstream m;
    m << "N*Jbar = 2pi x " << khz(n_j_bar) << " kHz exceeds 2pi x " << khz(limits.n_j_bar_max) << " kHz";
    r.violations.push_back(m.str());
  }
  for (double ratio : {2.5, 12.5}) r.transverse_presets.emplace_back(ratio, ratio * n_j_bar);
  return r;
}

lattice::LatticeSpec default_overlay_lattice() { return {2, {14, 14}, lattice::Boundary::open}; }

std::vector<OverlayPoint> fig3_overlay(const SpeciesRecord& species, double f, std::span<const double> r_b_grid,
                                       const lattice::LatticeSpec& spec, const Constraints& limits,
                                       bool require_transverse) {
  const auto lat = lattice::build_lattice(spec);
  const double gamma_r = species.decay_rate_per_s();
  const double tau_s = species.lifetime_us * 1e-6;
  std::vector<OverlayPoint> out;
  out.reserve(r_b_grid.size());
  for (double r_b : r_b_grid) {
    const auto d = dressing_for_blockade(r_b, f, species);
    const auto unit = lattice::coupling_matrix(lat, {lattice::PotentialKind::soft_core_vdw, r_b, 1.0});
    OverlayPoint p;
    p.r_b = r_b;
    p.omega = d.omega;
    p.j0 = d.j0_magnitude();
    p.n_j_bar = unit.n_j_bar() * p.j0;
    p.gamma_minus = f * gamma_r / 2.0;
    p.gamma_ratio = p.gamma_minus / p.j0;
    p.jbar_tau_over_f = unit.j_bar * p.j0 * tau_s / f;
    const auto report = constraint_check(d, p.n_j_bar, limits, require_transverse);
    p.feasible = report.ok();
    for (const auto& v : report.violations) p.violations += (p.violations.empty() ? "" : "; ") + v;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace softsqueeze::planner
