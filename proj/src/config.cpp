#include "softsqueeze/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "softsqueeze/errors.hpp"
#include "softsqueeze/planner.hpp"

namespace softsqueeze::config {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

/// Reads one object section and remembers which keys were consumed.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  template <class T>
  T required(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key), "missing required key");
    return get<T>(key);
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  template <class T>
  std::optional<T> maybe(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(node_.at(key), path(key));
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!used_.count(key)) throw ConfigError(path(key), "unknown key");
  }

 private:
  template <class T>
  T get(const std::string& key) {
    used_.insert(key);
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key), "wrong type");
    }
  }

  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto checked(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

double ratio_value(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
    return std::numeric_limits<double>::infinity();
  throw ConfigError(path, "expected a number or \"inf\"");
}

models::Axis default_axis(models::Variant v) {
  return (v == models::Variant::ising || v == models::Variant::oat) ? models::Axis::x : models::Axis::z;
}

lattice::Boundary boundary_from(const std::string& s, const std::string& path) {
  if (s == "open") return lattice::Boundary::open;
  if (s == "periodic") return lattice::Boundary::periodic;
  throw ConfigError(path, "boundary must be \"open\" or \"periodic\"");
}

lattice::PotentialKind potential_from(const std::string& s, const std::string& path) {
  if (s == "soft_core_vdw" || s == "vdw") return lattice::PotentialKind::soft_core_vdw;
  if (s == "sharp_cutoff" || s == "sharp") return lattice::PotentialKind::sharp_cutoff;
  throw ConfigError(path, "potential kind must be \"soft_core_vdw\" or \"sharp_cutoff\"");
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::automatic: return "auto";
    case Method::dtwa: return "dtwa";
    case Method::exact: return "exact";
    case Method::closed_form: return "closed_form";
  }
  return "auto";
}

Method method_from_string(const std::string& s) {
  if (s == "auto") return Method::automatic;
  if (s == "dtwa") return Method::dtwa;
  if (s == "exact") return Method::exact;
  if (s == "closed_form") return Method::closed_form;
  throw InvalidSpecError("method must be one of auto, dtwa, exact, closed_form");
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  cfg.source = doc;
  Section root(doc, "");

  if (!root.has("lattice")) throw ConfigError("lattice", "missing required key");
  {
    auto s = root.child("lattice");
    cfg.lattice.dimension = s.required<int>("dimension");
    cfg.lattice.lengths = s.required<std::vector<int>>("lengths");
    cfg.lattice.boundary = boundary_from(s.optional<std::string>("boundary", "open"), s.path("boundary"));
    s.finish();
    checked("lattice", [&] { cfg.lattice.validate(); return 0; });
  }

  if (root.has("planner")) {
    auto s = root.child("planner");
    PlannerInputs p;
    p.species = s.required<std::string>("species");
    p.f = s.required<double>("f");
    p.omega_hz = s.maybe<double>("omega_hz");
    p.r_b = s.maybe<double>("r_b");
    p.species_file = s.optional<std::string>("species_file", "");
    if (p.omega_hz.has_value() == p.r_b.has_value())
      throw ConfigError("planner", "give exactly one of omega_hz and r_b");
    s.finish();
    cfg.planner = p;
  }

  if (!root.has("potential")) throw ConfigError("potential", "missing required key");
  {
    auto s = root.child("potential");
    cfg.potential.kind = potential_from(s.optional<std::string>("kind", "soft_core_vdw"), s.path("kind"));
    if (cfg.planner) {
      if (s.has("r_b") || s.has("j_plateau"))
        throw ConfigError("potential", "r_b and j_plateau are derived from the planner section");
    } else {
      cfg.potential.r_b = s.required<double>("r_b");
      cfg.potential.j_plateau = s.optional<double>("j_plateau", 1.0);
      checked("potential", [&] { cfg.potential.validate(); return 0; });
    }
    s.finish();
  }

  if (!root.has("model")) throw ConfigError("model", "missing required key");
  {
    auto s = root.child("model");
    const auto name = s.required<std::string>("variant");
    cfg.model.variant = checked(s.path("variant"), [&] { return models::variant_from_string(name); });
    cfg.model.b_field = s.optional<double>("b_field", 0.0);
    if (s.has("b_over_nj")) {
      if (s.has("b_field")) throw ConfigError(s.path("b_over_nj"), "conflicts with model.b_field");
      cfg.b_over_nj = ratio_value(s.raw("b_over_nj"), s.path("b_over_nj"));
    }
    cfg.model.detuning_compensation = s.optional<bool>("detuning_compensation", false);
    cfg.model.echo_pulse = s.optional<bool>("echo_pulse", false);
    cfg.model.include_longitudinal = s.optional<bool>("include_longitudinal", false);
    s.finish();
    checked("model", [&] { cfg.model.validate(); return 0; });
  }

  if (root.has("dissipation")) {
    auto s = root.child("dissipation");
    cfg.dissipation.gamma_minus = s.optional<double>("gamma_minus", 0.0);
    cfg.dissipation.gamma_d = s.optional<double>("gamma_d", 0.0);
    s.finish();
    checked("dissipation", [&] { cfg.dissipation.validate(); return 0; });
    if (cfg.planner) throw ConfigError("dissipation", "rates are derived from the planner section");
  }

  if (!root.has("ensemble")) throw ConfigError("ensemble", "missing required key");
  {
    auto s = root.child("ensemble");
    cfg.ensemble.n_traj = s.optional<std::size_t>("n_traj", 1000);
    cfg.ensemble.dt = s.optional<double>("dt", 0.02);
    cfg.ensemble.t_max = s.required<double>("t_max");
    cfg.ensemble.sample_stride = s.optional<std::size_t>("sample_stride", 1);
    cfg.ensemble.master_seed = s.optional<std::uint64_t>("master_seed", 0);
    const auto est = s.optional<std::string>("estimator", "classical");
    if (est == "classical") cfg.estimator = SecondMomentEstimator::classical;
    else if (est == "diagonal_corrected") cfg.estimator = SecondMomentEstimator::diagonal_corrected;
    else throw ConfigError(s.path("estimator"), "must be \"classical\" or \"diagonal_corrected\"");
    const auto axis = s.maybe<std::string>("initial_axis");
    if (axis) cfg.initial_axis = checked(s.path("initial_axis"), [&] { return models::axis_from_string(*axis); });
    cfg.ensemble.initial_axis = cfg.initial_axis.value_or(default_axis(cfg.model.variant));
    s.finish();
    checked("ensemble", [&] { cfg.ensemble.validate(); return 0; });
  }

  if (root.has("method")) {
    const auto m = root.raw("method");
    if (!m.is_string()) throw ConfigError("method", "wrong type");
    cfg.method = checked("method", [&] { return method_from_string(m.get<std::string>()); });
  }

  if (root.has("scan")) {
    auto s = root.child("scan");
    ScanAxes axes;
    axes.lengths = s.optional<std::vector<int>>("L", {});
    axes.r_b = s.optional<std::vector<double>>("r_b", {});
    axes.gamma_ratio = s.optional<std::vector<double>>("gamma_ratio", {});
    for (const auto& name : s.optional<std::vector<std::string>>("variant", {}))
      axes.variants.push_back(checked(s.path("variant"), [&] { return models::variant_from_string(name); }));
    if (s.has("b_over_nj")) {
      const auto& list = s.raw("b_over_nj");
      if (!list.is_array()) throw ConfigError(s.path("b_over_nj"), "expected a list");
      for (const auto& v : list) axes.b_over_nj.push_back(ratio_value(v, s.path("b_over_nj")));
    }
    axes.write_timeseries = s.optional<bool>("write_timeseries", false);
    s.finish();
    for (int l : axes.lengths)
      if (l < 1) throw ConfigError("scan.L", "lengths must be positive");
    for (double r : axes.r_b)
      if (!(r > 0)) throw ConfigError("scan.r_b", "radii must be positive");
    for (double g : axes.gamma_ratio)
      if (!(g >= 0)) throw ConfigError("scan.gamma_ratio", "ratios must be >= 0");
    for (double b : axes.b_over_nj)
      if (!(b > 0)) throw ConfigError("scan.b_over_nj", "ratios must be positive");
    if (cfg.planner && !axes.gamma_ratio.empty())
      throw ConfigError("scan.gamma_ratio", "the planner section fixes the decay rates");
    cfg.scan = axes;
  }

  if (root.has("benchmark")) {
    auto s = root.child("benchmark");
    cfg.benchmark.xi2_db = s.optional<double>("xi2_db", 0.5);
    cfg.benchmark.t_opt_steps = s.optional<double>("t_opt_steps", 2.0);
    cfg.benchmark.sigma = s.optional<double>("sigma", 3.0);
    s.finish();
  }

  root.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("parse error at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  return parse_config(doc);
}

void resolve(RunConfig& cfg) {
  if (cfg.planner && cfg.time_unit_s == 0.0) {
    const auto& p = *cfg.planner;
    const auto table = p.species_file.empty() ? planner::builtin_species() : planner::load_species(p.species_file);
    const auto& species = checked("planner.species", [&]() -> const planner::SpeciesRecord& {
      return planner::find_species(table, p.species);
    });
    const auto d = checked("planner", [&] {
      return p.omega_hz ? planner::dressing_from(planner::kTwoPi * *p.omega_hz, p.f, species)
                        : planner::dressing_for_blockade(*p.r_b, p.f, species);
    });
    const double j0 = d.j0_magnitude();
    cfg.potential.r_b = d.r_b;
    cfg.potential.j_plateau = 1.0;
    cfg.time_unit_s = 1.0 / j0;
    const double gamma = p.f * species.decay_rate_per_s() / 2.0 / j0;
    cfg.dissipation = {gamma, gamma};
  }
  if (cfg.b_over_nj) {
    if (std::isinf(*cfg.b_over_nj)) {
      cfg.model.variant = models::Variant::xx_rwa;
      cfg.model.b_field = 0.0;
    } else {
      cfg.model.variant = models::Variant::lab_frame_driven;
      const auto lat = lattice::build_lattice(cfg.lattice);
      const auto j = lattice::coupling_matrix(lat, cfg.potential);
      cfg.model.b_field = *cfg.b_over_nj * j.n_j_bar();
    }
  }
  cfg.ensemble.initial_axis = cfg.initial_axis.value_or(default_axis(cfg.model.variant));
}

}  // namespace softsqueeze::config
