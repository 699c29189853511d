#include "softsqueeze/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "softsqueeze/engine.hpp"
#include "softsqueeze/errors.hpp"
#include "softsqueeze/oracle.hpp"
#include "softsqueeze/planner.hpp"

namespace softsqueeze::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using config::Method;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// JSON numbers cannot hold NaN or infinity.
json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw ResourceError("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create " + dir.string() + ": " + ec.message());
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ' ';
  return s;
}

std::vector<double> recording_grid(const dtwa::EnsembleSpec& e) {
  const std::size_t n_times = e.n_steps() / e.sample_stride + 1;
  std::vector<double> grid(n_times);
  for (std::size_t k = 0; k < n_times; ++k) grid[k] = static_cast<double>(k * e.sample_stride) * e.dt;
  return grid;
}

void check_finite(const ObservableSeries& s) {
  for (const auto& m : s.moments) {
    for (double v : m.first)
      if (!std::isfinite(v)) throw NumericalError("non-finite observable in the time series");
    for (double v : m.second)
      if (!std::isfinite(v)) throw NumericalError("non-finite observable in the time series");
  }
}

unsigned workers_of(const CommonOptions& o) { return o.workers.value_or(0); }

config::RunConfig load(const CommonOptions& o) {
  auto cfg = config::load_config(o.config);
  if (o.seed) {
    cfg.ensemble.master_seed = *o.seed;
    cfg.source["ensemble"]["master_seed"] = *o.seed;
  }
  return cfg;
}

json squeezing_json(const analysis::SqueezingResult& r) {
  return {{"xi2_opt", jnum(r.xi2_opt)},
          {"xi2_opt_db", jnum(r.xi2_opt_db)},
          {"t_opt", jnum(r.t_opt)},
          {"contrast", jnum(r.contrast)},
          {"collectivity", jnum(r.collectivity)},
          {"boundary_minimum", r.boundary_minimum},
          {"xi2_err", jnum(r.xi2_err)}};
}

}  // namespace

const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> cols = {"time", "Sx",  "Sy",  "Sz",   "Sxx",     "Syy",    "Szz",    "Sxy",
                                                "Sxz",  "Syz", "S2",  "xi2",  "xi2_db",  "err_Sx", "err_Sy", "err_Sz"};
  return cols;
}

void write_timeseries_csv(const ObservableSeries& s, std::ostream& out) {
  const auto& cols = timeseries_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& m = s.moments[k];
    const double xi2 = k < s.xi2.size() ? s.xi2[k] : std::numeric_limits<double>::quiet_NaN();
    out << num(s.times[k]);
    for (double v : m.first) out << ',' << num(v);
    for (double v : m.second) out << ',' << num(v);
    out << ',' << num(m.total_spin_squared()) << ',' << num(xi2) << ',' << num(analysis::to_db(xi2));
    for (double v : s.first_err[k]) out << ',' << num(v);
    out << '\n';
  }
}

const std::vector<std::string>& scan_columns() {
  static const std::vector<std::string> cols = {
      "cell",          "L",        "N",         "r_b",        "gamma_ratio", "variant",
      "b_over_nj",     "method",   "n_b_tilde", "n_j_bar",    "xi2_opt",     "xi2_opt_db",
      "t_opt",         "contrast", "collectivity", "boundary_minimum", "xi2_err", "status"};
  return cols;
}

namespace {
constexpr double kMaxDriveStep = 0.05;
}  // namespace

Method select_method(const config::RunConfig& cfg) {
  if (cfg.method != Method::automatic) return cfg.method;
  if (cfg.model.variant == models::Variant::ising && !cfg.model.echo_pulse &&
      cfg.ensemble.initial_axis != models::Axis::z)
    return Method::closed_form;
  return Method::dtwa;
}

SimulationResult simulate(config::RunConfig& cfg, unsigned workers, std::optional<Method> force) {
  config::resolve(cfg);
  const auto start = std::chrono::steady_clock::now();
  SimulationResult r;
  r.method = force.value_or(select_method(cfg));
  const auto lat = lattice::build_lattice(cfg.lattice);
  r.couplings = lattice::coupling_matrix(lat, cfg.potential);
  const auto grid = recording_grid(cfg.ensemble);
  switch (r.method) {
    case Method::closed_form:
      if (cfg.model.variant != models::Variant::ising || cfg.model.echo_pulse)
        throw InvalidSpecError("the closed form covers the Ising model without echo only");
      r.series = oracle::ising_closed_form(r.couplings, cfg.dissipation, cfg.model.include_longitudinal, grid,
                                           cfg.ensemble.initial_axis);
      break;
    case Method::exact:
      r.series = oracle::exact_series(cfg.model, r.couplings, cfg.dissipation, cfg.ensemble.initial_axis, grid);
      break;
    case Method::dtwa:
    case Method::automatic: {
      dtwa::RunOptions opts;
      opts.workers = workers;
      opts.estimator = cfg.estimator;
      auto ens = dtwa::run_ensemble(cfg.model, r.couplings, cfg.dissipation, cfg.ensemble, opts);
      r.series = std::move(ens.series);
      check_finite(r.series);
      const double rotation = cfg.model.variant == models::Variant::lab_frame_driven ? cfg.model.b_field * cfg.ensemble.dt : 0.0;
      if (rotation > kMaxDriveStep)
        r.series.warnings.push_back("transverse drive rotates " + num(rotation) + " rad per step; dt <= " +
                                    num(kMaxDriveStep / cfg.model.b_field) + " resolves it");
      r.squeezing = analysis::optimal_squeezing(r.series);
      if (ens.blocks.n_blocks() > 1)
        r.squeezing.xi2_err =
            analysis::bootstrap_xi2_error(ens.blocks, r.squeezing.index, 200, cfg.ensemble.master_seed ^ 0xb5ad4eceULL);
      r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return r;
    }
  }
  check_finite(r.series);
  r.squeezing = analysis::optimal_squeezing(r.series);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

int simulate_command(const CommonOptions& o, std::ostream& out) {
  auto cfg = load(o);
  auto r = simulate(cfg, workers_of(o));
  ensure_dir(o.out_dir);
  {
    auto f = open_out(o.out_dir / "timeseries.csv");
    write_timeseries_csv(r.series, f);
  }
  json summary = {{"version", SOFTSQUEEZE_VERSION},
                  {"command", "simulate"},
                  {"seed", cfg.ensemble.master_seed},
                  {"method", config::to_string(r.method)},
                  {"n_sites", r.series.n_sites},
                  {"n_traj", r.series.n_traj},
                  {"n_b_tilde", r.couplings.n_b + 1},
                  {"n_j_bar", r.couplings.n_j_bar()},
                  {"squeezing", squeezing_json(r.squeezing)},
                  {"warnings", r.series.warnings},
                  {"config", cfg.source}};
  if (cfg.time_unit_s > 0) summary["time_unit_s"] = cfg.time_unit_s;
  if (r.series.echo_time) summary["echo_time"] = *r.series.echo_time;
  open_out(o.out_dir / "summary.json") << summary.dump(2) << '\n';
  open_out(o.out_dir / "timing.json") << json{{"wall_seconds", r.wall_seconds}}.dump(2) << '\n';
  out << "xi2_opt = " << num(r.squeezing.xi2_opt) << " (" << num(r.squeezing.xi2_opt_db) << " dB) at t = "
      << num(r.squeezing.t_opt) << (r.squeezing.boundary_minimum ? " [boundary minimum]" : "") << '\n';
  for (const auto& w : r.series.warnings) out << "warning: " << w << '\n';
  return 0;
}

namespace {

struct ScanCell {
  std::size_t index = 0;
  int length = 0;
  std::optional<double> r_b;
  std::optional<double> gamma_ratio;
  std::optional<models::Variant> variant;
  std::optional<double> b_over_nj;
};

std::vector<ScanCell> expand(const config::RunConfig& cfg) {
  const auto& a = *cfg.scan;
  auto opt = [](const auto& v) {
    using T = typename std::decay_t<decltype(v)>::value_type;
    std::vector<std::optional<T>> o;
    for (const auto& x : v) o.emplace_back(x);
    if (o.empty()) o.emplace_back(std::nullopt);
    return o;
  };
  std::vector<int> lengths = a.lengths;
  if (lengths.empty()) lengths.push_back(cfg.lattice.lengths.front());
  std::vector<ScanCell> cells;
  for (int l : lengths)
    for (auto r : opt(a.r_b))
      for (auto g : opt(a.gamma_ratio))
        for (auto v : opt(a.variants))
          for (auto b : opt(a.b_over_nj)) cells.push_back({cells.size(), l, r, g, v, b});
  return cells;
}

std::string run_cell(const config::RunConfig& base, const ScanCell& cell, unsigned workers,
                     const std::optional<fs::path>& series_path) {
  auto cfg = base;
  cfg.lattice.lengths.assign(static_cast<std::size_t>(cfg.lattice.dimension), cell.length);
  if (cell.r_b) {
    cfg.potential.r_b = *cell.r_b;
    if (cfg.planner) {
      cfg.planner->r_b = cell.r_b;
      cfg.planner->omega_hz.reset();
    }
  }
  if (cell.variant) cfg.model.variant = *cell.variant;
  if (cell.b_over_nj) cfg.b_over_nj = cell.b_over_nj;
  std::size_t n = 1;
  for (int l : cfg.lattice.lengths) n *= static_cast<std::size_t>(l);
  std::string gamma = cell.gamma_ratio ? num(*cell.gamma_ratio) : "";
  std::string tail;
  try {
    cfg.lattice.validate();
    config::resolve(cfg);
    if (cell.gamma_ratio) {
      const double g = *cell.gamma_ratio * cfg.potential.j_plateau;
      cfg.dissipation = {g, g};
    } else if (cfg.planner) {
      gamma = num(cfg.dissipation.gamma_minus / cfg.potential.j_plateau);
    }
    auto r = simulate(cfg, workers);
    const auto& s = r.squeezing;
    std::ostringstream t;
    t << config::to_string(r.method) << ',' << r.couplings.n_b + 1 << ',' << num(r.couplings.n_j_bar()) << ','
      << num(s.xi2_opt) << ',' << num(s.xi2_opt_db) << ',' << num(s.t_opt) << ',' << num(s.contrast) << ','
      << num(s.collectivity) << ',' << (s.boundary_minimum ? 1 : 0) << ',' << num(s.xi2_err) << ",ok";
    tail = t.str();
    if (series_path) {
      auto f = open_out(*series_path);
      write_timeseries_csv(r.series, f);
    }
  } catch (const Error& e) {
    tail = ",,,,,,,,,," + std::string("error: ") + clean(e.what());
  }
  std::ostringstream row;
  row << cell.index << ',' << cell.length << ',' << n << ',' << num(cfg.potential.r_b) << ',' << gamma << ','
      << models::to_string(cfg.model.variant) << ',' << (cfg.b_over_nj ? num(*cfg.b_over_nj) : "") << ',' << tail;
  return row.str();
}

}  // namespace

int scan_command(const CommonOptions& o, std::ostream& out) {
  auto cfg = load(o);
  if (!cfg.scan) throw ConfigError("scan", "missing required key");
  const auto cells = expand(cfg);
  ensure_dir(o.out_dir);
  if (cfg.scan->write_timeseries) ensure_dir(o.out_dir / "cells");
  const fs::path journal = o.out_dir / "scan_journal.jsonl";
  const std::string hash = hex(fnv1a(cfg.source.dump()));

  std::map<std::size_t, std::pair<std::string, double>> done;
  if (o.resume && fs::exists(journal)) {
    std::ifstream in(journal);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      json e;
      try {
        e = json::parse(line);
      } catch (const json::exception&) {
        break;  // torn final line from an interrupted write
      }
      if (header) {
        if (e.value("config_hash", "") != hash)
          throw ConfigError("scan", "journal " + journal.string() + " belongs to a different configuration");
        header = false;
        continue;
      }
      done[e.at("cell").get<std::size_t>()] = {e.at("row").get<std::string>(), e.at("runtime_s").get<double>()};
    }
  }
  {
    auto j = open_out(journal);
    j << json{{"config_hash", hash}, {"cells", cells.size()}}.dump() << '\n';
    for (const auto& [cell, entry] : done)
      j << json{{"cell", cell}, {"row", entry.first}, {"runtime_s", entry.second}}.dump() << '\n';
  }
  auto j = open_out(journal, std::ios::app);
  std::size_t computed = 0;
  for (const auto& cell : cells) {
    if (done.count(cell.index)) continue;
    const auto start = std::chrono::steady_clock::now();
    std::optional<fs::path> series_path;
    if (cfg.scan->write_timeseries) {
      char name[32];
      std::snprintf(name, sizeof name, "cell_%04zu.csv", cell.index);
      series_path = o.out_dir / "cells" / name;
    }
    auto row = run_cell(cfg, cell, workers_of(o), series_path);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    j << json{{"cell", cell.index}, {"row", row}, {"runtime_s", runtime}}.dump() << std::endl;
    done[cell.index] = {row, runtime};
    ++computed;
    out << "cell " << cell.index + 1 << "/" << cells.size() << ": " << row << '\n';
  }

  auto csv = open_out(o.out_dir / "scan.csv");
  auto timing = open_out(o.out_dir / "scan_timing.csv");
  const auto& cols = scan_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) csv << (c ? "," : "") << cols[c];
  csv << '\n';
  timing << "cell,runtime_s\n";
  for (const auto& [cell, entry] : done) {
    csv << entry.first << '\n';
    timing << cell << ',' << num(entry.second) << '\n';
  }
  out << computed << " cells computed, " << cells.size() - computed << " reused\n";
  return 0;
}

int benchmark_command(const CommonOptions& o, std::ostream& out) {
  auto cfg = load(o);
  auto exact_cfg = cfg;
  auto engine = simulate(cfg, workers_of(o), Method::dtwa);
  auto exact = simulate(exact_cfg, 1, Method::exact);
  const auto& tol = cfg.benchmark;
  const double grid_step = cfg.ensemble.dt * static_cast<double>(cfg.ensemble.sample_stride);

  const double d_db = engine.squeezing.xi2_opt_db - exact.squeezing.xi2_opt_db;
  const double d_steps = (engine.squeezing.t_opt - exact.squeezing.t_opt) / grid_step;
  std::array<double, 3> max_abs{};
  double max_sigma = 0.0;
  for (std::size_t k = 0; k < engine.series.size(); ++k)
    for (int mu = 0; mu < 3; ++mu) {
      const double d = std::abs(engine.series.moments[k].first[mu] - exact.series.moments[k].first[mu]);
      max_abs[mu] = std::max(max_abs[mu], d);
      const double err = engine.series.first_err[k][mu];
      if (err > 0) max_sigma = std::max(max_sigma, d / err);
      else if (d > 1e-12) max_sigma = std::numeric_limits<double>::infinity();
    }
  const bool pass_db = std::abs(d_db) <= tol.xi2_db;
  const bool pass_t = std::abs(d_steps) <= tol.t_opt_steps;
  const bool pass_s = max_sigma <= tol.sigma;
  const bool pass = pass_db && pass_t && pass_s;

  json report = {{"version", SOFTSQUEEZE_VERSION},
                 {"command", "benchmark"},
                 {"seed", cfg.ensemble.master_seed},
                 {"n_sites", engine.series.n_sites},
                 {"dtwa", squeezing_json(engine.squeezing)},
                 {"exact", squeezing_json(exact.squeezing)},
                 {"delta_xi2_opt_db", jnum(d_db)},
                 {"delta_t_opt_steps", jnum(d_steps)},
                 {"max_abs_delta_S", {max_abs[0], max_abs[1], max_abs[2]}},
                 {"max_delta_S_over_err", jnum(max_sigma)},
                 {"tolerances", {{"xi2_db", tol.xi2_db}, {"t_opt_steps", tol.t_opt_steps}, {"sigma", tol.sigma}}},
                 {"pass", {{"xi2_opt", pass_db}, {"t_opt", pass_t}, {"first_moments", pass_s}, {"all", pass}}},
                 {"config", cfg.source}};
  ensure_dir(o.out_dir);
  open_out(o.out_dir / "benchmark.json") << report.dump(2) << '\n';
  out << "delta xi2_opt = " << num(d_db) << " dB, delta t_opt = " << num(d_steps)
      << " steps, max |dS|/err = " << num(max_sigma) << " -> " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : 1;
}

int plan_command(const PlanOptions& o, std::ostream& out) {
  const auto table = o.species_file ? planner::load_species(*o.species_file) : planner::builtin_species();
  if (o.list) {
    json list = json::array();
    for (const auto& s : table)
      list.push_back({{"label", s.label},
                      {"lattice_spacing_um", s.lattice_spacing_um},
                      {"c6_over_2pi_ghz_um6", s.c6_over_2pi_hz_um6 / 1e9},
                      {"lifetime_us", s.lifetime_us}});
    out << list.dump(2) << '\n';
    return 0;
  }
  const auto& species = planner::find_species(table, o.species);
  if (o.omega_hz.has_value() == o.r_b.has_value()) throw ConfigError("plan", "give exactly one of --omega-hz and --r-b");
  const auto d = o.omega_hz ? planner::dressing_from(planner::kTwoPi * *o.omega_hz, o.f, species)
                            : planner::dressing_for_blockade(*o.r_b, o.f, species);
  lattice::LatticeSpec spec{o.dimension, std::vector<int>(static_cast<std::size_t>(o.dimension), o.length), o.boundary};
  spec.validate();
  const auto unit = lattice::coupling_matrix(lattice::build_lattice(spec), {lattice::PotentialKind::soft_core_vdw, d.r_b, 1.0});
  const double n_j_bar = unit.n_j_bar() * d.j0_magnitude();
  const auto report = planner::constraint_check(d, n_j_bar, {}, !o.ising_protocol);
  const double gamma_minus = o.f * species.decay_rate_per_s() / 2.0;

  auto hz = [](double w) { return w / planner::kTwoPi; };
  json doc = {{"species",
               {{"label", species.label},
                {"lattice_spacing_um", species.lattice_spacing_um},
                {"c6_over_2pi_ghz_um6", species.c6_over_2pi_hz_um6 / 1e9},
                {"lifetime_us", species.lifetime_us}}},
              {"dressing",
               {{"omega_over_2pi_hz", hz(d.omega)},
                {"delta_over_2pi_hz", hz(d.delta)},
                {"f", d.f},
                {"r_b_phys_um", d.r_b_phys_um},
                {"r_b", d.r_b},
                {"j0_over_2pi_hz", hz(d.j0)}}},
              {"lattice", {{"dimension", o.dimension}, {"length", o.length}, {"n_sites", spec.n_sites()}}},
              {"n_j_bar_over_2pi_hz", hz(n_j_bar)},
              {"n_b_tilde", unit.n_b + 1},
              {"gamma_minus_per_s", gamma_minus},
              {"gamma_minus_over_j0", gamma_minus / d.j0_magnitude()},
              {"constraints", {{"ok", report.ok()}, {"violations", report.violations}}},
              {"warnings", planner::dressing_warnings(d)}};
  json presets = json::array();
  for (const auto& [ratio, b] : report.transverse_presets)
    presets.push_back({{"b_over_nj", ratio}, {"b_over_2pi_hz", hz(b)}});
  doc["constraints"]["transverse_presets"] = presets;
  if (o.n) {
    if (!species.fit) throw InvalidSpecError("species " + species.label + " has no lifetime fit");
    const auto l = planner::lifetime(*o.n, species.quantum_defect, species.fit->a_per_us, species.fit->b_per_us);
    doc["lifetime_fit"] = {{"n", *o.n}, {"gamma_per_us", l.gamma_per_us}, {"tau_us", l.tau_us}};
  }
  out << doc.dump(2) << '\n';

  if (o.overlay_csv) {
    if (o.overlay_points < 2 || !(o.overlay_r_b_max > o.overlay_r_b_min) || !(o.overlay_r_b_min > 0))
      throw ConfigError("plan", "overlay grid needs 0 < r_b_min < r_b_max and at least two points");
    std::vector<double> grid(o.overlay_points);
    for (std::size_t k = 0; k < grid.size(); ++k)
      grid[k] = o.overlay_r_b_min + (o.overlay_r_b_max - o.overlay_r_b_min) * static_cast<double>(k) /
                                        static_cast<double>(grid.size() - 1);
    const auto curve = planner::fig3_overlay(species, o.f, grid, spec, {}, !o.ising_protocol);
    auto f = open_out(*o.overlay_csv);
    f << "r_b,omega_over_2pi_hz,j0_over_2pi_hz,n_j_bar_over_2pi_hz,gamma_minus_per_s,gamma_minus_over_j0,"
         "jbar_tau_over_f,feasible,violations\n";
    for (const auto& p : curve)
      f << num(p.r_b) << ',' << num(hz(p.omega)) << ',' << num(hz(p.j0)) << ',' << num(hz(p.n_j_bar)) << ','
        << num(p.gamma_minus) << ',' << num(p.gamma_ratio) << ',' << num(p.jbar_tau_over_f) << ','
        << (p.feasible ? 1 : 0) << ',' << clean(p.violations) << '\n';
  }
  return 0;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 4;
  }
}

}  // namespace softsqueeze::cli
