#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "softsqueeze/engine.hpp"
#include "softsqueeze/lattice.hpp"
#include "softsqueeze/models.hpp"

namespace softsqueeze::config {

enum class Method { automatic, dtwa, exact, closed_form };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Physical inputs resolved through the Rydberg planner. Times and rates of
/// the run are then measured in units of 1/|J0|.
struct PlannerInputs {
  std::string species;
  double f = 0.0;
  std::optional<double> omega_hz;  // ordinary frequency, Ω = 2π·omega_hz
  std::optional<double> r_b;
  std::string species_file;  // empty: built-in table
};

struct ScanAxes {
  std::vector<int> lengths;
  std::vector<double> r_b;
  std::vector<double> gamma_ratio;     // γ_-/J_plateau with γ_d = γ_-
  std::vector<models::Variant> variants;
  std::vector<double> b_over_nj;       // +inf selects the RWA model
  bool write_timeseries = false;
};

struct BenchmarkTolerances {
  double xi2_db = 0.5;
  double t_opt_steps = 2.0;
  double sigma = 3.0;
};

struct RunConfig {
  lattice::LatticeSpec lattice;
  lattice::PotentialSpec potential;
  models::ModelSpec model;
  std::optional<double> b_over_nj;  // alternative to model.b_field
  models::DissipationSpec dissipation;
  dtwa::EnsembleSpec ensemble;
  std::optional<models::Axis> initial_axis;  // ensemble.initial_axis when given, else per variant
  SecondMomentEstimator estimator = SecondMomentEstimator::classical;
  Method method = Method::automatic;
  std::optional<PlannerInputs> planner;
  double time_unit_s = 0.0;  // set when the planner fixes physical units
  std::optional<ScanAxes> scan;
  BenchmarkTolerances benchmark;
  nlohmann::json source;
};

/// Validates a parsed document. Unknown keys, wrong types and missing
/// required keys raise ConfigError carrying the dotted key path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Resolves planner inputs and b_over_nj into plain simulation parameters.
/// Idempotent.
void resolve(RunConfig& cfg);

}  // namespace softsqueeze::config
