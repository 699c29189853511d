#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softsqueeze/analysis.hpp"
#include "softsqueeze/config.hpp"
#include "softsqueeze/lattice.hpp"
#include "softsqueeze/observables.hpp"

namespace softsqueeze::cli {

struct CommonOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  bool resume = false;
};

/// Fixed column order of timeseries.csv.
const std::vector<std::string>& timeseries_columns();
void write_timeseries_csv(const ObservableSeries& series, std::ostream& out);

/// Fixed column order of scan.csv.
const std::vector<std::string>& scan_columns();

struct SimulationResult {
  ObservableSeries series;
  lattice::CouplingMatrix couplings;
  config::Method method = config::Method::dtwa;
  analysis::SqueezingResult squeezing;
  double wall_seconds = 0.0;
};

/// auto: Ising without echo from a transverse axis uses the closed form,
/// everything else the trajectory engine.
config::Method select_method(const config::RunConfig& cfg);

/// Runs one configuration (resolved in place) with the chosen method.
SimulationResult simulate(config::RunConfig& cfg, unsigned workers, std::optional<config::Method> force = std::nullopt);

int simulate_command(const CommonOptions& options, std::ostream& out);
int scan_command(const CommonOptions& options, std::ostream& out);
/// Returns 0 when every tolerance holds and 1 otherwise.
int benchmark_command(const CommonOptions& options, std::ostream& out);

struct PlanOptions {
  std::string species;
  std::optional<int> n;
  double f = 0.01;
  std::optional<double> omega_hz;
  std::optional<double> r_b;
  int dimension = 2;
  int length = 14;
  lattice::Boundary boundary = lattice::Boundary::open;
  bool ising_protocol = false;
  std::optional<std::filesystem::path> overlay_csv;
  double overlay_r_b_min = 1.0;
  double overlay_r_b_max = 6.0;
  std::size_t overlay_points = 51;
  std::optional<std::filesystem::path> species_file;
  bool list = false;
};

int plan_command(const PlanOptions& options, std::ostream& out);

/// Maps library exceptions to exit codes (2 config/spec, 3 numerical, 4
/// resource) and prints diagnostics to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace softsqueeze::cli
