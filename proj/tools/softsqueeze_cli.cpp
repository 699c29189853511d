#include <iostream>

#include <CLI11.hpp>

#include "softsqueeze/commands.hpp"
#include "softsqueeze/errors.hpp"

namespace cli = softsqueeze::cli;

namespace {

void add_common(CLI::App* sub, cli::CommonOptions& o, bool resume) {
  sub->add_option("--config", o.config, "run configuration (JSON)")->required();
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_option("--workers", o.workers, "worker threads (default: SOFTSQUEEZE_WORKERS or all cores)");
  sub->add_option("--seed", o.seed, "master seed, overrides the config");
  if (resume) sub->add_flag("--resume", o.resume, "skip cells recorded in the journal");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin squeezing with Rydberg-dressed soft-core interactions"};
  app.set_version_flag("--version", SOFTSQUEEZE_VERSION);
  app.require_subcommand(1);

  cli::CommonOptions sim, scan, bench;
  auto* s = app.add_subcommand("simulate", "run one configuration and write timeseries.csv and summary.json");
  add_common(s, sim, false);
  auto* c = app.add_subcommand("scan", "run a parameter scan and write scan.csv");
  add_common(c, scan, true);
  auto* b = app.add_subcommand("benchmark", "compare the trajectory engine against the exact oracle");
  add_common(b, bench, false);

  cli::PlanOptions plan;
  std::string boundary = "open";
  auto* p = app.add_subcommand("plan", "convert Rydberg dressing parameters into simulation inputs");
  p->add_option("--species", plan.species, "species label");
  p->add_option("--n", plan.n, "principal quantum number for the lifetime fit");
  p->add_option("--f", plan.f, "Rydberg fraction")->capture_default_str();
  auto* omega = p->add_option("--omega-hz", plan.omega_hz, "Rabi frequency Omega/2pi in Hz");
  p->add_option("--r-b", plan.r_b, "blockade radius in lattice units")->excludes(omega);
  p->add_option("--dimension", plan.dimension)->capture_default_str();
  p->add_option("--length", plan.length, "lattice side length")->capture_default_str();
  p->add_option("--boundary", boundary)->check(CLI::IsMember({"open", "periodic"}));
  p->add_flag("--ising", plan.ising_protocol, "Ising protocol: no transverse-field constraint");
  p->add_option("--overlay", plan.overlay_csv, "write the r_b curve table to this CSV");
  p->add_option("--r-b-min", plan.overlay_r_b_min)->capture_default_str();
  p->add_option("--r-b-max", plan.overlay_r_b_max)->capture_default_str();
  p->add_option("--points", plan.overlay_points)->capture_default_str();
  p->add_option("--species-file", plan.species_file, "species table (JSON) replacing the built-in one");
  p->add_flag("--list", plan.list, "list available species");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return cli::guarded(
      [&] {
        if (s->parsed()) return cli::simulate_command(sim, std::cout);
        if (c->parsed()) return cli::scan_command(scan, std::cout);
        if (b->parsed()) return cli::benchmark_command(bench, std::cout);
        plan.boundary = boundary == "periodic" ? softsqueeze::lattice::Boundary::periodic
                                               : softsqueeze::lattice::Boundary::open;
        if (!plan.list && plan.species.empty()) throw softsqueeze::ConfigError("plan.species", "missing required key");
        return cli::plan_command(plan, std::cout);
      },
      std::cerr);
}
