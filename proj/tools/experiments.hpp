#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon/connectivity.hpp"
#include "platoon/coverage.hpp"
#include "platoon/load.hpp"
#include "platoon/montecarlo.hpp"

namespace platoon::tools {

/// Everything a figure, operation or simulation run needs. Config files give
/// densities per km and lengths in metres; NetworkParams holds per-metre values.
struct ExperimentConfig {
  std::string scenario = "default";
  NetworkParams net = NetworkParams::from_per_km(2.0, 1.0, 5.0, 100.0);
  RadioParams radio;

  // Sweep grids. The u sweep sets m = u and lambda = u * lambda_p.
  std::vector<double> u_grid{5, 10, 15, 20, 25, 30, 35};
  std::vector<double> a_grid{50, 100, 150};
  std::vector<double> Rb_grid{100, 200, 400};

  double R_b = 200.0;       // m
  double tau = 0.9;         // SINR threshold
  double x = 0.8;           // meta distribution level
  double tau_rate = 9e6;    // bit/s
  int k_max = 30;           // rows for PMF-style figures

  /// replications = 0 disables the simulated columns of a figure.
  SimConfig sim{0, 1, 0.0, 500};
  PmfOptions pmf;
  CoverageOptions cov;
};

/// Defaults matching the caption of figure n (2..9).
ExperimentConfig figure_defaults(int n);

/// Applies a JSON document on top of `cfg`. Unknown keys are rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& doc);
/// Reads a JSON file and applies it.
void apply_json_file(ExperimentConfig& cfg, const std::string& path);
/// Applies "dotted.path=value" overrides, e.g. "network.m=3".
void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& assignments);
/// Full parameter echo in the config-file schema.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Network parameters at sweep point u.
NetworkParams at_u(const NetworkParams& base, double u);

void run_figure(int n, const ExperimentConfig& cfg, std::ostream& out);

/// Named single-operation access. `args` holds the operation's own inputs
/// (e.g. r, s, traffic); everything else comes from the config.
void run_op(const std::string& name, const ExperimentConfig& cfg,
            const std::map<std::string, std::string>& args, std::ostream& out);
/// "name: description" lines for every operation.
std::vector<std::string> op_catalogue();

/// Monte Carlo run. target is one of load, connectivity, coverage, rate.
void run_simulate(const std::string& target, const ExperimentConfig& cfg,
                  const std::map<std::string, std::string>& args, std::ostream& out,
                  std::ostream* records);

/// Analytical-vs-simulation suite at the configured parameters. Prints one
/// PASS/FAIL line per check and returns true when all pass.
bool run_validate(const ExperimentConfig& cfg, double tv_tolerance, std::ostream& out);

}  // namespace platoon::tools
