#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"

namespace {

using platoon::tools::ExperimentConfig;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::string out_path;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config file applied on top of the defaults")
      ->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "override one config value, e.g. --set network.m=3");
  app->add_option("--seed", c.seed, "master seed for simulation");
  app->add_option("--reps", c.reps, "Monte Carlo replications (0 disables simulated columns)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--out", c.out_path, "output CSV path (default: stdout)");
}

void finish_config(ExperimentConfig& cfg, const Common& c) {
  if (!c.config_path.empty()) platoon::tools::apply_json_file(cfg, c.config_path);
  platoon::tools::apply_overrides(cfg, c.sets);
  if (c.seed) cfg.sim.master_seed = *c.seed;
  if (c.reps) cfg.sim.replications = *c.reps;
}

std::map<std::string, std::string> parse_args(const std::vector<std::string>& raw) {
  std::map<std::string, std::string> out;
  for (const auto& a : raw) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--arg '" + a + "' must look like key=value");
    out[a.substr(0, eq)] = a.substr(eq + 1);
  }
  return out;
}

// Writes to --out when given, otherwise to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load, connectivity and coverage analysis for platooned vehicular networks"};
  app.require_subcommand(1);

  Common fig_c, op_c, sim_c, val_c;
  int figure = 0;
  auto* fig = app.add_subcommand("figure", "reproduce a figure's data series as CSV");
  fig->add_option("n", figure, "figure number (2..9)")->required()->check(CLI::Range(2, 9));
  add_common(fig, fig_c);

  std::string op_name;
  std::vector<std::string> op_args;
  auto* op = app.add_subcommand("op", "evaluate one named operation ('op list' for the catalogue)");
  op->add_option("name", op_name, "operation name")->required();
  op->add_option("--arg", op_args, "operation input, e.g. --arg r=500");
  add_common(op, op_c);

  std::string target;
  std::vector<std::string> sim_args;
  std::string records_path;
  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo study");
  sim->add_option("target", target, "load, connectivity, coverage or rate")
      ->required()
      ->check(CLI::IsMember({"load", "connectivity", "coverage", "rate"}));
  sim->add_option("--arg", sim_args, "study input, e.g. --arg kind=tagged --arg traffic=pts");
  sim->add_option("--records", records_path, "per-replication counts (load only)");
  add_common(sim, sim_c);

  double tolerance = 0.01;
  auto* val = app.add_subcommand("validate", "compare analysis against simulation");
  val->add_option("--tolerance", tolerance, "total-variation tolerance")->check(CLI::PositiveNumber);
  add_common(val, val_c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fig) {
      ExperimentConfig cfg = platoon::tools::figure_defaults(figure);
      finish_config(cfg, fig_c);
      Sink sink(fig_c.out_path);
      platoon::tools::run_figure(figure, cfg, sink.stream());
    } else if (*op) {
      if (op_name == "list") {
        for (const auto& line : platoon::tools::op_catalogue()) std::cout << line << '\n';
        return 0;
      }
      ExperimentConfig cfg;
      finish_config(cfg, op_c);
      Sink sink(op_c.out_path);
      platoon::tools::run_op(op_name, cfg, parse_args(op_args), sink.stream());
    } else if (*sim) {
      ExperimentConfig cfg;
      cfg.sim.replications = 100000;
      finish_config(cfg, sim_c);
      Sink sink(sim_c.out_path);
      std::unique_ptr<std::ofstream> records;
      if (!records_path.empty()) {
        if (target != "load") throw std::invalid_argument("--records is only available for load");
        records = std::make_unique<std::ofstream>(records_path);
        if (!*records) throw std::runtime_error("cannot open records file " + records_path);
        *records << "replication,count\n";
      }
      platoon::tools::run_simulate(target, cfg, parse_args(sim_args), sink.stream(), records.get());
    } else if (*val) {
      ExperimentConfig cfg;
      cfg.sim.replications = 100000;
      finish_config(cfg, val_c);
      Sink sink(val_c.out_path);
      return platoon::tools::run_validate(cfg, tolerance, sink.stream()) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "platoonctl: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
