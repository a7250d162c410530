#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nvsim/cce.hpp"
#include "nvsim/config.hpp"
#include "nvsim/error.hpp"
#include "nvsim/experiment.hpp"

namespace {

using namespace nvsim;

enum Exit { kOk = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<int> threads;
  bool tomography = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON configuration file (defaults when omitted)");
  cmd->add_option("--seed", o.seed, "bath seed (overrides bath.seed)");
  cmd->add_option("-o,--output", o.output, "output directory (overrides output.path)");
  cmd->add_option("--format", o.format, "csv or json (overrides output.format)");
  cmd->add_option("-j,--threads", o.threads, "worker threads");
  cmd->add_flag("--tomography", o.tomography, "enable simulated tomography");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(o.config_path);
  if (o.seed) c.bath.seed = *o.seed;
  if (o.output) c.output.path = *o.output;
  if (o.format) {
    if (*o.format == "csv") c.output.format = OutputFormat::Csv;
    else if (*o.format == "json") c.output.format = OutputFormat::Json;
    else throw ConfigError("output.format: expected \"csv\" or \"json\", got \"" + *o.format + "\"");
  }
  if (o.threads) c.threads = *o.threads;
  if (o.tomography) c.tomography.enabled = true;
  c.validate();
  return c;
}

void print_report(const RunResult& r) {
  std::printf("initial state: fidelity %.6f, concurrence %.6f\n", r.initial_fidelity, r.initial_concurrence);
  std::printf("non-Markovianity I = %.6g (TV %.6g, dE %.6g)\n", r.report.measure, r.report.total_variation,
              r.report.delta_e);
  if (const Revival* best = r.report.largest_revival()) {
    std::printf("largest revival: height %.6g, peak at %.6g s\n", best->height, best->peak_s);
  } else {
    std::printf("no revival\n");
  }
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

// Full-order CCE against exact evolution on small baths (the nearest spins of
// each sampled configuration).
int run_oracle(const RunConfig& c, int n_seeds, std::size_t max_spins, double r_max, double tol) {
  const auto times = sample_times(c.sequence);
  double worst_all = 0.0;
  for (int k = 0; k < n_seeds; ++k) {
    const std::uint64_t seed = c.bath.seed + static_cast<std::uint64_t>(k);
    const auto bath = sample_bath(seed, c.bath.abundance, c.bath.r_min_angstrom, r_max, c.system).nearest(max_spins);
    const auto exact = exact_coherence(bath, c.system, c.shape(), times);
    const auto cce = cce_coherence(bath, c.system, c.shape(), times, {std::max<std::size_t>(bath.size(), 1), 0.0, c.threads});
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(cce.values[i] - exact.values[i]));
    worst_all = std::max(worst_all, worst);
    std::printf("seed %llu: %zu spins, max |L_cce - L_exact| = %.3e\n", static_cast<unsigned long long>(seed),
                bath.size(), worst);
  }
  const bool pass = worst_all < tol;
  std::printf("%s: worst deviation %.3e (tolerance %.1e)\n", pass ? "PASS" : "FAIL", worst_all, tol);
  return pass ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV electron / 13C ancilla entanglement dynamics in a 13C bath"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, val_o, oracle_o;
  auto* run = app.add_subcommand("run", "simulate one configuration and write trajectory and report");
  add_common(run, run_o);

  auto* sweep = app.add_subcommand("sweep", "repeat the run over values of one numeric field");
  add_common(sweep, sweep_o);
  std::string axis;
  std::vector<double> values;
  sweep->add_option("--axis", axis, "field as section.key, e.g. system.b_gauss")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  auto* validate = app.add_subcommand("validate", "check a configuration and print it with defaults filled in");
  add_common(validate, val_o);

  auto* oracle = app.add_subcommand("oracle", "compare full-order CCE with exact evolution on small baths");
  add_common(oracle, oracle_o);
  int n_seeds = 5;
  std::size_t max_spins = 6;
  double oracle_r_max = 10.0;
  double tol = 1e-8;
  oracle->add_option("--seeds", n_seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  oracle->add_option("--max-spins", max_spins, "spins kept per bath")->check(CLI::Range(1, 8));
  oracle->add_option("--r-max", oracle_r_max, "sampling radius in angstrom")->check(CLI::PositiveNumber);
  oracle->add_option("--tolerance", tol, "pass threshold")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      const RunConfig c = resolve(run_o);
      const RunResult r = run_experiment(c);
      write_run_outputs(c, r);
      print_report(r);
      std::printf("wrote %s\n", c.output.path.c_str());
    } else if (*sweep) {
      const RunConfig c = resolve(sweep_o);
      const auto points = run_sweep(c, axis, values);
      write_sweep_outputs(c, axis, points);
      for (const auto& p : points) std::printf("%s = %.6g: I = %.6g\n", axis.c_str(), p.value, p.measure);
      std::printf("wrote %s\n", c.output.path.c_str());
    } else if (*validate) {
      std::cout << to_json(resolve(val_o)).dump(2) << "\n";
    } else if (*oracle) {
      return run_oracle(resolve(oracle_o), n_seeds, max_spins, oracle_r_max, tol);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kUsage;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  }
  return kOk;
}
