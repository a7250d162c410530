#include "nvsim/experiment.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "nvsim/cce.hpp"
#include "nvsim/error.hpp"
#include "nvsim/parallel.hpp"
#include "nvsim/tomography.hpp"

namespace nvsim {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

// Tomography seeds per trajectory sample, derived from the run seed.
std::uint64_t readout_seed(std::uint64_t seed, std::size_t k) { return seed * 1000003ULL + 2 * k; }
std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t k) { return seed * 1000003ULL + 2 * k + 1; }

}  // namespace

std::vector<double> sample_times(const SequenceSettings& s) {
  std::vector<double> t(static_cast<std::size_t>(s.n_samples));
  for (int k = 0; k < s.n_samples; ++k) t[k] = s.duration_s * k / (s.n_samples - 1);
  t.back() = s.duration_s;
  return t;
}

CoherenceCurve bath_coherence(const RunConfig& config, const std::vector<double>& times,
                              std::vector<std::size_t>* bath_sizes) {
  CoherenceCurve avg;
  avg.times = times;
  avg.values.assign(times.size(), cplx(0.0));
  for (int m = 0; m < config.bath.ensemble; ++m) {
    const std::uint64_t seed = config.bath.seed + static_cast<std::uint64_t>(m);
    const BathConfiguration bath = sample_bath(seed, config.bath.abundance, config.bath.r_min_angstrom,
                                               config.bath.r_max_angstrom, config.system);
    if (bath_sizes) bath_sizes->push_back(bath.size());
    CoherenceCurve one;
    if (config.bath.method == BathMethod::Exact) {
      if (bath.size() > kMaxExactBathSpins) {
        throw ConfigError("bath.method: exact evolution needs at most " + std::to_string(kMaxExactBathSpins) +
                          " bath spins, seed " + std::to_string(seed) + " has " + std::to_string(bath.size()));
      }
      one = exact_coherence(bath, config.system, config.shape(), times);
    } else {
      one = cce_coherence(bath, config.system, config.shape(), times, config.cce_options());
    }
    for (std::size_t k = 0; k < times.size(); ++k) avg.values[k] += one.values[k];
    for (const auto& w : one.warnings) avg.warnings.push_back("seed " + std::to_string(seed) + ": " + w);
  }
  for (auto& v : avg.values) v /= static_cast<double>(config.bath.ensemble);
  return avg;
}

RunResult run_experiment(const RunConfig& config) {
  config.validate();
  RunResult out;
  out.times = sample_times(config.sequence);
  const CoherenceCurve l = bath_coherence(config, out.times, &out.bath_sizes);
  out.coherence = l.values;
  out.warnings = l.warnings;

  const DensityMatrix rho0 = prepare_bell(config.preparation);
  out.initial_fidelity = fidelity(rho0, bell_phi_minus());
  out.initial_concurrence = concurrence(rho0);

  // The secular system Hamiltonian commutes with the electron populations and
  // the pulses only permute them, so system and bath factorize path by path:
  // evolve the system alone, then scale the electron coherences by L(t).
  const bool with_n14 = config.system.n14.has_value();
  const FreePropagator free(build_system_hamiltonian(config.system, true, with_n14));
  DensityMatrix start = rho0;
  if (with_n14) start = kron(rho0, DensityMatrix::maximally_mixed(SpaceLabel{{kNitrogen, 3}}));

  const SequenceShape shape = config.shape();
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    const double t = out.times[k];
    DensityMatrix sys = rho0;
    if (t > 0.0) {
      const DensityMatrix evolved = evolve(start, free, shape.build(t), {t}).front();
      sys = with_n14 ? partial_trace(evolved, {kElectron, kAncilla}) : evolved;
    }
    out.states.push_back(apply_decay(sys, out.coherence[k], t, config.system.t2n_star_s, config.decay));
    out.concurrence.push_back(concurrence(out.states.back()));
  }

  if (config.tomography.enabled) {
    const auto settings = pauli_settings();
    std::vector<double> sigma(out.times.size());
    std::vector<std::optional<DensityMatrix>> recon(out.times.size());
    parallel_for(out.times.size(), config.threads, [&](std::size_t k) {
      const auto record = simulate_readout(out.states[k], settings, config.tomography.shots,
                                           config.tomography.contrast, readout_seed(config.bath.seed, k));
      const auto boot =
          bootstrap_errors(record, settings, config.tomography.n_resamples, bootstrap_seed(config.bath.seed, k));
      sigma[k] = boot.concurrence_sigma;
      recon[k] = boot.estimate;
    });
    out.concurrence_sigma = sigma;
    out.reconstructed.emplace();
    for (auto& r : recon) out.reconstructed->push_back(std::move(*r));
  }

  const double t0 = config.analysis.t0_s.value_or(out.times.front());
  const double tmax = config.analysis.tmax_s.value_or(out.times.back());
  out.report = non_markovianity(TimeSeries(out.times, out.concurrence), t0, tmax);
  return out;
}

std::vector<SweepPoint> run_sweep(const RunConfig& config, const std::string& axis, const std::vector<double>& values) {
  const auto dot = axis.find('.');
  const json base = to_json(config);
  const json* field = nullptr;
  if (dot != std::string::npos) {
    const auto section = base.find(axis.substr(0, dot));
    if (section != base.end() && section->is_object()) {
      const auto it = section->find(axis.substr(dot + 1));
      if (it != section->end()) field = &*it;
    }
  } else if (base.contains(axis)) {
    field = &base.at(axis);
  }
  if (field == nullptr) throw ConfigError("sweep axis '" + axis + "' is not a configuration field");
  if (!field->is_number()) throw ConfigError("sweep axis '" + axis + "' is not a numeric field");
  const bool integral = field->is_number_integer();

  std::vector<RunConfig> configs;
  for (double v : values) {
    json doc = base;
    json& target = dot == std::string::npos ? doc[axis] : doc[axis.substr(0, dot)][axis.substr(dot + 1)];
    if (integral) {
      if (v != std::floor(v)) throw ConfigError(axis + ": sweep value " + format_double(v) + " is not an integer");
      target = static_cast<std::int64_t>(v);
    } else {
      target = v;
    }
    doc["threads"] = 1;
    configs.push_back(parse_config(doc));
  }

  std::vector<SweepPoint> points(values.size());
  parallel_for(values.size(), config.threads, [&](std::size_t i) {
    const RunResult r = run_experiment(configs[i]);
    SweepPoint p;
    p.value = values[i];
    p.measure = r.report.measure;
    if (const Revival* best = r.report.largest_revival()) {
      p.max_revival_height = best->height;
      p.revival_time_s = best->peak_s;
    }
    points[i] = p;
  });
  return points;
}

json report_json(const RunConfig& config, const RunResult& r) {
  json revivals = json::array();
  for (const auto& v : r.report.revivals) {
    revivals.push_back({{"start_s", v.start_s}, {"peak_s", v.peak_s}, {"height", v.height}});
  }
  json largest = nullptr;
  if (const Revival* best = r.report.largest_revival()) {
    largest = {{"start_s", best->start_s}, {"peak_s", best->peak_s}, {"height", best->height}};
  }
  return {
      {"effective_config", to_json(config)},
      {"non_markovianity",
       {{"measure", r.report.measure},
        {"total_variation", r.report.total_variation},
        {"delta_e", r.report.delta_e},
        {"t0_s", r.report.t0},
        {"tmax_s", r.report.tmax},
        {"largest_revival", largest},
        {"revivals", revivals}}},
      {"initial_state", {{"fidelity_phi_minus", r.initial_fidelity}, {"concurrence", r.initial_concurrence}}},
      {"bath_sizes", r.bath_sizes},
      {"larmor_period_s", 1.0 / config.system.larmor_hz()},
      {"warnings", r.warnings},
  };
}

std::string trajectory_csv(const RunResult& r) {
  std::string s = "time_s,concurrence,coherence_abs";
  if (r.concurrence_sigma) s += ",concurrence_sigma";
  s += '\n';
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    s += format_double(r.times[k]) + ',' + format_double(r.concurrence[k]) + ',' + format_double(std::abs(r.coherence[k]));
    if (r.concurrence_sigma) s += ',' + format_double((*r.concurrence_sigma)[k]);
    s += '\n';
  }
  return s;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

namespace {

std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return dir;
}

}  // namespace

void write_run_outputs(const RunConfig& config, const RunResult& r) {
  const auto dir = prepare_dir(config.output.path);
  if (config.output.format == OutputFormat::Csv) {
    write_file_atomic((dir / "trajectory.csv").string(), trajectory_csv(r));
  } else {
    json t = {{"time_s", r.times}, {"concurrence", r.concurrence}};
    std::vector<double> mag;
    for (const auto& l : r.coherence) mag.push_back(std::abs(l));
    t["coherence_abs"] = mag;
    if (r.concurrence_sigma) t["concurrence_sigma"] = *r.concurrence_sigma;
    write_file_atomic((dir / "trajectory.json").string(), t.dump(2) + "\n");
  }
  write_file_atomic((dir / "report.json").string(), report_json(config, r).dump(2) + "\n");
  if (r.reconstructed) {
    json states = json::array();
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      states.push_back({{"time_s", r.times[k]}, {"rho", matrix_json((*r.reconstructed)[k].matrix())}});
    }
    json doc = {{"layout", "row-major [re, im] pairs; basis |11>, |10>, |01>, |00> (electron, ancilla)"},
                {"states", states}};
    write_file_atomic((dir / "states.json").string(), doc.dump(2) + "\n");
  }
}

void write_sweep_outputs(const RunConfig& config, const std::string& axis, const std::vector<SweepPoint>& points) {
  const auto dir = prepare_dir(config.output.path);
  if (config.output.format == OutputFormat::Csv) {
    std::string s = "value,measure,max_revival_height,revival_time_s\n";
    for (const auto& p : points) {
      s += format_double(p.value) + ',' + format_double(p.measure) + ',' + format_double(p.max_revival_height) + ',' +
           (p.revival_time_s ? format_double(*p.revival_time_s) : std::string()) + '\n';
    }
    write_file_atomic((dir / "sweep.csv").string(), s);
  } else {
    json rows = json::array();
    for (const auto& p : points) {
      rows.push_back({{"value", p.value},
                      {"measure", p.measure},
                      {"max_revival_height", p.max_revival_height},
                      {"revival_time_s", p.revival_time_s ? json(*p.revival_time_s) : json(nullptr)}});
    }
    write_file_atomic((dir / "sweep.json").string(),
                      json{{"axis", axis}, {"effective_config", to_json(config)}, {"points", rows}}.dump(2) + "\n");
  }
}

}  // namespace nvsim
