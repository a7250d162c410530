#pragma once

// End-to-end simulation of one configuration: bath sampling, bath coherence
// (CCE or exact), two-qubit system evolution, decay, concurrence, and the
// non-Markovianity report; plus parameter sweeps and artifact writing.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvsim/config.hpp"
#include "nvsim/metrics.hpp"

namespace nvsim {

struct RunResult {
  std::vector<double> times;
  std::vector<double> concurrence;
  std::vector<cplx> coherence;  // bath coherence L(t), ensemble averaged
  std::vector<DensityMatrix> states;
  /// Present when tomography is enabled.
  std::optional<std::vector<double>> concurrence_sigma;
  std::optional<std::vector<DensityMatrix>> reconstructed;
  NonMarkovReport report;
  double initial_fidelity = 0.0;
  double initial_concurrence = 0.0;
  std::vector<std::size_t> bath_sizes;  // one per ensemble member
  std::vector<std::string> warnings;
};

/// Samples 0, T/(n-1), ..., T.
std::vector<double> sample_times(const SequenceSettings& s);

/// Bath coherence averaged over the configured seeds.
CoherenceCurve bath_coherence(const RunConfig& config, const std::vector<double>& times,
                              std::vector<std::size_t>* bath_sizes = nullptr);

RunResult run_experiment(const RunConfig& config);

struct SweepPoint {
  double value = 0.0;
  double measure = 0.0;
  double max_revival_height = 0.0;
  std::optional<double> revival_time_s;
};

/// One independent run per value of the numeric field at `axis`
/// ("section.key"), reported in input order.
std::vector<SweepPoint> run_sweep(const RunConfig& config, const std::string& axis, const std::vector<double>& values);

/// Writes trajectory.csv or trajectory.json plus report.json (and
/// states.json when tomography is enabled) under config.output.path.
/// Each file is written to a temporary name and renamed into place.
void write_run_outputs(const RunConfig& config, const RunResult& result);
void write_sweep_outputs(const RunConfig& config, const std::string& axis, const std::vector<SweepPoint>& points);

nlohmann::json report_json(const RunConfig& config, const RunResult& result);
std::string trajectory_csv(const RunResult& result);

/// Replaces `path` with `contents` via a temporary file; throws IoError.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace nvsim
