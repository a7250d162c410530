#pragma once

// Run configuration: a JSON document whose keys mirror the structs below.
// Every key is optional (defaults reproduce the reference setting) but
// unknown keys are rejected, and every error names the offending field.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "nvsim/cce.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/model.hpp"

namespace nvsim {

enum class BathMethod { Cce, Exact };
enum class OutputFormat { Csv, Json };

struct BathSettings {
  std::uint64_t seed = 1;
  double abundance = 0.011;
  double r_min_angstrom = 2.0;
  double r_max_angstrom = 30.0;
  std::size_t max_order = 2;
  double pair_cutoff_hz = 10.0;
  BathMethod method = BathMethod::Cce;
  /// Number of consecutive seeds (seed, seed+1, ...) whose coherence is
  /// averaged. One seed corresponds to a single NV center.
  int ensemble = 1;
};

struct SequenceSettings {
  SequenceKind kind = SequenceKind::Pdd;
  int n_pulses = 2;
  double duration_s = 100e-6;
  int n_samples = 201;
};

struct TomographySettings {
  bool enabled = false;
  std::int64_t shots = 1000000;
  double contrast = 0.3;
  int n_resamples = 200;
};

struct AnalysisSettings {
  std::optional<double> t0_s;    // default: first sample
  std::optional<double> tmax_s;  // default: last sample
};

struct OutputSettings {
  std::string path = "nvsim_out";
  OutputFormat format = OutputFormat::Csv;
};

/// Calibrated preparation for the default targets F = 0.88, C = 0.67 on the
/// default grid (see calibrate_preparation).
PreparationSpec default_preparation();

struct RunConfig {
  SystemParams system;
  BathSettings bath;
  SequenceSettings sequence;
  PreparationSpec preparation = default_preparation();
  DecayProfile decay = DecayProfile::Gaussian;
  TomographySettings tomography;
  AnalysisSettings analysis;
  OutputSettings output;
  int threads = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  SequenceShape shape() const { return {sequence.kind, sequence.n_pulses}; }
  CceOptions cce_options() const { return {bath.max_order, bath.pair_cutoff_hz, threads}; }
};

/// Parses and validates; throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a JSON file; throws IoError when unreadable, ConfigError when invalid.
RunConfig load_config(const std::string& path);
/// Full configuration with every field present; parse_config(to_json(c))
/// reproduces c exactly.
nlohmann::json to_json(const RunConfig& config);

std::string to_string(SequenceKind kind);
std::string to_string(BathMethod method);
std::string to_string(OutputFormat format);

}  // namespace nvsim
