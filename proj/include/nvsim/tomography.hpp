#pragma once

// Shot-noise-limited two-qubit state tomography: simulated binomial readout,
// linear-inversion reconstruction with projection onto physical states, and
// parametric Monte Carlo error bars.

#include <cstdint>
#include <string>
#include <vector>

#include "nvsim/linops.hpp"

namespace nvsim {

struct TomographySetting {
  std::string label;
  Operator observable;
};

/// The 15 non-identity Pauli products on electron x ancilla, labels "IX" .. "ZZ"
/// (electron letter first).
std::vector<TomographySetting> pauli_settings();

struct TomographyEntry {
  double estimate = 0.0;
  std::int64_t shots = 0;
};

struct TomographyRecord {
  std::vector<TomographyEntry> entries;  // aligned with the settings list
  double contrast = 1.0;
  std::uint64_t seed = 0;
};

/// Exact expectations tr(rho O), packaged as a record with the given nominal
/// shot count (used for noiseless round trips).
TomographyRecord exact_record(const DensityMatrix& rho, const std::vector<TomographySetting>& settings,
                              std::int64_t shots = 1, double contrast = 1.0);

/// For each setting draws k ~ Binomial(shots, (1 + contrast tr(rho O))/2) and
/// reports (2k/shots - 1)/contrast.
TomographyRecord simulate_readout(const DensityMatrix& rho, const std::vector<TomographySetting>& settings,
                                  std::int64_t shots, double contrast, std::uint64_t seed);

/// Unit-trace Hermitian least-squares fit to the estimates (no positivity).
Matrix linear_inversion(const TomographyRecord& record, const std::vector<TomographySetting>& settings);

/// Closest unit-trace positive semidefinite matrix in Frobenius norm to a
/// Hermitian unit-trace input (eigenvalue clipping with water-filling).
Matrix project_to_density(const Matrix& hermitian);

DensityMatrix reconstruct(const TomographyRecord& record, const std::vector<TomographySetting>& settings);

struct BootstrapResult {
  DensityMatrix estimate;
  double concurrence = 0.0;
  /// Bootstrap bias estimate mean(C*) - C and the corrected value C - bias.
  double concurrence_bias = 0.0;
  double concurrence_corrected = 0.0;
  Eigen::MatrixXd real_sigma;  // element-wise standard deviations
  Eigen::MatrixXd imag_sigma;
  double concurrence_sigma = 0.0;
};

/// Parametric bootstrap (n_resamples >= 100): every resample redraws each
/// setting's count from the binomial law of the reconstructed state and is
/// reconstructed again. Resample r uses a generator seeded from (seed, r), so
/// the result does not depend on the number of threads.
BootstrapResult bootstrap_errors(const TomographyRecord& record, const std::vector<TomographySetting>& settings,
                                 int n_resamples, std::uint64_t seed, int threads = 1);

}  // namespace nvsim
