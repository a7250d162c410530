#include "nvsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nvsim/dynamics.hpp"
#include "nvsim/error.hpp"
#include "nvsim/metrics.hpp"
#include "nvsim/model.hpp"
#include "nvsim/parallel.hpp"

namespace nvsim {

namespace {

Matrix pauli(char which) {
  Matrix m = Matrix::Zero(2, 2);
  switch (which) {
    case 'I':
      m(0, 0) = m(1, 1) = 1.0;
      break;
    case 'X':
      m(0, 1) = m(1, 0) = 1.0;
      break;
    case 'Y':
      m(0, 1) = cplx(0.0, -1.0);
      m(1, 0) = cplx(0.0, 1.0);
      break;
    case 'Z':
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw InvalidArgument("unknown Pauli letter");
  }
  return m;
}

void check_aligned(const TomographyRecord& record, const std::vector<TomographySetting>& settings) {
  if (settings.empty()) throw InvalidArgument("tomography needs at least one setting");
  if (record.entries.size() != settings.size()) {
    throw InvalidArgument("tomography record has " + std::to_string(record.entries.size()) + " entries for " +
                          std::to_string(settings.size()) + " settings");
  }
  const SpaceLabel& space = settings.front().observable.space();
  for (const auto& s : settings) {
    if (!(s.observable.space() == space)) throw InvalidArgument("tomography settings act on different spaces");
  }
  for (const auto& e : record.entries) {
    if (e.shots <= 0) throw InvalidArgument("tomography shot counts must be positive");
    if (!std::isfinite(e.estimate)) throw InvalidArgument("tomography estimate is not finite");
  }
}

void check_contrast(double contrast) {
  if (!(contrast > 0.0 && contrast <= 1.0)) throw InvalidArgument("readout contrast must lie in (0, 1]");
}

std::mt19937_64 sub_generator(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double draw_estimate(std::mt19937_64& rng, double probability, std::int64_t shots, double contrast) {
  std::binomial_distribution<std::int64_t> dist(shots, std::clamp(probability, 0.0, 1.0));
  const std::int64_t k = dist(rng);
  return (2.0 * static_cast<double>(k) / static_cast<double>(shots) - 1.0) / contrast;
}

}  // namespace

std::vector<TomographySetting> pauli_settings() {
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  std::vector<TomographySetting> out;
  for (char a : letters) {
    for (char b : letters) {
      if (a == 'I' && b == 'I') continue;
      const Operator pa(SpaceLabel{{kElectron, 2}}, pauli(a));
      const Operator pb(SpaceLabel{{kAncilla, 2}}, pauli(b));
      out.push_back({std::string{a, b}, kron(pa, pb)});
    }
  }
  return out;
}

TomographyRecord exact_record(const DensityMatrix& rho, const std::vector<TomographySetting>& settings,
                              std::int64_t shots, double contrast) {
  check_contrast(contrast);
  TomographyRecord record;
  record.contrast = contrast;
  for (const auto& s : settings) {
    if (!(s.observable.space() == rho.space())) throw InvalidArgument("setting and state spaces differ");
    record.entries.push_back({(rho.matrix() * s.observable.matrix()).trace().real(), shots});
  }
  return record;
}

TomographyRecord simulate_readout(const DensityMatrix& rho, const std::vector<TomographySetting>& settings,
                                  std::int64_t shots, double contrast, std::uint64_t seed) {
  check_contrast(contrast);
  if (shots < 1) throw InvalidArgument("shots must be at least 1");
  std::mt19937_64 rng(seed);
  TomographyRecord record;
  record.contrast = contrast;
  record.seed = seed;
  for (const auto& s : settings) {
    if (!(s.observable.space() == rho.space())) throw InvalidArgument("setting and state spaces differ");
    const double expectation = (rho.matrix() * s.observable.matrix()).trace().real();
    const double p = 0.5 * (1.0 + contrast * expectation);
    record.entries.push_back({draw_estimate(rng, p, shots, contrast), shots});
  }
  return record;
}

Matrix linear_inversion(const TomographyRecord& record, const std::vector<TomographySetting>& settings) {
  check_aligned(record, settings);
  const int d = settings.front().observable.dim();
  const int n = static_cast<int>(settings.size());
  // Rows: tr(rho O_k) = sum_ij rho_ij O_ji, plus the trace constraint.
  Matrix a(n + 1, d * d);
  Vector b(n + 1);
  for (int k = 0; k <= n; ++k) {
    const Matrix o = k < n ? settings[k].observable.matrix() : Matrix::Identity(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) a(k, i * d + j) = o(j, i);
    }
    b(k) = k < n ? record.entries[k].estimate : 1.0;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> solver(a);
  solver.setThreshold(1e-10);
  if (solver.rank() < d * d) {
    throw InvalidArgument("tomography settings are not informationally complete (rank " +
                          std::to_string(solver.rank()) + " < " + std::to_string(d * d) + ")");
  }
  const Vector x = solver.solve(b);
  Matrix rho(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) rho(i, j) = x(i * d + j);
  }
  return 0.5 * (rho + rho.adjoint());
}

Matrix project_to_density(const Matrix& hermitian) {
  const Eigensystem e = eig_hermitian(hermitian);
  const int d = static_cast<int>(e.values.size());
  RealVector mu = e.values;  // descending
  const double trace = mu.sum();
  if (std::abs(trace - 1.0) > 1e-8) throw InvalidArgument("projection expects a unit-trace input");
  // Zero eigenvalues from the bottom while the shared deficit would push them
  // negative; spread the removed mass evenly over the survivors.
  int keep = d;
  double deficit = 0.0;
  while (keep > 0 && mu(keep - 1) + deficit / keep < 0.0) {
    deficit += mu(keep - 1);
    mu(keep - 1) = 0.0;
    --keep;
  }
  for (int k = 0; k < keep; ++k) mu(k) += deficit / keep;
  Matrix out = e.vectors * mu.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  out = 0.5 * (out + out.adjoint());
  out /= out.trace().real();
  return out;
}

DensityMatrix reconstruct(const TomographyRecord& record, const std::vector<TomographySetting>& settings) {
  const Matrix lin = linear_inversion(record, settings);
  return DensityMatrix::hermitized(settings.front().observable.space(), project_to_density(lin));
}

BootstrapResult bootstrap_errors(const TomographyRecord& record, const std::vector<TomographySetting>& settings,
                                 int n_resamples, std::uint64_t seed, int threads) {
  check_aligned(record, settings);
  check_contrast(record.contrast);
  if (n_resamples < 100) throw InvalidArgument("bootstrap needs at least 100 resamples");
  const DensityMatrix estimate = reconstruct(record, settings);
  const int d = estimate.dim();

  // Resample around the fitted physical state rather than the raw estimates,
  // which may lie outside the set of attainable expectations.
  std::vector<double> fitted;
  for (const auto& s : settings) fitted.push_back((estimate.matrix() * s.observable.matrix()).trace().real());

  std::vector<Matrix> samples(n_resamples);
  std::vector<double> conc(n_resamples);
  parallel_for(static_cast<std::size_t>(n_resamples), threads, [&](std::size_t r) {
    std::mt19937_64 rng = sub_generator(seed, r);
    TomographyRecord resample = record;
    for (std::size_t k = 0; k < resample.entries.size(); ++k) {
      auto& e = resample.entries[k];
      e.estimate = draw_estimate(rng, 0.5 * (1.0 + record.contrast * fitted[k]), e.shots, record.contrast);
    }
    const DensityMatrix rho = reconstruct(resample, settings);
    samples[r] = rho.matrix();
    conc[r] = concurrence(rho);
  });

  Matrix mean = Matrix::Zero(d, d);
  double conc_mean = 0.0;
  for (int r = 0; r < n_resamples; ++r) {
    mean += samples[r];
    conc_mean += conc[r];
  }
  mean /= static_cast<double>(n_resamples);
  conc_mean /= n_resamples;
  Eigen::MatrixXd re = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(d, d);
  double conc_var = 0.0;
  for (int r = 0; r < n_resamples; ++r) {
    const Matrix dev = samples[r] - mean;
    re += dev.real().cwiseAbs2();
    im += dev.imag().cwiseAbs2();
    conc_var += (conc[r] - conc_mean) * (conc[r] - conc_mean);
  }
  const double norm = 1.0 / (n_resamples - 1);
  BootstrapResult out{estimate, concurrence(estimate), 0.0, 0.0, (re * norm).cwiseSqrt(), (im * norm).cwiseSqrt(),
                      std::sqrt(conc_var * norm)};
  out.concurrence_bias = conc_mean - out.concurrence;
  out.concurrence_corrected = out.concurrence - out.concurrence_bias;
  return out;
}

}  // namespace nvsim
