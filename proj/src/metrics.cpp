#include "nvsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nvsim/error.hpp"
#include "nvsim/tolerances.hpp"

namespace nvsim {

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) throw InvalidArgument("time series: times and values differ in length");
  if (times_.size() < 2) throw InvalidArgument("time series needs at least two samples");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k]) || !std::isfinite(values_[k])) {
      throw InvalidArgument("time series has non-finite entries");
    }
    if (k > 0 && !(times_[k] > times_[k - 1])) throw InvalidArgument("time series times not strictly increasing");
  }
}

double TimeSeries::interpolate(double t) const {
  if (t < times_.front() || t > times_.back()) throw InvalidArgument("interpolation time outside the series");
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::size_t>(it - times_.begin());
  if (times_[k] == t) return values_[k];
  const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  return values_[k - 1] + w * (values_[k] - values_[k - 1]);
}

const Revival* NonMarkovReport::largest_revival() const {
  const Revival* best = nullptr;
  for (const auto& r : revivals) {
    if (best == nullptr || r.height > best->height) best = &r;
  }
  return best;
}

double concurrence(const DensityMatrix& rho) {
  const auto& subs = rho.space().subsystems();
  if (subs.size() != 2 || subs[0].dim != 2 || subs[1].dim != 2) {
    throw InvalidArgument("concurrence requires a two-qubit state");
  }
  Matrix yy = Matrix::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  // With S = sqrt(rho), S rho~ S = M M^dagger for M = S Y S*, so the lambda_i
  // are the singular values of M. Taking them directly avoids the square root
  // of eigenvalues near zero, which turns roundoff of 1e-17 into 1e-9.
  const Eigensystem e = eig_hermitian(rho.matrix());
  // Eigenvalues below solver precision (including the tolerated negative
  // jitter) are zero.
  const double cut = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, e.values(0));
  RealVector sq(4);
  for (int k = 0; k < 4; ++k) sq(k) = e.values(k) > cut ? std::sqrt(e.values(k)) : 0.0;
  const Matrix root = e.vectors * sq.asDiagonal() * e.vectors.adjoint();
  const Matrix m = root * yy * root.conjugate();
  const RealVector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();  // descending
  const double lambda[4] = {sv(0), sv(1), sv(2), sv(3)};
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.space() == sigma.space())) throw InvalidArgument("fidelity: states live on different spaces");
  // tr(sigma rho) = sum_ij Re(rho_ij conj(sigma_ij)) for Hermitian arguments;
  // the summand is symmetric in its factors, so F(rho, sigma) == F(sigma, rho).
  const Matrix& a = rho.matrix();
  const Matrix& b = sigma.matrix();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      acc += a(i, j).real() * b(i, j).real() + a(i, j).imag() * b(i, j).imag();
    }
  }
  return acc;
}

double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.space() == sigma.space())) throw InvalidArgument("uhlmann_fidelity: states live on different spaces");
  const Eigen::SelfAdjointEigenSolver<Matrix> er(rho.matrix());
  const RealVector root = er.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix sqrt_rho = er.eigenvectors() * root.asDiagonal() * er.eigenvectors().adjoint();
  Matrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> ei(inner, Eigen::EigenvaluesOnly);
  const RealVector lam = ei.eigenvalues();
  const double cut = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, lam.maxCoeff());
  double t = 0.0;
  for (double l : lam) t += l > cut ? std::sqrt(l) : 0.0;
  return std::min(1.0, t * t);
}

double purity(const DensityMatrix& rho) { return fidelity(rho, rho); }

double total_variation(const TimeSeries& ts) {
  const auto& v = ts.values();
  double tv = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) tv += std::abs(v[k + 1] - v[k]);
  return tv;
}

NonMarkovReport non_markovianity(const TimeSeries& ts, double t0, double tmax) {
  if (!(t0 < tmax)) throw InvalidArgument("non_markovianity: requires t0 < tmax");
  if (t0 < ts.times().front() || tmax > ts.times().back()) {
    throw InvalidArgument("non_markovianity: window outside the series range");
  }
  std::vector<double> t{t0};
  std::vector<double> v{ts.interpolate(t0)};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts.times()[k] > t0 && ts.times()[k] < tmax) {
      t.push_back(ts.times()[k]);
      v.push_back(ts.values()[k]);
    }
  }
  t.push_back(tmax);
  v.push_back(ts.interpolate(tmax));
  if (t.size() < 2) throw InvalidArgument("non_markovianity: empty restriction window");

  NonMarkovReport rep;
  rep.t0 = t0;
  rep.tmax = tmax;
  rep.total_variation = total_variation(TimeSeries(t, v));
  rep.delta_e = v.front() - v.back();
  // |d| + d summed over steps: zero exactly when no step increases.
  double rise = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double d = v[k + 1] - v[k];
    if (d > 0) rise += d;
  }
  rep.measure = 2.0 * rise;

  std::size_t k = 0;
  while (k + 1 < v.size()) {
    if (v[k + 1] > v[k]) {
      const std::size_t start = k;
      while (k + 1 < v.size() && v[k + 1] > v[k]) ++k;
      rep.revivals.push_back({t[start], t[k], v[k] - v[start]});
    } else {
      ++k;
    }
  }
  return rep;
}

}  // namespace nvsim
