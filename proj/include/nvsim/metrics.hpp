#pragma once

#include <vector>

#include "nvsim/linops.hpp"

namespace nvsim {

/// Strictly increasing sample times with finite real values (at least two).
class TimeSeries {
 public:
  TimeSeries(std::vector<double> times, std::vector<double> values);

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return times_.size(); }

  /// Piecewise-linear value at t inside [front, back].
  double interpolate(double t) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

struct Revival {
  double start_s = 0.0;  // preceding local minimum
  double peak_s = 0.0;
  double height = 0.0;   // peak - minimum
};

struct NonMarkovReport {
  double measure = 0.0;  // I^(E)
  double total_variation = 0.0;
  double delta_e = 0.0;  // E(t0) - E(tmax)
  double t0 = 0.0;
  double tmax = 0.0;
  std::vector<Revival> revivals;

  const Revival* largest_revival() const;
};

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

/// Linear overlap tr(sigma rho). This is not the Uhlmann fidelity; the two
/// agree only when one argument is pure.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, in [0, 1].
double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

double purity(const DensityMatrix& rho);

/// Sum of |v_{k+1} - v_k|.
double total_variation(const TimeSeries& ts);

/// Entanglement-based non-Markovianity over [t0, tmax]:
///   I = sum |dE| - (E(t0) - E(tmax)),
/// evaluated on the series restricted to the window with linearly
/// interpolated endpoints.
NonMarkovReport non_markovianity(const TimeSeries& ts, double t0, double tmax);

}  // namespace nvsim
