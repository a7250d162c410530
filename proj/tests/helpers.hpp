#pragma once

#include <random>

#include "nvsim/linops.hpp"

namespace testing_support {

inline nvsim::Matrix random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  nvsim::Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = {g(rng), g(rng)};
  }
  return m;
}

inline nvsim::Matrix random_hermitian(std::mt19937_64& rng, int d) {
  const nvsim::Matrix m = random_matrix(rng, d);
  return 0.5 * (m + m.adjoint());
}

/// Haar-ish random unitary from the QR factor of a Ginibre matrix.
inline nvsim::Matrix random_unitary(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<nvsim::Matrix> qr(random_matrix(rng, d));
  return qr.householderQ() * nvsim::Matrix::Identity(d, d);
}

/// Random full-rank mixed state G G^dagger / tr.
inline nvsim::Matrix random_state_matrix(std::mt19937_64& rng, int d) {
  const nvsim::Matrix g = random_matrix(rng, d);
  nvsim::Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline nvsim::Vector random_ket(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  nvsim::Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = {g(rng), g(rng)};
  return v / v.norm();
}

inline double max_abs(const nvsim::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
