#pragma once

// Dense complex operators over labeled tensor-product Hilbert spaces.
//
// Conventions used throughout the library:
//  * Hamiltonians are expressed in Hz; propagators are exp(-i 2 pi H t).
//  * Subsystem order in a SpaceLabel is tensor (Kronecker) order.
//  * Inside a subsystem, basis states run in descending magnetic quantum
//    number (m = +s, ..., -s).

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nvsim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct Subsystem {
  std::string name;
  int dim = 0;

  bool operator==(const Subsystem&) const = default;
};

/// Ordered list of named subsystems; the total dimension is the product of
/// their dimensions.
class SpaceLabel {
 public:
  SpaceLabel() = default;
  explicit SpaceLabel(std::vector<Subsystem> subsystems);
  SpaceLabel(std::initializer_list<Subsystem> subsystems)
      : SpaceLabel(std::vector<Subsystem>(subsystems)) {}

  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  std::size_t size() const { return subsystems_.size(); }
  int dim() const { return dim_; }

  bool contains(std::string_view name) const;
  /// Position of `name` in tensor order; throws InvalidArgument when absent.
  std::size_t position(std::string_view name) const;
  int dim_of(std::string_view name) const { return subsystems_[position(name)].dim; }

  /// Concatenation `*this` followed by `other`; throws on a name collision.
  SpaceLabel concat(const SpaceLabel& other) const;

  bool operator==(const SpaceLabel& other) const { return subsystems_ == other.subsystems_; }

 private:
  std::vector<Subsystem> subsystems_;
  int dim_ = 1;
};

/// Square complex matrix acting on a SpaceLabel.
class Operator {
 public:
  Operator() = default;
  Operator(SpaceLabel space, Matrix entries);

  static Operator identity(const SpaceLabel& space);
  static Operator zero(const SpaceLabel& space);

  const SpaceLabel& space() const { return space_; }
  const Matrix& matrix() const { return m_; }
  int dim() const { return space_.dim(); }
  cplx operator()(int r, int c) const { return m_(r, c); }

  Operator adjoint() const { return {space_, m_.adjoint()}; }
  cplx trace() const { return m_.trace(); }

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, cplx s) { return a *= s; }
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);

 private:
  SpaceLabel space_;
  Matrix m_;
};

/// max |A - A^dagger|.
double hermiticity_error(const Matrix& m);
/// max |U U^dagger - I|.
double unitarity_error(const Matrix& m);
bool is_hermitian(const Operator& op, double tol);
bool is_unitary(const Operator& op, double tol);

/// Validated quantum state: Hermitian, unit trace and positive semidefinite
/// within the library tolerances. Construction throws NumericalError otherwise.
class DensityMatrix {
 public:
  DensityMatrix(SpaceLabel space, Matrix entries);
  explicit DensityMatrix(const Operator& op) : DensityMatrix(op.space(), op.matrix()) {}

  /// Symmetrizes (m + m^dagger)/2 before validation. Used on the output of
  /// propagation, where roundoff breaks exact Hermiticity.
  static DensityMatrix hermitized(SpaceLabel space, const Matrix& entries);
  static DensityMatrix pure(SpaceLabel space, const Vector& psi);
  static DensityMatrix maximally_mixed(SpaceLabel space);

  const SpaceLabel& space() const { return space_; }
  const Matrix& matrix() const { return m_; }
  int dim() const { return space_.dim(); }
  cplx operator()(int r, int c) const { return m_(r, c); }
  Operator as_operator() const { return {space_, m_}; }

 private:
  SpaceLabel space_;
  Matrix m_;
};

/// Checks the DensityMatrix invariants without constructing one; returns an
/// empty string on success or a description of the first violated invariant.
std::string density_matrix_violation(const Matrix& m);

struct SpinOperators {
  Operator x, y, z;
};

/// Angular momentum matrices for spin 1/2 or 1 on a one-subsystem space.
SpinOperators spin_operators(double spin, std::string name = "s");

/// Tensor product; the result's space is the concatenation of the inputs'.
Operator kron(const Operator& a, const Operator& b);
DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b);

/// Lifts an operator defined on a single subsystem into `space`, acting as the
/// identity elsewhere. The operator's one subsystem must match by name and dim.
Operator embed(const Operator& local, const SpaceLabel& space);

struct Eigensystem {
  RealVector values;  // descending
  Matrix vectors;     // columns
};

/// Spectral decomposition of a Hermitian operator, eigenvalues descending.
Eigensystem eig_hermitian(const Operator& h);
Eigensystem eig_hermitian(const Matrix& h);

/// exp(-i 2 pi h t) for Hermitian h (Hz) and t (s).
Operator expm_hermitian(const Operator& h, double t);

/// Cached spectral decomposition for repeated free-evolution propagators.
class FreePropagator {
 public:
  explicit FreePropagator(const Operator& h);
  /// exp(-i 2 pi h t)
  Matrix at(double t) const;
  const SpaceLabel& space() const { return space_; }

 private:
  SpaceLabel space_;
  Eigensystem eig_;
};

/// Trace over every subsystem not named in `keep` (no state validation).
Operator partial_trace(const Operator& op, std::span<const std::string> keep);

/// Trace over every subsystem not named in `keep`. Kept subsystems retain
/// their original relative order.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep);

}  // namespace nvsim
