#include "nvsim/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "nvsim/error.hpp"
#include "nvsim/tolerances.hpp"

namespace nvsim {

SpaceLabel::SpaceLabel(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
  std::set<std::string> seen;
  for (const auto& s : subsystems_) {
    if (s.dim <= 0) throw InvalidArgument("subsystem '" + s.name + "' has non-positive dimension");
    if (!seen.insert(s.name).second) throw InvalidArgument("duplicate subsystem name '" + s.name + "'");
    dim_ *= s.dim;
  }
}

bool SpaceLabel::contains(std::string_view name) const {
  return std::any_of(subsystems_.begin(), subsystems_.end(),
                     [&](const Subsystem& s) { return s.name == name; });
}

std::size_t SpaceLabel::position(std::string_view name) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].name == name) return i;
  }
  throw InvalidArgument("unknown subsystem '" + std::string(name) + "'");
}

SpaceLabel SpaceLabel::concat(const SpaceLabel& other) const {
  std::vector<Subsystem> all = subsystems_;
  all.insert(all.end(), other.subsystems_.begin(), other.subsystems_.end());
  return SpaceLabel(std::move(all));
}

Operator::Operator(SpaceLabel space, Matrix entries) : space_(std::move(space)), m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("operator matrix is not square");
  if (m_.rows() != space_.dim()) {
    std::ostringstream os;
    os << "operator dimension " << m_.rows() << " does not match space dimension " << space_.dim();
    throw InvalidArgument(os.str());
  }
}

Operator Operator::identity(const SpaceLabel& space) {
  return {space, Matrix::Identity(space.dim(), space.dim())};
}

Operator Operator::zero(const SpaceLabel& space) { return {space, Matrix::Zero(space.dim(), space.dim())}; }

namespace {

void require_same_space(const SpaceLabel& a, const SpaceLabel& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": operator spaces differ");
}

}  // namespace

Operator& Operator::operator+=(const Operator& o) {
  require_same_space(space_, o.space_, "operator+");
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  require_same_space(space_, o.space_, "operator-");
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_space(a.space_, b.space_, "operator*");
  return {a.space_, a.m_ * b.m_};
}

double hermiticity_error(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_error(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m * m.adjoint() - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Operator& op, double tol) { return hermiticity_error(op.matrix()) <= tol; }
bool is_unitary(const Operator& op, double tol) { return unitarity_error(op.matrix()) <= tol; }

std::string density_matrix_violation(const Matrix& m) {
  std::ostringstream os;
  if (m.rows() != m.cols() || m.rows() == 0) return "density matrix is not a non-empty square matrix";
  if (!m.allFinite()) return "density matrix has non-finite entries";
  const double herm = hermiticity_error(m);
  if (herm > tol::kHermitian) {
    os << "density matrix not Hermitian (max deviation " << herm << ")";
    return os.str();
  }
  const cplx tr = m.trace();
  if (std::abs(tr - 1.0) > tol::kTrace) {
    os << "density matrix trace " << tr.real() << (tr.imag() >= 0 ? "+" : "") << tr.imag() << "i != 1";
    return os.str();
  }
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -tol::kPsd) {
    os << "density matrix not positive semidefinite (min eigenvalue " << min_ev << ")";
    return os.str();
  }
  return {};
}

DensityMatrix::DensityMatrix(SpaceLabel space, Matrix entries) : space_(std::move(space)), m_(std::move(entries)) {
  if (m_.rows() != space_.dim() || m_.cols() != space_.dim()) {
    throw InvalidArgument("density matrix dimension does not match its space");
  }
  if (auto why = density_matrix_violation(m_); !why.empty()) throw NumericalError(why);
}

DensityMatrix DensityMatrix::hermitized(SpaceLabel space, const Matrix& entries) {
  Matrix sym = 0.5 * (entries + entries.adjoint());
  return {std::move(space), std::move(sym)};
}

DensityMatrix DensityMatrix::pure(SpaceLabel space, const Vector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw InvalidArgument("pure state from a zero vector");
  const Vector v = psi / n;
  return hermitized(std::move(space), v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(SpaceLabel space) {
  const int d = space.dim();
  return {std::move(space), Matrix::Identity(d, d) / static_cast<double>(d)};
}

SpinOperators spin_operators(double spin, std::string name) {
  int dim = 0;
  if (spin == 0.5) {
    dim = 2;
  } else if (spin == 1.0) {
    dim = 3;
  } else {
    throw InvalidArgument("unsupported spin value " + std::to_string(spin) + " (expected 1/2 or 1)");
  }
  SpaceLabel space{{std::move(name), dim}};
  Matrix sz = Matrix::Zero(dim, dim);
  Matrix sp = Matrix::Zero(dim, dim);  // raising operator
  for (int k = 0; k < dim; ++k) {
    const double m = spin - k;
    sz(k, k) = m;
    if (k > 0) {
      // <m+1| S+ |m> = sqrt(s(s+1) - m(m+1)); row k-1 holds m+1.
      sp(k - 1, k) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
    }
  }
  const Matrix sm = sp.adjoint();
  const Matrix sx = 0.5 * (sp + sm);
  const Matrix sy = cplx(0.0, -0.5) * (sp - sm);
  return {Operator(space, sx), Operator(space, sy), Operator(space, sz)};
}

Operator kron(const Operator& a, const Operator& b) {
  SpaceLabel space = a.space().concat(b.space());
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return {std::move(space), std::move(out)};
}

DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b) {
  const Operator k = kron(a.as_operator(), b.as_operator());
  return DensityMatrix::hermitized(k.space(), k.matrix());
}

Operator embed(const Operator& local, const SpaceLabel& space) {
  if (local.space().size() != 1) throw InvalidArgument("embed: operator must act on exactly one subsystem");
  const Subsystem& sub = local.space().subsystems().front();
  const std::size_t pos = space.position(sub.name);
  if (space.subsystems()[pos].dim != sub.dim) {
    throw InvalidArgument("embed: dimension mismatch for subsystem '" + sub.name + "'");
  }
  int left = 1;
  int right = 1;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (i < pos) left *= space.subsystems()[i].dim;
    if (i > pos) right *= space.subsystems()[i].dim;
  }
  const int d = space.dim();
  Matrix out = Matrix::Zero(d, d);
  const Matrix& m = local.matrix();
  // index = (l * dim + s) * right + r
  for (int l = 0; l < left; ++l) {
    for (int r = 0; r < right; ++r) {
      for (int s = 0; s < sub.dim; ++s) {
        for (int t = 0; t < sub.dim; ++t) {
          if (m(s, t) == cplx(0.0)) continue;
          out((l * sub.dim + s) * right + r, (l * sub.dim + t) * right + r) = m(s, t);
        }
      }
    }
  }
  return {space, std::move(out)};
}

Eigensystem eig_hermitian(const Matrix& h) {
  const double herm = hermiticity_error(h);
  if (herm > tol::kHermitian * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "eig_hermitian: input not Hermitian (max deviation " << herm << ")";
    throw InvalidArgument(os.str());
  }
  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("eig_hermitian: eigensolver did not converge");
  const Eigen::Index n = sym.rows();
  Eigensystem out{RealVector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

Eigensystem eig_hermitian(const Operator& h) { return eig_hermitian(h.matrix()); }

FreePropagator::FreePropagator(const Operator& h) : space_(h.space()), eig_(eig_hermitian(h)) {
  // Re-orthonormalize so every propagator is unitary to working precision.
  Eigen::HouseholderQR<Matrix> qr(eig_.vectors);
  Matrix q = qr.householderQ() * Matrix::Identity(eig_.vectors.rows(), eig_.vectors.cols());
  // Keep the phase of each original column.
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const cplx overlap = q.col(k).dot(eig_.vectors.col(k));
    if (std::abs(overlap) > 0) q.col(k) *= overlap / std::abs(overlap);
  }
  if ((q - eig_.vectors).cwiseAbs().maxCoeff() < 1e-8) eig_.vectors = q;
}

Matrix FreePropagator::at(double t) const {
  const Eigen::Index n = eig_.values.size();
  Vector phases(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    phases(k) = std::polar(1.0, -2.0 * std::numbers::pi * eig_.values(k) * t);
  }
  return eig_.vectors * phases.asDiagonal() * eig_.vectors.adjoint();
}

Operator expm_hermitian(const Operator& h, double t) {
  if (t == 0.0) {
    if (hermiticity_error(h.matrix()) > tol::kHermitian * std::max(1.0, h.matrix().cwiseAbs().maxCoeff())) {
      throw InvalidArgument("expm_hermitian: input not Hermitian");
    }
    return Operator::identity(h.space());
  }
  FreePropagator p(h);
  return {h.space(), p.at(t)};
}

Operator partial_trace(const Operator& op, std::span<const std::string> keep) {
  const SpaceLabel& space = op.space();
  if (keep.empty()) throw InvalidArgument("partial_trace: keep list is empty");
  std::vector<bool> kept(space.size(), false);
  for (const auto& name : keep) kept[space.position(name)] = true;

  std::vector<Subsystem> kept_subs;
  std::vector<int> strides(space.size());
  int stride = 1;
  for (std::size_t i = space.size(); i-- > 0;) {
    strides[i] = stride;
    stride *= space.subsystems()[i].dim;
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (kept[i]) kept_subs.push_back(space.subsystems()[i]);
  }
  SpaceLabel out_space(kept_subs);
  const int dk = out_space.dim();
  const int dt = space.dim() / dk;

  // full index from (kept multi-index k, traced multi-index t)
  auto full_index = [&](int k, int t) {
    int idx = 0;
    for (std::size_t i = space.size(); i-- > 0;) {
      const int d = space.subsystems()[i].dim;
      if (kept[i]) {
        idx += (k % d) * strides[i];
        k /= d;
      } else {
        idx += (t % d) * strides[i];
        t /= d;
      }
    }
    return idx;
  };
  std::vector<int> table(static_cast<std::size_t>(dk) * dt);
  for (int k = 0; k < dk; ++k) {
    for (int t = 0; t < dt; ++t) table[static_cast<std::size_t>(k) * dt + t] = full_index(k, t);
  }
  Matrix out = Matrix::Zero(dk, dk);
  const Matrix& m = op.matrix();
  for (int a = 0; a < dk; ++a) {
    for (int b = 0; b < dk; ++b) {
      cplx acc = 0.0;
      for (int t = 0; t < dt; ++t) {
        acc += m(table[static_cast<std::size_t>(a) * dt + t], table[static_cast<std::size_t>(b) * dt + t]);
      }
      out(a, b) = acc;
    }
  }
  return {std::move(out_space), std::move(out)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  const Operator reduced = partial_trace(rho.as_operator(), keep);
  return DensityMatrix::hermitized(reduced.space(), reduced.matrix());
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep) {
  std::vector<std::string> names(keep);
  return partial_trace(rho, std::span<const std::string>(names));
}

}  // namespace nvsim
