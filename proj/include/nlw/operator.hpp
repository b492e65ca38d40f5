#pragma once

// Dense complex operators on small Hilbert spaces and validated quantum
// states. Everything here is an immutable value type.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include "nlw/errors.hpp"

namespace nlw {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kDefaultStateTolerance = 1e-10;

class Operator {
 public:
  Operator() = default;

  explicit Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw InvalidArgument("operator must be square, got " +
                            std::to_string(m_.rows()) + "x" +
                            std::to_string(m_.cols()));
    }
    if (!m_.allFinite()) throw InvalidArgument("operator has non-finite entries");
  }

  static Operator zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }
  static Operator identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

  /// |row><col|
  static Operator outer(int dim, int row, int col) {
    Matrix m = Matrix::Zero(dim, dim);
    m(row, col) = 1.0;
    return Operator(std::move(m));
  }

  static Operator projector(int dim, int level) { return outer(dim, level, level); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

  Complex trace() const { return m_.trace(); }

  bool is_hermitian(double tol = kDefaultStateTolerance) const {
    return hermiticity_error() <= tol;
  }

  /// max |a_ij - conj(a_ji)|
  double hermiticity_error() const {
    if (m_.size() == 0) return 0.0;
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  }

  friend Operator operator+(const Operator& a, const Operator& b) {
    check_same_dim(a, b);
    return Operator(a.m_ + b.m_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    check_same_dim(a, b);
    return Operator(a.m_ - b.m_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    check_same_dim(a, b);
    return Operator(a.m_ * b.m_);
  }
  friend Operator operator*(Complex s, const Operator& a) { return Operator(s * a.m_); }
  friend Operator operator*(const Operator& a, Complex s) { return Operator(s * a.m_); }

  friend bool operator==(const Operator& a, const Operator& b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

  static void check_same_dim(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
  }

 private:
  Matrix m_;
};

/// ab - ba
inline Operator commutator(const Operator& a, const Operator& b) {
  Operator::check_same_dim(a, b);
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

/// trace(obs * rho)
inline Complex expectation(const Operator& obs, const Operator& rho) {
  Operator::check_same_dim(obs, rho);
  // trace(AB) = sum_ij A_ij B_ji
  return (obs.matrix().transpose().cwiseProduct(rho.matrix())).sum();
}

inline Operator adjoint(const Operator& a) { return Operator(a.matrix().adjoint()); }

/// A Hermitian, unit-trace, positive semidefinite operator. Only obtainable
/// through validate_density().
class DensityMatrix {
 public:
  const Operator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  int dim() const { return op_.dim(); }
  double tolerance() const { return tol_; }

  /// Populations (diagonal) in the stored basis.
  Eigen::VectorXd populations() const { return op_.matrix().diagonal().real(); }

  /// Largest off-diagonal modulus; zero for classical mixtures of basis states.
  double max_coherence() const {
    double worst = 0.0;
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j)
        if (i != j) worst = std::max(worst, std::abs(op_(i, j)));
    return worst;
  }

 private:
  DensityMatrix(Operator op, double tol) : op_(std::move(op)), tol_(tol) {}
  friend DensityMatrix validate_density(const Operator& rho, double tol);

  Operator op_;
  double tol_ = kDefaultStateTolerance;
};

inline DensityMatrix validate_density(const Operator& rho,
                                      double tol = kDefaultStateTolerance) {
  if (tol < 0.0) throw InvalidArgument("tolerance must be non-negative");
  if (rho.dim() == 0) throw InvalidArgument("density matrix must be non-empty");

  const double herm = rho.hermiticity_error();
  if (herm > tol) throw NotHermitian(herm);

  const double trace_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (trace_err > tol) throw TraceNotOne(trace_err);

  // Eigenvalues of the Hermitian part; reports the most negative one.
  const Matrix herm_part = 0.5 * (rho.matrix() + rho.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm_part, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -tol) throw NotPositive(-min_eig);

  return DensityMatrix(rho, tol);
}

/// Perturbative intermediate in Liouville space: a general (non-state)
/// operator that only has to be finite.
class LiouvilleVector {
 public:
  LiouvilleVector() = default;
  explicit LiouvilleVector(Operator op) : op_(std::move(op)) {}
  LiouvilleVector(const DensityMatrix& rho) : op_(rho.op()) {}  // NOLINT: lifting a state is always valid

  const Operator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  int dim() const { return op_.dim(); }

  friend LiouvilleVector operator+(const LiouvilleVector& a, const LiouvilleVector& b) {
    return LiouvilleVector(a.op_ + b.op_);
  }
  friend LiouvilleVector operator*(Complex s, const LiouvilleVector& a) {
    return LiouvilleVector(s * a.op_);
  }

 private:
  Operator op_;
};

}  // namespace nlw
