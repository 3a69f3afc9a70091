#include "mard/matrix_ops.hpp"

#include <cmath>
#include <sstream>

namespace mard {

namespace {

void check_valid(const Matrix &m, const char *name) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw ParameterError(std::string(name) + ": matrix must be non-empty");
  }
  if (!m.allFinite()) {
    throw ParameterError(std::string(name) + ": matrix has non-finite entries");
  }
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  check_valid(m_, "SpdMatrix");
  if (m_.rows() != m_.cols()) {
    std::ostringstream msg;
    msg << "SpdMatrix: expected square matrix, got " << m_.rows() << "x" << m_.cols();
    throw ParameterError(msg.str());
  }
  const double scale = m_.cwiseAbs().maxCoeff();
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300)) {
    throw ParameterError("SpdMatrix: matrix is not symmetric");
  }
  // Fold any sub-tolerance asymmetry away so the factorization sees an
  // exactly symmetric matrix.
  m_ = ((m_ + m_.transpose()) / 2.0).eval();
  llt_.compute(m_);
  if (llt_.info() != Eigen::Success) {
    throw SingularityError("SpdMatrix: Cholesky factorization failed (matrix not positive definite)");
  }
}

Matrix SpdMatrix::inverse() const {
  return llt_.solve(Matrix::Identity(dim(), dim()));
}

Matrix kron(const Matrix &a, const Matrix &b) {
  check_valid(a, "kron");
  check_valid(b, "kron");
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix &a) {
  check_valid(a, "vec");
  Vector out(a.rows() * a.cols());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(k++) = a(i, j);
    }
  }
  return out;
}

Matrix unvec(const Vector &v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw ParameterError("unvec: vector length does not match target shape");
  }
  Matrix out(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      out(i, j) = v(k++);
    }
  }
  return out;
}

Matrix commutation_matrix(Eigen::Index p, Eigen::Index q) {
  if (p < 1 || q < 1) {
    throw ParameterError("commutation_matrix: dimensions must be >= 1");
  }
  // vec(A) places A(i,j) at j*p + i; vec(A^T) places it at i*q + j.
  Matrix g = Matrix::Zero(p * q, p * q);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      g(i * q + j, j * p + i) = 1.0;
    }
  }
  return g;
}

SpdMatrix woodbury_inverse(const SpdMatrix &a_inv, const SpdMatrix &c_inv) {
  if (a_inv.dim() != c_inv.dim()) {
    throw ParameterError("woodbury_inverse: operands must have the same dimension");
  }
  const Matrix inner = a_inv.mat() + c_inv.mat();
  Eigen::LLT<Matrix> inner_llt(inner);
  if (inner_llt.info() != Eigen::Success) {
    throw SingularityError("woodbury_inverse: inner term C^{-1} + A^{-1} is numerically singular");
  }
  Matrix result = a_inv.mat() - a_inv.mat() * inner_llt.solve(a_inv.mat());
  result = ((result + result.transpose()) / 2.0).eval();
  return SpdMatrix(std::move(result));
}

}  // namespace mard
