#ifndef MARD_MATRIX_OPS_HPP_
#define MARD_MATRIX_OPS_HPP_

#include <Eigen/Dense>

#include "mard/errors.hpp"

namespace mard {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A square matrix checked to be symmetric positive definite on construction.
// Symmetry is required to within 1e-10 relative to the largest entry;
// positive definiteness is established by a successful Cholesky
// factorization, which is also the failure mode downstream solvers care
// about.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  const Matrix &mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  // Cholesky factor computed during validation, reusable by callers.
  const Eigen::LLT<Matrix> &llt() const { return llt_; }

  Matrix inverse() const;
  Vector solve(const Vector &b) const { return llt_.solve(b); }
  Matrix solve(const Matrix &b) const { return llt_.solve(b); }

 private:
  Matrix m_;
  Eigen::LLT<Matrix> llt_;
};

// Kronecker product: block (i,j) of the result is a(i,j) * b.
Matrix kron(const Matrix &a, const Matrix &b);

// Column-major stacking of a matrix into a vector.
Vector vec(const Matrix &a);

// Inverse of vec: reshape a vector of length rows*cols back to a matrix.
Matrix unvec(const Vector &v, Eigen::Index rows, Eigen::Index cols);

// The pq x pq permutation matrix G with G * vec(A) = vec(A^T) for every
// p x q matrix A.
Matrix commutation_matrix(Eigen::Index p, Eigen::Index q);

// Computes (A + C)^{-1} from A^{-1} and C^{-1} alone, via the Woodbury
// identity with U = V = I:
//   (A + C)^{-1} = A^{-1} - A^{-1} (C^{-1} + A^{-1})^{-1} A^{-1}.
// Throws SingularityError when the inner term C^{-1} + A^{-1} cannot be
// factorized.
SpdMatrix woodbury_inverse(const SpdMatrix &a_inv, const SpdMatrix &c_inv);

}  // namespace mard

#endif  // MARD_MATRIX_OPS_HPP_
