#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "camg/sparse.hpp"

namespace camg {

/// Row-major dense matrix for local patch solves, coarse solves and
/// eigenvalue oracles. Not meant for large systems.
struct DenseMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  std::vector<double> values;  // row-major

  DenseMatrix() = default;
  DenseMatrix(index_t r, index_t c) : nrows(r), ncols(c), values(r * c, 0.0) {}

  double& operator()(index_t i, index_t j) { return values[i * ncols + j]; }
  double operator()(index_t i, index_t j) const { return values[i * ncols + j]; }

  static DenseMatrix identity(index_t n);
};

struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& what, index_t pivot)
      : std::runtime_error(what), pivot_index(pivot) {}
  index_t pivot_index;
};

DenseMatrix to_dense(const SparseMatrix& A);
SparseMatrix to_sparse(const DenseMatrix& A, double drop_tol = 0.0);

/// Direct solve M x = b. Uses a symmetric factorization when M is symmetric,
/// LU with pivoting otherwise. Pivots below 1e-14 * max|M| raise
/// SingularMatrixError with the offending pivot index.
std::vector<double> dense_solve(const DenseMatrix& M, std::span<const double> b);

/// Least-squares/pseudo solve via symmetric eigendecomposition; eigenvalues
/// with |lambda| <= 1e-12 * |lambda|_max are truncated.
std::vector<double> dense_pseudo_solve(const DenseMatrix& M, std::span<const double> b);

DenseMatrix dense_inverse(const DenseMatrix& M);

/// Ascending eigenvalues of B^{-1} A for symmetric A and SPD B.
/// Throws std::invalid_argument if B is not SPD or if n > 2000.
std::vector<double> dense_generalized_eigs(const DenseMatrix& A, const DenseMatrix& B);

/// Eigenvalues of a symmetric matrix, ascending.
std::vector<double> dense_symmetric_eigs(const DenseMatrix& A);

/// Orthonormal basis (columns) of the nullspace of symmetric A:
/// eigenvectors with |lambda| <= rel_tol * |lambda|_max.
DenseMatrix dense_nullspace(const DenseMatrix& A, double rel_tol = 1e-10);

/// Ascending eigenvalues of B^{-1} A restricted to the orthogonal complement
/// of span(kernel_vectors); kernel_vectors may be empty. Used for oracles on
/// semidefinite pencils (pure-Neumann operators).
std::vector<double> dense_generalized_eigs_deflated(
    const DenseMatrix& A, const DenseMatrix& B,
    const std::vector<std::vector<double>>& kernel_vectors);

/// Cached factorization of a symmetric patch or coarse matrix. Falls back to
/// the eigenvalue-truncated pseudo inverse when the matrix is singular to
/// tolerance, so semidefinite restrictions remain usable.
class DenseFactor {
 public:
  DenseFactor() = default;
  explicit DenseFactor(const DenseMatrix& M);

  void solve(std::span<const double> b, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> b) const;
  bool pseudo() const { return pseudo_; }
  index_t size() const { return n_; }

 private:
  index_t n_ = 0;
  bool pseudo_ = false;
  // LDL^T storage (lower factor packed in a dense matrix) or eigen pairs.
  std::vector<double> fac_;    // n*n, L below diagonal, D on diagonal
  std::vector<index_t> perm_;  // symmetric pivoting permutation
  std::vector<double> evals_;
  std::vector<double> evecs_;  // n*n row-major, rows = input dim
};

}  // namespace camg
