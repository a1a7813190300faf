#include "camg/dense.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace camg {

namespace {

using EMat = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

EMat to_eigen(const DenseMatrix& M) {
  EMat out(M.nrows, M.ncols);
  for (index_t i = 0; i < M.nrows; ++i)
    for (index_t j = 0; j < M.ncols; ++j) out(i, j) = M(i, j);
  return out;
}

DenseMatrix from_eigen(const EMat& M) {
  DenseMatrix out(M.rows(), M.cols());
  for (index_t i = 0; i < out.nrows; ++i)
    for (index_t j = 0; j < out.ncols; ++j) out(i, j) = M(i, j);
  return out;
}

bool is_dense_symmetric(const DenseMatrix& M, double tol = 1e-12) {
  if (M.nrows != M.ncols) return false;
  for (index_t i = 0; i < M.nrows; ++i)
    for (index_t j = i + 1; j < M.ncols; ++j) {
      double a = M(i, j), b = M(j, i);
      if (std::abs(a - b) > tol * std::max({std::abs(a), std::abs(b), 1.0}))
        return false;
    }
  return true;
}

double max_abs(const DenseMatrix& M) {
  double m = 0.0;
  for (double v : M.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

DenseMatrix DenseMatrix::identity(index_t n) {
  DenseMatrix I(n, n);
  for (index_t i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

DenseMatrix to_dense(const SparseMatrix& A) {
  DenseMatrix M(A.nrows, A.ncols);
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      M(i, A.col_indices[k]) = A.values[k];
  return M;
}

SparseMatrix to_sparse(const DenseMatrix& A, double drop_tol) {
  CooBuilder coo(A.nrows, A.ncols);
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t j = 0; j < A.ncols; ++j)
      if (std::abs(A(i, j)) > drop_tol) coo.add(i, j, A(i, j));
  return coo.finalize();
}

std::vector<double> dense_solve(const DenseMatrix& M, std::span<const double> b) {
  if (M.nrows != M.ncols) throw std::invalid_argument("dense_solve: not square");
  if (static_cast<index_t>(b.size()) != M.nrows)
    throw std::invalid_argument("dense_solve: rhs size mismatch");
  const double piv_tol = 1e-14 * std::max(max_abs(M), 1.0);
  EMat A = to_eigen(M);
  EVec rhs = Eigen::Map<const EVec>(b.data(), b.size());
  EVec x;
  if (is_dense_symmetric(M)) {
    Eigen::LDLT<EMat> ldlt(A);
    EVec d = ldlt.vectorD();
    for (index_t i = 0; i < d.size(); ++i)
      if (std::abs(d(i)) <= piv_tol)
        throw SingularMatrixError("dense_solve: singular to tolerance", i);
    x = ldlt.solve(rhs);
  } else {
    Eigen::PartialPivLU<EMat> lu(A);
    EMat U = lu.matrixLU();
    for (index_t i = 0; i < M.nrows; ++i)
      if (std::abs(U(i, i)) <= piv_tol)
        throw SingularMatrixError("dense_solve: singular to tolerance", i);
    x = lu.solve(rhs);
  }
  return {x.data(), x.data() + x.size()};
}

std::vector<double> dense_pseudo_solve(const DenseMatrix& M, std::span<const double> b) {
  if (M.nrows != M.ncols) throw std::invalid_argument("dense_pseudo_solve: not square");
  Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(M));
  EVec lam = es.eigenvalues();
  double lmax = lam.cwiseAbs().maxCoeff();
  double cut = 1e-12 * lmax;
  EVec rhs = Eigen::Map<const EVec>(b.data(), b.size());
  EVec y = es.eigenvectors().transpose() * rhs;
  for (index_t i = 0; i < lam.size(); ++i)
    y(i) = std::abs(lam(i)) > cut ? y(i) / lam(i) : 0.0;
  EVec x = es.eigenvectors() * y;
  return {x.data(), x.data() + x.size()};
}

DenseMatrix dense_inverse(const DenseMatrix& M) {
  if (M.nrows != M.ncols) throw std::invalid_argument("dense_inverse: not square");
  EMat A = to_eigen(M);
  Eigen::FullPivLU<EMat> lu(A);
  if (!lu.isInvertible()) throw SingularMatrixError("dense_inverse: singular", -1);
  return from_eigen(lu.inverse());
}

std::vector<double> dense_generalized_eigs(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.nrows != A.ncols || B.nrows != B.ncols || A.nrows != B.nrows)
    throw std::invalid_argument("dense_generalized_eigs: dimension mismatch");
  if (A.nrows > 2000)
    throw std::invalid_argument("dense_generalized_eigs: size cap (2000) exceeded");
  if (!is_dense_symmetric(A, 1e-10))
    throw std::invalid_argument("dense_generalized_eigs: A not symmetric");
  EMat eb = to_eigen(B);
  Eigen::LLT<EMat> llt(eb);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("dense_generalized_eigs: B not SPD");
  Eigen::GeneralizedSelfAdjointEigenSolver<EMat> es(to_eigen(A), eb);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_generalized_eigs: eigensolver failure");
  EVec lam = es.eigenvalues();
  std::vector<double> out(lam.data(), lam.data() + lam.size());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> dense_symmetric_eigs(const DenseMatrix& A) {
  Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(A), Eigen::EigenvaluesOnly);
  EVec lam = es.eigenvalues();
  std::vector<double> out(lam.data(), lam.data() + lam.size());
  std::sort(out.begin(), out.end());
  return out;
}

DenseMatrix dense_nullspace(const DenseMatrix& A, double rel_tol) {
  if (A.nrows != A.ncols) throw std::invalid_argument("dense_nullspace: not square");
  Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(A));
  EVec lam = es.eigenvalues();
  double lmax = lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0;
  double cut = rel_tol * std::max(lmax, 1e-300);
  std::vector<index_t> keep;
  for (index_t i = 0; i < lam.size(); ++i)
    if (std::abs(lam(i)) <= cut) keep.push_back(i);
  DenseMatrix N(A.nrows, static_cast<index_t>(keep.size()));
  for (index_t c = 0; c < static_cast<index_t>(keep.size()); ++c)
    for (index_t i = 0; i < A.nrows; ++i) N(i, c) = es.eigenvectors()(i, keep[c]);
  return N;
}

std::vector<double> dense_generalized_eigs_deflated(
    const DenseMatrix& A, const DenseMatrix& B,
    const std::vector<std::vector<double>>& kernel_vectors) {
  const index_t n = A.nrows;
  if (kernel_vectors.empty()) return dense_generalized_eigs(A, B);
  // Orthonormal basis Q of the complement of the kernel span, then solve the
  // reduced pencil (Q^T A Q, Q^T B Q).
  EMat K(n, static_cast<index_t>(kernel_vectors.size()));
  for (index_t c = 0; c < K.cols(); ++c)
    for (index_t i = 0; i < n; ++i) K(i, c) = kernel_vectors[c][i];
  Eigen::HouseholderQR<EMat> qr(K);
  EMat Qfull = qr.householderQ() * EMat::Identity(n, n);
  EMat Q = Qfull.rightCols(n - K.cols());
  EMat Ar = Q.transpose() * to_eigen(A) * Q;
  EMat Br = Q.transpose() * to_eigen(B) * Q;
  Ar = 0.5 * (Ar + Ar.transpose());
  Br = 0.5 * (Br + Br.transpose());
  return dense_generalized_eigs(from_eigen(Ar), from_eigen(Br));
}

DenseFactor::DenseFactor(const DenseMatrix& M) {
  n_ = M.nrows;
  if (M.nrows != M.ncols) throw std::invalid_argument("DenseFactor: not square");
  const double piv_tol = 1e-14 * std::max(max_abs(M), 1e-300);
  EMat A = to_eigen(M);
  A = 0.5 * (A + A.transpose());
  Eigen::LDLT<EMat> ldlt(A);
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    EVec d = ldlt.vectorD();
    for (index_t i = 0; i < d.size(); ++i)
      if (!(std::abs(d(i)) > piv_tol)) ok = false;
  }
  if (ok) {
    EMat L = ldlt.matrixL();
    EVec d = ldlt.vectorD();
    fac_.assign(n_ * n_, 0.0);
    for (index_t i = 0; i < n_; ++i) {
      for (index_t j = 0; j < i; ++j) fac_[i * n_ + j] = L(i, j);
      fac_[i * n_ + i] = d(i);
    }
    perm_.resize(n_);
    auto P = ldlt.transpositionsP();
    // Materialize the permutation by applying it to the identity.
    Eigen::VectorXi idx(n_);
    for (index_t i = 0; i < n_; ++i) idx(i) = static_cast<int>(i);
    idx = P * idx;
    for (index_t i = 0; i < n_; ++i) perm_[i] = idx(i);
    return;
  }
  // Semidefinite patch: eigenvalue-truncated pseudo inverse.
  pseudo_ = true;
  Eigen::SelfAdjointEigenSolver<EMat> es(A);
  evals_.assign(es.eigenvalues().data(), es.eigenvalues().data() + n_);
  evecs_.resize(n_ * n_);
  for (index_t i = 0; i < n_; ++i)
    for (index_t j = 0; j < n_; ++j) evecs_[i * n_ + j] = es.eigenvectors()(i, j);
}

void DenseFactor::solve(std::span<const double> b, std::span<double> x) const {
  if (static_cast<index_t>(b.size()) != n_ || static_cast<index_t>(x.size()) != n_)
    throw std::invalid_argument("DenseFactor::solve: size mismatch");
  if (!pseudo_) {
    // P A P^T = L D L^T; solve via permuted forward/backward substitution.
    std::vector<double> y(n_);
    for (index_t i = 0; i < n_; ++i) y[i] = b[perm_[i]];
    for (index_t i = 0; i < n_; ++i) {
      double s = y[i];
      for (index_t j = 0; j < i; ++j) s -= fac_[i * n_ + j] * y[j];
      y[i] = s;
    }
    for (index_t i = 0; i < n_; ++i) y[i] /= fac_[i * n_ + i];
    for (index_t i = n_ - 1; i >= 0; --i) {
      double s = y[i];
      for (index_t j = i + 1; j < n_; ++j) s -= fac_[j * n_ + i] * y[j];
      y[i] = s;
    }
    for (index_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
    return;
  }
  double lmax = 0.0;
  for (double l : evals_) lmax = std::max(lmax, std::abs(l));
  double cut = 1e-12 * std::max(lmax, 1e-300);
  std::vector<double> y(n_, 0.0);
  for (index_t c = 0; c < n_; ++c) {
    if (std::abs(evals_[c]) <= cut) continue;
    double s = 0.0;
    for (index_t i = 0; i < n_; ++i) s += evecs_[i * n_ + c] * b[i];
    y[c] = s / evals_[c];
  }
  for (index_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (index_t c = 0; c < n_; ++c) s += evecs_[i * n_ + c] * y[c];
    x[i] = s;
  }
}

std::vector<double> DenseFactor::solve(std::span<const double> b) const {
  std::vector<double> x(n_);
  solve(b, x);
  return x;
}

}  // namespace camg
