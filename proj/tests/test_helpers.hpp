#pragma once

#include <random>
#include <vector>

#include "camg/dense.hpp"
#include "camg/sparse.hpp"

namespace camg::testing {

inline SparseMatrix tridiag(index_t n, double lo, double mid, double hi) {
  CooBuilder coo(n, n);
  for (index_t i = 0; i < n; ++i) {
    coo.add(i, i, mid);
    if (i > 0) coo.add(i, i - 1, lo);
    if (i + 1 < n) coo.add(i, i + 1, hi);
  }
  return coo.finalize(lo == hi);
}

inline SparseMatrix path_laplacian(index_t n, double w = 1.0) {
  CooBuilder coo(n, n);
  for (index_t i = 0; i + 1 < n; ++i) {
    coo.add(i, i, w);
    coo.add(i + 1, i + 1, w);
    coo.add(i, i + 1, -w);
    coo.add(i + 1, i, -w);
  }
  return coo.finalize(true);
}

/// Independent dense multiply used as the spmv oracle.
inline std::vector<double> dense_multiply_oracle(const DenseMatrix& M,
                                                 const std::vector<double>& x) {
  std::vector<double> y(M.nrows, 0.0);
  for (index_t i = 0; i < M.nrows; ++i)
    for (index_t j = 0; j < M.ncols; ++j) y[i] += M(i, j) * x[j];
  return y;
}

inline std::vector<double> random_vector(index_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline double quadratic_form(const SparseMatrix& A, const std::vector<double>& v) {
  return dot(v, spmv(A, v));
}

}  // namespace camg::testing
