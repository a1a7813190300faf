#include "camg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace camg {

double SparseMatrix::entry(index_t i, index_t j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values[row_offsets[i] + (it - cols.begin())];
}

index_t SparseMatrix::max_row_nnz() const {
  index_t m = 0;
  for (index_t i = 0; i < nrows; ++i)
    m = std::max(m, row_offsets[i + 1] - row_offsets[i]);
  return m;
}

SparseMatrix SparseMatrix::identity(index_t n) {
  SparseMatrix I;
  I.nrows = I.ncols = n;
  I.row_offsets.resize(n + 1);
  I.col_indices.resize(n);
  I.values.assign(n, 1.0);
  for (index_t i = 0; i <= n; ++i) I.row_offsets[i] = i;
  for (index_t i = 0; i < n; ++i) I.col_indices[i] = i;
  I.symmetric = true;
  return I;
}

void CooBuilder::add(index_t i, index_t j, double v) {
  if (i < 0 || i >= nrows_ || j < 0 || j >= ncols_)
    throw std::invalid_argument("CooBuilder::add: index out of range");
  entries_.push_back({i, j, v});
}

SparseMatrix CooBuilder::finalize(bool symmetric, bool drop_zeros) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  SparseMatrix A;
  A.nrows = nrows_;
  A.ncols = ncols_;
  A.symmetric = symmetric;
  A.row_offsets.assign(nrows_ + 1, 0);
  A.col_indices.reserve(entries_.size());
  A.values.reserve(entries_.size());
  std::size_t k = 0;
  for (index_t i = 0; i < nrows_; ++i) {
    while (k < entries_.size() && entries_[k].i == i) {
      index_t j = entries_[k].j;
      double v = 0.0;
      while (k < entries_.size() && entries_[k].i == i && entries_[k].j == j)
        v += entries_[k++].v;
      if (!drop_zeros || v != 0.0) {
        A.col_indices.push_back(j);
        A.values.push_back(v);
      }
    }
    A.row_offsets[i + 1] = static_cast<index_t>(A.col_indices.size());
  }
  return A;
}

void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y) {
  if (static_cast<index_t>(x.size()) != A.ncols ||
      static_cast<index_t>(y.size()) != A.nrows)
    throw std::invalid_argument("spmv: dimension mismatch");
  for (index_t i = 0; i < A.nrows; ++i) {
    double s = 0.0;
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      s += A.values[k] * x[A.col_indices[k]];
    y[i] = s;
  }
}

std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x) {
  std::vector<double> y(A.nrows);
  spmv(A, x, y);
  return y;
}

void spmv_add(const SparseMatrix& A, std::span<const double> x, std::span<double> y,
              double alpha) {
  if (static_cast<index_t>(x.size()) != A.ncols ||
      static_cast<index_t>(y.size()) != A.nrows)
    throw std::invalid_argument("spmv_add: dimension mismatch");
  for (index_t i = 0; i < A.nrows; ++i) {
    double s = 0.0;
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      s += A.values[k] * x[A.col_indices[k]];
    y[i] += alpha * s;
  }
}

SparseMatrix transpose(const SparseMatrix& A) {
  SparseMatrix T;
  T.nrows = A.ncols;
  T.ncols = A.nrows;
  T.symmetric = A.symmetric;
  T.row_offsets.assign(A.ncols + 1, 0);
  for (index_t k = 0; k < A.nnz(); ++k) T.row_offsets[A.col_indices[k] + 1]++;
  for (index_t i = 0; i < A.ncols; ++i) T.row_offsets[i + 1] += T.row_offsets[i];
  T.col_indices.resize(A.nnz());
  T.values.resize(A.nnz());
  std::vector<index_t> next(T.row_offsets.begin(), T.row_offsets.end() - 1);
  for (index_t i = 0; i < A.nrows; ++i) {
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      index_t p = next[A.col_indices[k]]++;
      T.col_indices[p] = i;  // rows of A visited in order, so columns stay sorted
      T.values[p] = A.values[k];
    }
  }
  return T;
}

SparseMatrix matmul(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.ncols != B.nrows) throw std::invalid_argument("matmul: dimension mismatch");
  // Gustavson with a dense accumulator per row.
  SparseMatrix C;
  C.nrows = A.nrows;
  C.ncols = B.ncols;
  C.row_offsets.assign(A.nrows + 1, 0);
  std::vector<double> acc(B.ncols, 0.0);
  std::vector<index_t> marker(B.ncols, -1);
  std::vector<index_t> cols;
  for (index_t i = 0; i < A.nrows; ++i) {
    cols.clear();
    for (index_t ka = A.row_offsets[i]; ka < A.row_offsets[i + 1]; ++ka) {
      index_t j = A.col_indices[ka];
      double av = A.values[ka];
      for (index_t kb = B.row_offsets[j]; kb < B.row_offsets[j + 1]; ++kb) {
        index_t c = B.col_indices[kb];
        if (marker[c] != i) {
          marker[c] = i;
          acc[c] = 0.0;
          cols.push_back(c);
        }
        acc[c] += av * B.values[kb];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (index_t c : cols) {
      C.col_indices.push_back(c);
      C.values.push_back(acc[c]);
    }
    C.row_offsets[i + 1] = static_cast<index_t>(C.col_indices.size());
  }
  return C;
}

SparseMatrix add(const SparseMatrix& A, const SparseMatrix& B, double alpha,
                 double beta) {
  if (A.nrows != B.nrows || A.ncols != B.ncols)
    throw std::invalid_argument("add: dimension mismatch");
  SparseMatrix C;
  C.nrows = A.nrows;
  C.ncols = A.ncols;
  C.symmetric = A.symmetric && B.symmetric;
  C.row_offsets.assign(A.nrows + 1, 0);
  for (index_t i = 0; i < A.nrows; ++i) {
    index_t ka = A.row_offsets[i], kb = B.row_offsets[i];
    while (ka < A.row_offsets[i + 1] || kb < B.row_offsets[i + 1]) {
      index_t ja = ka < A.row_offsets[i + 1] ? A.col_indices[ka] : C.ncols;
      index_t jb = kb < B.row_offsets[i + 1] ? B.col_indices[kb] : C.ncols;
      if (ja == jb) {
        C.col_indices.push_back(ja);
        C.values.push_back(alpha * A.values[ka++] + beta * B.values[kb++]);
      } else if (ja < jb) {
        C.col_indices.push_back(ja);
        C.values.push_back(alpha * A.values[ka++]);
      } else {
        C.col_indices.push_back(jb);
        C.values.push_back(beta * B.values[kb++]);
      }
    }
    C.row_offsets[i + 1] = static_cast<index_t>(C.col_indices.size());
  }
  return C;
}

SparseMatrix galerkin_product(const SparseMatrix& P, const SparseMatrix& A) {
  SparseMatrix AP = matmul(A, P);
  SparseMatrix C = matmul(transpose(P), AP);
  C.symmetric = A.symmetric;
  return C;
}

std::vector<double> diagonal(const SparseMatrix& A) {
  std::vector<double> d(A.nrows);
  for (index_t i = 0; i < A.nrows; ++i) d[i] = A.diag(i);
  return d;
}

bool is_symmetric(const SparseMatrix& A, double tol) {
  if (A.nrows != A.ncols) return false;
  for (index_t i = 0; i < A.nrows; ++i) {
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      index_t j = A.col_indices[k];
      double aij = A.values[k];
      double aji = A.entry(j, i);
      if (std::abs(aij - aji) >
          tol * std::max({std::abs(aij), std::abs(aji), 1.0}))
        return false;
    }
  }
  return true;
}

void validate(const SparseMatrix& A) {
  if (static_cast<index_t>(A.row_offsets.size()) != A.nrows + 1)
    throw std::invalid_argument("validate: row_offsets size");
  if (A.row_offsets.front() != 0 || A.row_offsets.back() != A.nnz())
    throw std::invalid_argument("validate: row_offsets endpoints");
  for (index_t i = 0; i < A.nrows; ++i) {
    if (A.row_offsets[i + 1] < A.row_offsets[i])
      throw std::invalid_argument("validate: row_offsets not nondecreasing");
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      if (A.col_indices[k] < 0 || A.col_indices[k] >= A.ncols)
        throw std::invalid_argument("validate: column index out of range");
      if (k > A.row_offsets[i] && A.col_indices[k] <= A.col_indices[k - 1])
        throw std::invalid_argument("validate: columns not strictly increasing");
    }
  }
  if (A.symmetric && !is_symmetric(A))
    throw std::invalid_argument("validate: symmetric flag violated");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
  for (double& v : x) v *= alpha;
}

}  // namespace camg
