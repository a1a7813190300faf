#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace camg {

using index_t = std::int64_t;

/// Compressed sparse row matrix. Canonical form: column indices strictly
/// increasing within each row, duplicates summed at finalize time.
struct SparseMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  std::vector<index_t> row_offsets;  // size nrows+1, nondecreasing
  std::vector<index_t> col_indices;  // size nnz
  std::vector<double> values;        // size nnz
  bool symmetric = false;

  index_t nnz() const { return static_cast<index_t>(col_indices.size()); }

  std::span<const index_t> row_cols(index_t i) const {
    return {col_indices.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }
  std::span<const double> row_vals(index_t i) const {
    return {values.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }

  /// Stored (i,j) entry, 0 if not in the pattern.
  double entry(index_t i, index_t j) const;
  double diag(index_t i) const { return entry(i, i); }

  index_t max_row_nnz() const;
  static SparseMatrix identity(index_t n);
};

/// Triplet accumulator. add() may be called with duplicate (i,j) pairs in any
/// order; finalize() sorts rows and sums duplicates.
class CooBuilder {
 public:
  CooBuilder(index_t nrows, index_t ncols) : nrows_(nrows), ncols_(ncols) {}

  void add(index_t i, index_t j, double v);
  void reserve(std::size_t n) { entries_.reserve(n); }

  SparseMatrix finalize(bool symmetric = false, bool drop_zeros = false);

 private:
  struct Entry {
    index_t i, j;
    double v;
  };
  index_t nrows_, ncols_;
  std::vector<Entry> entries_;
};

/// y = A x, row-major traversal with fixed per-row accumulation order.
void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y);
std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x);

/// y += alpha * A x
void spmv_add(const SparseMatrix& A, std::span<const double> x, std::span<double> y,
              double alpha = 1.0);

SparseMatrix transpose(const SparseMatrix& A);
SparseMatrix matmul(const SparseMatrix& A, const SparseMatrix& B);
/// alpha*A + beta*B on the merged pattern.
SparseMatrix add(const SparseMatrix& A, const SparseMatrix& B, double alpha = 1.0,
                 double beta = 1.0);
/// P^T A P
SparseMatrix galerkin_product(const SparseMatrix& P, const SparseMatrix& A);

std::vector<double> diagonal(const SparseMatrix& A);

/// Pairwise check |a_ij - a_ji| <= tol * max(|a_ij|,|a_ji|,1) on the stored pattern.
bool is_symmetric(const SparseMatrix& A, double tol = 1e-12);

/// Throws std::invalid_argument if the CSR invariants are violated
/// (offsets nondecreasing, sorted strictly increasing columns, index ranges,
/// and the pairwise symmetry check when the matrix is symmetric-flagged).
void validate(const SparseMatrix& A);

// Vector helpers shared across the library.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += a x
void scale(std::span<double> x, double alpha);

}  // namespace camg
