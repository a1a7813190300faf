#include "camg/smoothers.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace camg {

SmootherKind smoother_kind_from_string(const std::string& name) {
  if (name == "jacobi") return SmootherKind::jacobi;
  if (name == "gauss_seidel_sym") return SmootherKind::gauss_seidel_sym;
  if (name == "bidomain_block") return SmootherKind::bidomain_block;
  if (name == "schwarz_additive") return SmootherKind::schwarz_additive;
  if (name == "schwarz_multiplicative_sym") return SmootherKind::schwarz_multiplicative_sym;
  throw std::invalid_argument("unknown smoother kind: " + name);
}

std::string to_string(SmootherKind kind) {
  switch (kind) {
    case SmootherKind::jacobi: return "jacobi";
    case SmootherKind::gauss_seidel_sym: return "gauss_seidel_sym";
    case SmootherKind::bidomain_block: return "bidomain_block";
    case SmootherKind::schwarz_additive: return "schwarz_additive";
    case SmootherKind::schwarz_multiplicative_sym: return "schwarz_multiplicative_sym";
  }
  return "?";
}

double SmootherConfig::effective_damping() const {
  if (damping > 0.0) return damping;
  switch (kind) {
    case SmootherKind::gauss_seidel_sym:
    case SmootherKind::schwarz_multiplicative_sym:
      return 1.0;
    default:
      return 0.6;  // additive kinds
  }
}

PatchFactorization::PatchFactorization(const SparseMatrix& A,
                                       const SubspaceDecomposition& dec) {
  constexpr index_t size_cap = 64;
  sizes_.reserve(dec.n_patches());
  offsets_.reserve(dec.n_patches() + 1);
  offsets_.push_back(0);
  for (index_t p = 0; p < dec.n_patches(); ++p) {
    index_t m = static_cast<index_t>(dec.patches[p].size());
    if (m > size_cap)
      throw std::invalid_argument("PatchFactorization: patch exceeds dense cap");
    sizes_.push_back(m);
    offsets_.push_back(offsets_.back() + m * m);
  }
  factors_.assign(offsets_.back(), 0.0);

  std::vector<double> block;
  for (index_t p = 0; p < dec.n_patches(); ++p) {
    const auto& patch = dec.patches[p];
    const index_t m = sizes_[p];
    block.assign(m * m, 0.0);
    // Gather A[patch, patch] by merging each sorted row with the sorted patch.
    for (index_t r = 0; r < m; ++r) {
      index_t row = patch[r];
      index_t k = A.row_offsets[row];
      index_t q = 0;
      while (k < A.row_offsets[row + 1] && q < m) {
        index_t col = A.col_indices[k];
        if (col == patch[q]) {
          block[r * m + q] = A.values[k];
          ++k;
          ++q;
        } else if (col < patch[q]) {
          ++k;
        } else {
          ++q;
        }
      }
    }
    // Unpivoted LDL^T; SPD restrictions only, semidefinite ones fall back.
    double scale = 0.0;
    for (double v : block) scale = std::max(scale, std::abs(v));
    const double tol = 1e-14 * std::max(scale, 1e-300);
    double* f = factors_.data() + offsets_[p];
    bool ok = true;
    std::copy(block.begin(), block.end(), f);
    for (index_t j = 0; j < m && ok; ++j) {
      double d = f[j * m + j];
      for (index_t k2 = 0; k2 < j; ++k2)
        d -= f[j * m + k2] * f[j * m + k2] * f[k2 * m + k2];
      if (!(d > tol)) {
        ok = false;
        break;
      }
      f[j * m + j] = d;
      for (index_t i = j + 1; i < m; ++i) {
        double s = f[i * m + j];
        for (index_t k2 = 0; k2 < j; ++k2)
          s -= f[i * m + k2] * f[j * m + k2] * f[k2 * m + k2];
        f[i * m + j] = s / d;
      }
    }
    if (!ok) {
      DenseMatrix M(m, m);
      M.values = block;
      pseudo_.emplace(p, DenseFactor(M));
    }
  }
}

void PatchFactorization::solve(index_t p, std::span<const double> rhs,
                               std::span<double> out) const {
  const index_t m = sizes_[p];
  auto it = pseudo_.find(p);
  if (it != pseudo_.end()) {
    it->second.solve(rhs, out);
    return;
  }
  const double* f = factors_.data() + offsets_[p];
  for (index_t i = 0; i < m; ++i) {
    double s = rhs[i];
    for (index_t j = 0; j < i; ++j) s -= f[i * m + j] * out[j];
    out[i] = s;
  }
  for (index_t i = 0; i < m; ++i) out[i] /= f[i * m + i];
  for (index_t i = m - 1; i >= 0; --i) {
    double s = out[i];
    for (index_t j = i + 1; j < m; ++j) s -= f[j * m + i] * out[j];
    out[i] = s;
  }
}

Smoother Smoother::build(const SmootherConfig& cfg, const SparseMatrix& A) {
  Smoother s;
  s.cfg_ = cfg;
  s.A_ = &A;
  switch (cfg.kind) {
    case SmootherKind::jacobi:
    case SmootherKind::gauss_seidel_sym:
      s.diag_ = diagonal(A);
      for (index_t i = 0; i < A.nrows; ++i)
        if (s.diag_[i] == 0.0)
          throw std::invalid_argument("Smoother: zero diagonal entry");
      break;
    case SmootherKind::bidomain_block: {
      // Vertex pairs from the decomposition when given, else the two-field
      // layout (j, j + n/2).
      if (cfg.patches) {
        for (index_t p = 0; p < cfg.patches->n_patches(); ++p) {
          const auto& patch = cfg.patches->patches[p];
          if (patch.size() != 2)
            throw std::invalid_argument(
                "bidomain_block: patches must be vertex pairs");
          s.pairs_.push_back({patch[0], patch[1]});
        }
      } else {
        if (A.nrows % 2 != 0)
          throw std::invalid_argument("bidomain_block: odd system size");
        index_t half = A.nrows / 2;
        for (index_t j = 0; j < half; ++j) s.pairs_.push_back({j, half + j});
      }
      for (auto [a, b] : s.pairs_)
        s.pair_blocks_.push_back({A.entry(a, a), A.entry(b, b), A.entry(a, b)});
      break;
    }
    case SmootherKind::schwarz_additive:
    case SmootherKind::schwarz_multiplicative_sym:
      if (!cfg.patches)
        throw std::invalid_argument("Smoother: schwarz kinds require patches");
      s.factors_ = std::make_shared<PatchFactorization>(A, *cfg.patches);
      break;
  }
  return s;
}

void Smoother::apply(std::span<const double> b, std::span<double> x) const {
  for (int sweep = 0; sweep < cfg_.sweeps; ++sweep) {
    switch (cfg_.kind) {
      case SmootherKind::jacobi: sweep_jacobi(b, x); break;
      case SmootherKind::gauss_seidel_sym: sweep_gs_sym(b, x); break;
      case SmootherKind::bidomain_block: sweep_block(b, x); break;
      case SmootherKind::schwarz_additive: sweep_schwarz_add(b, x); break;
      case SmootherKind::schwarz_multiplicative_sym: sweep_schwarz_mult(b, x); break;
    }
  }
}

void Smoother::sweep_jacobi(std::span<const double> b, std::span<double> x) const {
  const SparseMatrix& A = *A_;
  const double theta = cfg_.effective_damping();
  std::vector<double> r(b.begin(), b.end());
  spmv_add(A, x, r, -1.0);
  for (index_t i = 0; i < A.nrows; ++i) x[i] += theta * r[i] / diag_[i];
}

void Smoother::sweep_gs_sym(std::span<const double> b, std::span<double> x) const {
  const SparseMatrix& A = *A_;
  auto relax = [&](index_t i) {
    double s = b[i];
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      s -= A.values[k] * x[A.col_indices[k]];
    x[i] += s / diag_[i];
  };
  for (index_t i = 0; i < A.nrows; ++i) relax(i);
  for (index_t i = A.nrows - 1; i >= 0; --i) relax(i);
}

void Smoother::sweep_block(std::span<const double> b, std::span<double> x) const {
  const SparseMatrix& A = *A_;
  const double theta = cfg_.effective_damping();
  std::vector<double> r(b.begin(), b.end());
  spmv_add(A, x, r, -1.0);
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    auto [i, j] = pairs_[p];
    auto [a11, a22, a12] = pair_blocks_[p];
    double det = a11 * a22 - a12 * a12;
    double di = (a22 * r[i] - a12 * r[j]) / det;
    double dj = (a11 * r[j] - a12 * r[i]) / det;
    x[i] += theta * di;
    x[j] += theta * dj;
  }
}

void Smoother::sweep_schwarz_add(std::span<const double> b, std::span<double> x) const {
  const SparseMatrix& A = *A_;
  const SubspaceDecomposition& dec = *cfg_.patches;
  const double theta = cfg_.effective_damping();
  std::vector<double> r(b.begin(), b.end());
  spmv_add(A, x, r, -1.0);
  std::vector<double> rhs, sol;
  for (index_t p = 0; p < dec.n_patches(); ++p) {
    const auto& patch = dec.patches[p];
    rhs.resize(patch.size());
    sol.resize(patch.size());
    for (std::size_t q = 0; q < patch.size(); ++q) rhs[q] = r[patch[q]];
    factors_->solve(p, rhs, sol);
    for (std::size_t q = 0; q < patch.size(); ++q) x[patch[q]] += theta * sol[q];
  }
}

void Smoother::sweep_schwarz_mult(std::span<const double> b, std::span<double> x) const {
  const SparseMatrix& A = *A_;
  const SubspaceDecomposition& dec = *cfg_.patches;
  std::vector<double> r(b.begin(), b.end());
  spmv_add(A, x, r, -1.0);
  std::vector<double> rhs, sol;
  auto visit = [&](index_t p) {
    const auto& patch = dec.patches[p];
    rhs.resize(patch.size());
    sol.resize(patch.size());
    for (std::size_t q = 0; q < patch.size(); ++q) rhs[q] = r[patch[q]];
    factors_->solve(p, rhs, sol);
    for (std::size_t q = 0; q < patch.size(); ++q) {
      index_t col = patch[q];
      double d = sol[q];
      if (d == 0.0) continue;
      x[col] += d;
      // Residual update through the symmetric pattern: column = row.
      for (index_t k = A.row_offsets[col]; k < A.row_offsets[col + 1]; ++k)
        r[A.col_indices[k]] -= A.values[k] * d;
    }
  };
  for (index_t p = 0; p < dec.n_patches(); ++p) visit(p);
  for (index_t p = dec.n_patches() - 1; p >= 0; --p) visit(p);
}

void apply_smoother(const SmootherConfig& cfg, const SparseMatrix& A,
                    std::span<const double> b, std::span<double> x) {
  Smoother::build(cfg, A).apply(b, x);
}

DenseMatrix smoother_as_operator(const SmootherConfig& cfg, const SparseMatrix& A) {
  if (A.nrows > 2000)
    throw std::invalid_argument("smoother_as_operator: size cap (2000) exceeded");
  Smoother s = Smoother::build(cfg, A);
  DenseMatrix S(A.nrows, A.nrows);
  std::vector<double> e(A.nrows, 0.0), x(A.nrows);
  for (index_t c = 0; c < A.nrows; ++c) {
    e[c] = 1.0;
    std::fill(x.begin(), x.end(), 0.0);
    s.apply(e, x);
    for (index_t i = 0; i < A.nrows; ++i) S(i, c) = x[i];
    e[c] = 0.0;
  }
  return S;
}

ContractionDiagnostics measure_contraction(const SmootherConfig& cfg,
                                           const SparseMatrix& A,
                                           std::span<const double> error_direction,
                                           int sweeps) {
  // Solve A x = A z starting from x = 0; the error after smoothing is z - x.
  std::vector<double> z(error_direction.begin(), error_direction.end());
  std::vector<double> b = spmv(A, z);
  std::vector<double> x(A.nrows, 0.0);
  SmootherConfig one = cfg;
  one.sweeps = sweeps;
  apply_smoother(one, A, b, x);
  std::vector<double> err(A.nrows);
  for (index_t i = 0; i < A.nrows; ++i) err[i] = z[i] - x[i];
  double before = std::sqrt(std::max(dot(z, spmv(A, z)), 0.0));
  double after = std::sqrt(std::max(dot(err, spmv(A, err)), 0.0));
  return {before > 0.0 ? after / before : 0.0, sweeps};
}

std::string contraction_to_json(const ContractionDiagnostics& diag) {
  nlohmann::json j;
  j["contraction_factor"] = diag.contraction_factor;
  j["sweeps_measured"] = diag.sweeps_measured;
  return j.dump();
}

}  // namespace camg
