#pragma once

#include <memory>

#include "camg/decomposition.hpp"
#include "camg/dense.hpp"
#include "camg/sparse.hpp"

namespace camg {

enum class SmootherKind {
  jacobi,
  gauss_seidel_sym,
  bidomain_block,
  schwarz_additive,
  schwarz_multiplicative_sym,
};

SmootherKind smoother_kind_from_string(const std::string& name);
std::string to_string(SmootherKind kind);

struct SmootherConfig {
  SmootherKind kind = SmootherKind::gauss_seidel_sym;
  int sweeps = 1;
  /// Damping in (0,1] for the additive kinds; < 0 selects the default
  /// (1 for multiplicative kinds, 0.6 for additive kinds).
  double damping = -1.0;
  const SubspaceDecomposition* patches = nullptr;  // required by schwarz kinds

  double effective_damping() const;
};

/// Dense factorizations of A restricted to each patch, packed LDL^T with a
/// pseudo-inverse fallback for semidefinite restrictions.
class PatchFactorization {
 public:
  PatchFactorization() = default;
  PatchFactorization(const SparseMatrix& A, const SubspaceDecomposition& dec);

  void solve(index_t patch, std::span<const double> rhs, std::span<double> out) const;
  index_t n_patches() const { return static_cast<index_t>(sizes_.size()); }
  index_t patch_size(index_t p) const { return sizes_[p]; }
  bool any_pseudo() const { return !pseudo_.empty(); }

 private:
  std::vector<index_t> sizes_;
  std::vector<index_t> offsets_;   // into factors_, per patch: size*size block
  std::vector<double> factors_;    // unit lower + D on diagonal (LDL^T)
  std::map<index_t, DenseFactor> pseudo_;  // singular patches
};

/// Reusable smoother: factorizations are built once, applications update x in
/// place given the current iterate.
class Smoother {
 public:
  Smoother() = default;
  static Smoother build(const SmootherConfig& cfg, const SparseMatrix& A);

  /// cfg.sweeps applications of the smoother.
  void apply(std::span<const double> b, std::span<double> x) const;
  const SmootherConfig& config() const { return cfg_; }

 private:
  SmootherConfig cfg_;
  const SparseMatrix* A_ = nullptr;
  std::vector<double> diag_;
  std::shared_ptr<PatchFactorization> factors_;
  // bidomain_block: vertex-pair blocks solved in closed form.
  std::vector<std::array<index_t, 2>> pairs_;
  std::vector<std::array<double, 3>> pair_blocks_;  // (a11, a22, a12)

  void sweep_jacobi(std::span<const double> b, std::span<double> x) const;
  void sweep_gs_sym(std::span<const double> b, std::span<double> x) const;
  void sweep_block(std::span<const double> b, std::span<double> x) const;
  void sweep_schwarz_add(std::span<const double> b, std::span<double> x) const;
  void sweep_schwarz_mult(std::span<const double> b, std::span<double> x) const;
};

/// One-off smoothing application (spec operation); prefer Smoother for reuse.
void apply_smoother(const SmootherConfig& cfg, const SparseMatrix& A,
                    std::span<const double> b, std::span<double> x);

/// Explicit matrix of the smoother action on a zero initial guess, assembled
/// column by column; n <= 2000.
DenseMatrix smoother_as_operator(const SmootherConfig& cfg, const SparseMatrix& A);

/// Contraction diagnostics in the A-norm for a fixed error direction.
struct ContractionDiagnostics {
  double contraction_factor = 0.0;
  int sweeps_measured = 0;
};

ContractionDiagnostics measure_contraction(const SmootherConfig& cfg,
                                           const SparseMatrix& A,
                                           std::span<const double> error_direction,
                                           int sweeps = 1);
std::string contraction_to_json(const ContractionDiagnostics& diag);

}  // namespace camg
