#pragma once

#include <memory>

#include "camg/assembly.hpp"
#include "camg/decomposition.hpp"
#include "camg/dense.hpp"
#include "camg/smoothers.hpp"
#include "camg/sparse.hpp"

namespace camg {

enum class ProlongationKind { ua, sa, special };
enum class CycleType { V, W };

ProlongationKind prolongation_from_string(const std::string& name);
std::string to_string(ProlongationKind kind);

struct CyclePlan {
  int pre_sweeps = 1;
  int post_sweeps = 1;
  CycleType cycle = CycleType::W;
};

struct HierarchyOptions {
  /// ua/sa: monolithic strength-based aggregation, Schwarz smoothing on the
  /// finest level only, pointwise smoothing below. special: coupling-aware
  /// two-sided coarsening that carries R through the hierarchy and keeps the
  /// kernel-aware Schwarz smoother on every level.
  ProlongationKind prolongation = ProlongationKind::ua;
  SmootherKind fine_smoother = SmootherKind::schwarz_multiplicative_sym;
  SmootherKind coarse_smoother = SmootherKind::gauss_seidel_sym;
  CyclePlan plan;
  int max_levels = 10;
  index_t coarse_size_cap = 200;
  index_t c_agg = 4;
  /// Seed aggregates with the interface pairs of the metric map (monolithic
  /// kinds only). Off by default: the Schwarz smoother already carries the
  /// kernel condition and plain strength matching adapts to gamma.
  bool constrained_aggregation = false;
  double sa_omega = -1.0;  // < 0: 2/3 of the 2/rho(D^-1 A) bound
  /// Smooth the elliptic-side block of the `special` prolongation (the
  /// interface block keeps its exact kernel frames either way).
  bool special_smooth_omega = false;
  double damping = -1.0;   // smoother damping, < 0 for kind defaults
  int smoother_sweeps = 1;
  /// Replace the first `special` coarsening by the literal stacked-identity
  /// collapse (two-field systems only): coarse size = n/2, the metric term
  /// vanishes on the coarse level, pointwise smoothing below.
  bool special_collapse = false;
};

/// 0/1 piecewise-constant prolongation; column k is the indicator of
/// aggregate k.
SparseMatrix ua_prolongation(const Aggregation& agg);

/// One damped Jacobi smoothing step applied to a tentative prolongation:
/// P = (I - omega D^{-1} A) P_tent.
SparseMatrix sa_prolongation(const SparseMatrix& P_tent, const SparseMatrix& A,
                             double omega);

/// 2/3 of the upper damping bound 2/rho(D^{-1}A), spectral radius estimated
/// by 10 power iterations.
double sa_default_omega(const SparseMatrix& A);

/// Stacked identity [I; I] mapping one scalar field onto both components of a
/// two-field system; its range is the coupling kernel.
SparseMatrix bidomain_special_prolongation(index_t n_scalar);

struct Level {
  SparseMatrix A;
  SparseMatrix P;  // prolongation from the next coarser level; empty on coarsest
  std::unique_ptr<CoupledSystem> coupling;  // coarse coupling (special kind)
  std::unique_ptr<SubspaceDecomposition> patches;
  Smoother smoother;
  SmootherConfig smoother_cfg;
};

struct Hierarchy {
  std::vector<std::unique_ptr<Level>> levels;
  DenseFactor coarse_solver;
  CyclePlan plan;

  index_t n_levels() const { return static_cast<index_t>(levels.size()); }
  const SparseMatrix& fine_matrix() const { return levels.front()->A; }
  std::string stats_json() const;
};

/// Build the multilevel hierarchy for a coupled system. Schwarz patches are
/// constructed from the sparsity of R; under the `special` kind the coupling
/// map is Galerkin-coarsened alongside the operator so that every level keeps
/// exact kernel frames.
Hierarchy build_hierarchy(const CoupledSystem& system, const HierarchyOptions& options);

/// Same construction from a bare SPD matrix (no coupling information).
Hierarchy build_hierarchy(const SparseMatrix& A, const HierarchyOptions& options);

/// One V- or W-cycle as a linear preconditioner action: x = B b with zero
/// initial guess.
void cycle(const Hierarchy& hierarchy, std::span<const double> b, std::span<double> x);

/// Coupling-aware coarsening step used by the `special` hierarchy: the
/// elliptic side aggregates by strength, interface DOFs either follow their
/// paired owner (pure pairing couplings) or stay uncoarsened (averaging
/// couplings), and the coarse system carries R_c = R P and the same
/// interface mass.
std::pair<SparseMatrix, CoupledSystem> coarsen_coupled(const CoupledSystem& system,
                                                       const SparseMatrix& A,
                                                       ProlongationKind prolongation,
                                                       double sa_omega, index_t c_agg);

}  // namespace camg
