#pragma once

#include "camg/assembly.hpp"
#include "camg/graph.hpp"
#include "camg/sparse.hpp"

namespace camg {

/// Coupling neighborhoods: for every non-interface DOF j, the interface DOFs
/// reached through the sparsity pattern of R. Empty lists mean the DOF is
/// outside the coupling region and will be smoothed pointwise.
struct Neighborhoods {
  std::vector<index_t> owner_dofs;  // sorted non-interface global DOFs
  std::vector<index_t> offsets;     // size owner_dofs.size()+1
  std::vector<index_t> gamma_dofs;  // concatenated sorted neighborhoods

  index_t n_owners() const { return static_cast<index_t>(owner_dofs.size()); }
  std::span<const index_t> of(index_t pos) const {
    return {gamma_dofs.data() + offsets[pos],
            static_cast<std::size_t>(offsets[pos + 1] - offsets[pos])};
  }
};

/// Overlapping Schwarz patches with partition-of-unity weights (stored as the
/// rational 1/overlap_count per DOF) and the local coupling-kernel frame of
/// each patch.
struct SubspaceDecomposition {
  index_t n_total = 0;
  std::vector<std::vector<index_t>> patches;      // sorted global index sets
  std::vector<index_t> owners;                    // defining DOF of each patch
  std::vector<index_t> overlap_count;             // per DOF, >= 1 on covered DOFs
  std::vector<std::vector<double>> kernel_frame;  // per patch, aligned with the
                                                  // patch indices; empty if the
                                                  // patch carries no kernel

  index_t n_patches() const { return static_cast<index_t>(patches.size()); }
  /// Exact partition-of-unity sum: per DOF the rational weights are summed in
  /// integer arithmetic before the single multiply, so the result equals v.
  std::vector<double> pou_sum(std::span<const double> v) const;
};

/// Disjoint connected vertex clusters with a size cap.
struct Aggregation {
  std::vector<index_t> aggregate_of;  // per DOF
  index_t n_agg = 0;
  index_t c_agg = 0;

  std::vector<std::vector<index_t>> members() const;
  /// Piecewise-constant coarse approximation sum_k <1,v>/|a_k| * 1_{a_k}.
  std::vector<double> coarse_average(std::span<const double> v) const;
};

/// Seeds for kernel-respecting aggregation: interface DOF i joins the
/// aggregate of nearest_omega[i].
struct AggregationConstraint {
  std::vector<index_t> gamma_dofs;     // global interface DOFs (R row order)
  std::vector<index_t> nearest_omega;  // metric map L, same order
};

Neighborhoods build_neighborhoods(const SparseMatrix& R, const DofPartition& partition,
                                  std::span<const index_t> gamma_dof_of_row);

/// Patches {j} cup N_j with kernel frames scaled by the R coefficients so the
/// embedded frame vector lies in Ker(A0). Interface DOFs left uncovered by
/// every neighborhood receive a singleton patch without a frame.
SubspaceDecomposition build_patches(const Neighborhoods& nbhd,
                                    const CoupledSystem& system);

/// All-singleton decomposition (pointwise smoothing); frames only where a DOF
/// is entirely uncoupled. Used as the negative control.
SubspaceDecomposition singleton_decomposition(const CoupledSystem& system);

/// Metric map L: for every interface DOF (R row order) the nearest
/// non-interface DOF by Euclidean distance of the DOF coordinates, ties broken
/// by lowest index. Falls back to graph hop distance when no coordinates are
/// stored.
std::vector<index_t> metric_map(const CoupledSystem& system);

AggregationConstraint make_constraint(const CoupledSystem& system);

/// Greedy aggregation on a strength graph: constraint seeds first, then
/// repeated pairwise matching by descending strength, bounded by c_agg;
/// leftover singletons are absorbed into their strongest neighbor.
Aggregation aggregate(const WeightedGraph& strength_graph,
                      const AggregationConstraint* constraint, index_t c_agg);

/// Strength graph |a_ij| / sqrt(a_ii a_jj) of a symmetric matrix.
WeightedGraph strength_graph(const SparseMatrix& A);

/// Metric-form surrogate sum_i m_i (e_{Gamma,i} - e_{Omega,L(i)})(...)^T with
/// kernel span{1_{L~(j)}}; m_i are the row sums of M_gamma.
SparseMatrix redefine_a0(const CoupledSystem& system, std::span<const index_t> L);

struct KernelConditionReport {
  bool pass = false;
  index_t kernel_dim = 0;
  double max_residual = 0.0;  // relative reconstruction residual
};

/// Dense-nullspace check of the kernel decomposition condition: every
/// nullspace basis vector of A0 must be reproduced by its coarse component
/// plus patch-local kernel projections to 1e-8.
KernelConditionReport verify_kernel_condition(const SubspaceDecomposition& dec,
                                              const Aggregation& agg,
                                              const SparseMatrix& A0);

std::string decomposition_to_json(const SubspaceDecomposition& dec);
std::string aggregation_to_json(const Aggregation& agg);

}  // namespace camg
