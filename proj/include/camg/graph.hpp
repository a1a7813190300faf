#pragma once

#include <functional>
#include <optional>

#include "camg/mesh.hpp"
#include "camg/sparse.hpp"

namespace camg {

/// Undirected weighted graph over matrix rows; edges stored once as (i,j)
/// with j < i.
struct WeightedGraph {
  index_t nvertices = 0;
  std::vector<std::array<index_t, 2>> edges;  // {i, j}, j < i, duplicate-free
  std::vector<double> weights;                // > 0

  index_t n_edges() const { return static_cast<index_t>(edges.size()); }
  /// Laplacian sum_e w_e (e_i - e_j)(e_i - e_j)^T.
  SparseMatrix laplacian() const;
  bool connected(std::span<const index_t> vertex_subset) const;
};

/// Graph of the sparsity pattern of a symmetric matrix: one vertex per row,
/// one edge per stored off-diagonal pair. Edge weight defaults to |a_ij|;
/// a weight map overrides it.
WeightedGraph graph_of(
    const SparseMatrix& A,
    const std::function<double(index_t, index_t, double)>& weight_map = nullptr);

/// Weighted graph Laplacian spectrally equivalent to the P1 stiffness matrix
/// assembled from the mesh with cellwise coefficient kappa: every vertex pair
/// of each simplex contributes |e|^{d-2} * kappa_T to the edge weight.
SparseMatrix to_graph_laplacian(const SparseMatrix& A_stiffness, const Mesh& mesh,
                                std::span<const double> kappa);

}  // namespace camg
