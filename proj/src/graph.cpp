#include "camg/graph.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace camg {

SparseMatrix WeightedGraph::laplacian() const {
  CooBuilder coo(nvertices, nvertices);
  for (index_t e = 0; e < n_edges(); ++e) {
    auto [i, j] = edges[e];
    double w = weights[e];
    coo.add(i, i, w);
    coo.add(j, j, w);
    coo.add(i, j, -w);
    coo.add(j, i, -w);
  }
  return coo.finalize(true);
}

bool WeightedGraph::connected(std::span<const index_t> vertex_subset) const {
  if (vertex_subset.empty()) return true;
  std::map<index_t, index_t> local;
  for (std::size_t i = 0; i < vertex_subset.size(); ++i)
    local[vertex_subset[i]] = static_cast<index_t>(i);
  std::vector<std::vector<index_t>> adj(vertex_subset.size());
  for (const auto& [i, j] : edges) {
    auto it = local.find(i);
    auto jt = local.find(j);
    if (it == local.end() || jt == local.end()) continue;
    adj[it->second].push_back(jt->second);
    adj[jt->second].push_back(it->second);
  }
  std::vector<char> seen(vertex_subset.size(), 0);
  std::vector<index_t> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    index_t v = stack.back();
    stack.pop_back();
    for (index_t w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
  }
  return visited == vertex_subset.size();
}

WeightedGraph graph_of(
    const SparseMatrix& A,
    const std::function<double(index_t, index_t, double)>& weight_map) {
  if (A.nrows != A.ncols || !is_symmetric(A))
    throw std::invalid_argument("graph_of: matrix must be symmetric");
  WeightedGraph g;
  g.nvertices = A.nrows;
  for (index_t i = 0; i < A.nrows; ++i) {
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      index_t j = A.col_indices[k];
      if (j >= i) break;  // columns sorted: keep j < i only
      double w = weight_map ? weight_map(i, j, A.values[k]) : std::abs(A.values[k]);
      if (w <= 0.0) continue;
      g.edges.push_back({i, j});
      g.weights.push_back(w);
    }
  }
  return g;
}

SparseMatrix to_graph_laplacian(const SparseMatrix& A_stiffness, const Mesh& mesh,
                                std::span<const double> kappa) {
  if (mesh.n_cells() == 0) throw std::invalid_argument("to_graph_laplacian: empty mesh");
  if (A_stiffness.nrows != mesh.n_vertices())
    throw std::invalid_argument("to_graph_laplacian: matrix/mesh size mismatch");
  if (static_cast<index_t>(kappa.size()) != mesh.n_cells())
    throw std::invalid_argument("to_graph_laplacian: kappa must be cellwise");
  const int d = mesh.dim;
  CooBuilder coo(mesh.n_vertices(), mesh.n_vertices());
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    auto verts = mesh.cell(c);
    for (std::size_t a = 0; a < verts.size(); ++a) {
      for (std::size_t b = a + 1; b < verts.size(); ++b) {
        auto pa = mesh.vertex(verts[a]);
        auto pb = mesh.vertex(verts[b]);
        double len2 = 0.0;
        for (int k = 0; k < 3; ++k) len2 += (pa[k] - pb[k]) * (pa[k] - pb[k]);
        double w = kappa[c] * std::pow(std::sqrt(len2), d - 2);
        coo.add(verts[a], verts[a], w);
        coo.add(verts[b], verts[b], w);
        coo.add(verts[a], verts[b], -w);
        coo.add(verts[b], verts[a], -w);
      }
    }
  }
  return coo.finalize(true);
}

}  // namespace camg
