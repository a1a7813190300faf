#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camg/sparse.hpp"

namespace camg {

/// Structured simplicial mesh (intervals, triangles, tetrahedra).
/// Facets are identified by their sorted vertex tuple.
struct Mesh {
  static constexpr int interface_tag = 100;

  int dim = 0;
  std::vector<double> vertex_coords;  // dim-strided
  std::vector<index_t> cells;         // (dim+1)-strided, positively oriented
  std::vector<int> cell_tags;         // empty or one tag per cell
  std::map<std::array<index_t, 3>, int> facet_tags;  // key padded with -1
  std::map<index_t, int> vertex_tags;

  index_t n_vertices() const {
    return dim ? static_cast<index_t>(vertex_coords.size()) / dim : 0;
  }
  index_t n_cells() const {
    return static_cast<index_t>(cells.size()) / (dim + 1);
  }
  std::span<const index_t> cell(index_t c) const {
    return {cells.data() + c * (dim + 1), static_cast<std::size_t>(dim + 1)};
  }
  std::array<double, 3> vertex(index_t v) const {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) p[d] = vertex_coords[v * dim + d];
    return p;
  }
  double cell_volume(index_t c) const;
  double cell_diameter(index_t c) const;

  static std::array<index_t, 3> facet_key(std::span<const index_t> verts);
  /// Vertices on facets carrying the given tag, sorted ascending.
  std::vector<index_t> tagged_facet_vertices(int tag) const;
  /// All (dim-1)-facets of the given tag as sorted vertex tuples.
  std::vector<std::vector<index_t>> tagged_facets(int tag) const;
};

/// Polyline curve embedded in a 3D mesh; fitted curves reference the parent
/// mesh vertices so that every segment is an edge of the 3D mesh.
struct Curve1D {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<index_t, 2>> segments;
  std::vector<double> arclength;      // distance from the root along the tree
  std::vector<double> radius;         // > 0 everywhere
  std::vector<index_t> mesh_vertex;   // parent 3D vertex, -1 if unfitted

  index_t n_vertices() const { return static_cast<index_t>(vertices.size()); }
  index_t n_segments() const { return static_cast<index_t>(segments.size()); }
  double segment_length(index_t s) const;
  /// Unit tangent at a vertex: normalized mean of incident segment directions.
  std::array<double, 3> tangent(index_t v) const;
};

/// Partition of the global DOF indices into the elliptic-side set, the
/// interface set and (optionally) the conforming-subdomain remainder.
struct DofPartition {
  index_t n_total = 0;
  std::vector<index_t> omega;                // sorted
  std::vector<index_t> gamma;                // sorted
  std::vector<index_t> upsilon_minus_gamma;  // sorted, may be empty

  bool is_gamma(index_t i) const;
  void validate() const;  // disjoint lists covering 0..n_total-1
};

enum class CurveKind { straight, branched };

struct CurveParams {
  double rho = 1.0;  // micrometer
};

/// Structured simplicial mesh of a box: 2 triangles per square in 2D,
/// 6 tetrahedra per cube (Kuhn split) in 3D. Boundary facets are tagged
/// with the face index 2*axis + side.
Mesh unit_box_mesh(int dim, index_t n_per_axis,
                   std::array<double, 3> extents = {1.0, 1.0, 1.0});

/// Unit box with cells tagged 1 (below the midplane of the last axis) and
/// 2 (above), interface facets tagged Mesh::interface_tag, and boundary faces
/// orthogonal to the last axis marked Dirichlet via facet tags.
/// Requires even n.
Mesh split_box_mesh(int dim, index_t n_per_axis);

constexpr int cell_tag_intra = 1;
constexpr int cell_tag_extra = 2;

/// Submesh of all cells carrying cell_tag; second return maps submesh vertex
/// ids to parent ids (ascending parent order).
std::pair<Mesh, std::vector<index_t>> extract_submesh(const Mesh& mesh, int cell_tag);

/// Polyline along lattice edges of a box mesh. straight: the axis line
/// through the box center (last axis). branched: a Y of three axis-aligned
/// legs meeting at the center. Throws std::invalid_argument when the line
/// is not representable on the lattice.
Curve1D embedded_curve(const Mesh& mesh3d, CurveKind kind, const CurveParams& params);

/// Point-in-cell queries backed by a uniform bin grid over cell boxes.
class CellLocator {
 public:
  explicit CellLocator(const Mesh& mesh);
  /// Containing cell and barycentric coordinates; nullopt when outside.
  std::optional<std::pair<index_t, std::vector<double>>> locate(
      std::array<double, 3> p) const;
  /// Clamp a point into the mesh bounding box (used for quadrature circles
  /// that leave the domain).
  std::array<double, 3> clamp(std::array<double, 3> p) const;

 private:
  const Mesh& mesh_;
  std::array<double, 3> lo_{}, hi_{};
  std::array<index_t, 3> nbins_{1, 1, 1};
  std::vector<std::vector<index_t>> bins_;
  index_t bin_of(std::array<double, 3> p) const;
};

// JSON mesh format: {dim, vertices:[[x,...]], cells:[[i,...]], tags:{...}};
// curves add {segments, radius}.
std::string mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const std::string& text);
std::string curve_to_json(const Curve1D& curve);
Curve1D curve_from_json(const std::string& text);

}  // namespace camg
