#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "camg/mesh.hpp"

using namespace camg;

namespace {

std::set<std::pair<index_t, index_t>> mesh_edge_set(const Mesh& mesh) {
  std::set<std::pair<index_t, index_t>> edges;
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    auto verts = mesh.cell(c);
    for (std::size_t a = 0; a < verts.size(); ++a)
      for (std::size_t b = a + 1; b < verts.size(); ++b)
        edges.insert({std::min(verts[a], verts[b]), std::max(verts[a], verts[b])});
  }
  return edges;
}

}  // namespace

TEST_CASE("unit box counts") {
  Mesh m2 = unit_box_mesh(2, 1);
  CHECK(m2.n_vertices() == 4);
  CHECK(m2.n_cells() == 2);

  Mesh m3 = unit_box_mesh(3, 1);
  CHECK(m3.n_vertices() == 8);
  CHECK(m3.n_cells() == 6);

  Mesh m32 = unit_box_mesh(2, 32);
  CHECK(m32.n_vertices() == 1089);  // two-field systems at this level have 2178 DOFs

  CHECK_THROWS_AS(unit_box_mesh(2, 0), std::invalid_argument);
}

TEST_CASE("cell volumes sum to the box volume") {
  for (int dim : {1, 2, 3}) {
    Mesh mesh = unit_box_mesh(dim, 4, {2.0, 1.0, 0.5});
    double vol = 0.0;
    for (index_t c = 0; c < mesh.n_cells(); ++c) {
      CHECK(mesh.cell_volume(c) > 0.0);
      vol += mesh.cell_volume(c);
    }
    double want = dim == 1 ? 2.0 : (dim == 2 ? 2.0 : 1.0);
    CHECK(vol == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("quasi uniformity of generated meshes") {
  for (int dim : {2, 3}) {
    Mesh mesh = unit_box_mesh(dim, 5);
    double dmin = 1e300, dmax = 0.0;
    for (index_t c = 0; c < mesh.n_cells(); ++c) {
      dmin = std::min(dmin, mesh.cell_diameter(c));
      dmax = std::max(dmax, mesh.cell_diameter(c));
    }
    CHECK(dmax / dmin <= 4.0);
  }
}

TEST_CASE("split box interface") {
  Mesh mesh = split_box_mesh(2, 2);
  auto interface = mesh.tagged_facets(Mesh::interface_tag);
  CHECK(interface.size() == 2);

  CHECK_THROWS_AS(split_box_mesh(2, 3), std::invalid_argument);

  // Every interface facet is shared by exactly one intra and one extra cell.
  Mesh m = split_box_mesh(2, 4);
  for (const auto& facet : m.tagged_facets(Mesh::interface_tag)) {
    int intra = 0, extra = 0;
    for (index_t c = 0; c < m.n_cells(); ++c) {
      auto verts = m.cell(c);
      int found = 0;
      for (index_t v : facet)
        if (std::find(verts.begin(), verts.end(), v) != verts.end()) ++found;
      if (found == static_cast<int>(facet.size())) {
        if (m.cell_tags[c] == cell_tag_intra) ++intra;
        if (m.cell_tags[c] == cell_tag_extra) ++extra;
      }
    }
    CHECK(intra == 1);
    CHECK(extra == 1);
  }

  // Faces parallel to the interface carry boundary tags (Dirichlet faces).
  const int tag_lo = 2 * (2 - 1);
  CHECK_FALSE(m.tagged_facet_vertices(tag_lo).empty());
  CHECK_FALSE(m.tagged_facet_vertices(tag_lo + 1).empty());
}

TEST_CASE("extract submesh is consistent") {
  Mesh mesh = split_box_mesh(2, 4);
  auto [sub, parent] = extract_submesh(mesh, cell_tag_intra);
  CHECK(sub.n_cells() * 2 == mesh.n_cells());
  CHECK(sub.n_vertices() == static_cast<index_t>(parent.size()));
  for (index_t v = 0; v < sub.n_vertices(); ++v) {
    auto p = sub.vertex(v);
    auto q = mesh.vertex(parent[v]);
    CHECK(p[0] == q[0]);
    CHECK(p[1] == q[1]);
  }
  CHECK_FALSE(sub.tagged_facet_vertices(Mesh::interface_tag).empty());
}

TEST_CASE("embedded straight curve") {
  Mesh mesh = unit_box_mesh(3, 4);
  Curve1D curve = embedded_curve(mesh, CurveKind::straight, {0.2});
  CHECK(curve.n_vertices() == 5);
  CHECK(curve.n_segments() == 4);
  for (double r : curve.radius) CHECK(r == 0.2);

  // Fitted: every segment is an edge of the 3D mesh.
  auto edges = mesh_edge_set(mesh);
  for (index_t s = 0; s < curve.n_segments(); ++s) {
    auto [a, b] = curve.segments[s];
    index_t va = curve.mesh_vertex[a], vb = curve.mesh_vertex[b];
    CHECK(edges.count({std::min(va, vb), std::max(va, vb)}) == 1);
  }

  // Lines through non-lattice points are rejected.
  Mesh odd = unit_box_mesh(3, 3);
  CHECK_THROWS_AS(embedded_curve(odd, CurveKind::straight, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("embedded branched curve") {
  Mesh mesh = unit_box_mesh(3, 8);
  Curve1D curve = embedded_curve(mesh, CurveKind::branched, {1.0});
  // Junction: one vertex incident to 3 segments.
  std::map<index_t, int> degree;
  for (auto [a, b] : curve.segments) {
    degree[a]++;
    degree[b]++;
  }
  int junctions = 0, leaves = 0;
  for (auto [v, d] : degree) {
    if (d == 3) ++junctions;
    if (d == 1) ++leaves;
  }
  CHECK(junctions == 1);
  CHECK(leaves == 3);

  auto edges = mesh_edge_set(mesh);
  for (index_t s = 0; s < curve.n_segments(); ++s) {
    auto [a, b] = curve.segments[s];
    index_t va = curve.mesh_vertex[a], vb = curve.mesh_vertex[b];
    CHECK(edges.count({std::min(va, vb), std::max(va, vb)}) == 1);
  }
  for (double t : curve.arclength) CHECK(t >= 0.0);
}

TEST_CASE("cell locator finds centroids and clamps") {
  Mesh mesh = unit_box_mesh(3, 3);
  CellLocator locator(mesh);
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    std::array<double, 3> centroid{0.0, 0.0, 0.0};
    for (index_t v : mesh.cell(c))
      for (int d = 0; d < 3; ++d) centroid[d] += mesh.vertex(v)[d] / 4.0;
    auto hit = locator.locate(centroid);
    REQUIRE(hit.has_value());
    CHECK(hit->first == c);
    double sum = 0.0;
    for (double l : hit->second) {
      CHECK(l >= -1e-10);
      sum += l;
    }
    CHECK(sum == doctest::Approx(1.0));
  }
  auto outside = locator.clamp({2.0, -1.0, 0.5});
  CHECK(outside[0] == 1.0);
  CHECK(outside[1] == 0.0);
  CHECK(locator.locate(outside).has_value());
}

TEST_CASE("mesh json round trip") {
  Mesh mesh = split_box_mesh(2, 2);
  Mesh back = mesh_from_json(mesh_to_json(mesh));
  CHECK(back.dim == mesh.dim);
  CHECK(back.n_vertices() == mesh.n_vertices());
  CHECK(back.n_cells() == mesh.n_cells());
  CHECK(back.cell_tags == mesh.cell_tags);
  CHECK(back.facet_tags == mesh.facet_tags);
  CHECK(back.vertex_coords == mesh.vertex_coords);

  Mesh m3 = unit_box_mesh(3, 4);
  Curve1D curve = embedded_curve(m3, CurveKind::straight, {1.0});
  Curve1D cback = curve_from_json(curve_to_json(curve));
  CHECK(cback.n_vertices() == curve.n_vertices());
  CHECK(cback.segments == curve.segments);
  CHECK(cback.radius == curve.radius);
}

TEST_CASE("dof partition validation") {
  DofPartition part;
  part.n_total = 4;
  part.omega = {0, 1};
  part.gamma = {2, 3};
  CHECK_NOTHROW(part.validate());
  CHECK(part.is_gamma(2));
  CHECK_FALSE(part.is_gamma(0));
  part.gamma = {2};
  CHECK_THROWS_AS(part.validate(), std::invalid_argument);
}
