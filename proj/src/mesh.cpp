#include "camg/mesh.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace camg {

namespace {

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double signed_volume(const Mesh& mesh, std::span<const index_t> cell) {
  auto p0 = mesh.vertex(cell[0]);
  if (mesh.dim == 1) {
    return mesh.vertex(cell[1])[0] - p0[0];
  }
  if (mesh.dim == 2) {
    auto p1 = mesh.vertex(cell[1]);
    auto p2 = mesh.vertex(cell[2]);
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                  (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }
  std::array<std::array<double, 3>, 3> m;
  for (int r = 0; r < 3; ++r) {
    auto pr = mesh.vertex(cell[r + 1]);
    for (int d = 0; d < 3; ++d) m[r][d] = pr[d] - p0[d];
  }
  return det3(m) / 6.0;
}

}  // namespace

double Mesh::cell_volume(index_t c) const {
  double v = signed_volume(*this, cell(c));
  return std::abs(v);
}

double Mesh::cell_diameter(index_t c) const {
  auto verts = cell(c);
  double d2 = 0.0;
  for (std::size_t a = 0; a < verts.size(); ++a)
    for (std::size_t b = a + 1; b < verts.size(); ++b) {
      auto pa = vertex(verts[a]), pb = vertex(verts[b]);
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (pa[k] - pb[k]) * (pa[k] - pb[k]);
      d2 = std::max(d2, s);
    }
  return std::sqrt(d2);
}

std::array<index_t, 3> Mesh::facet_key(std::span<const index_t> verts) {
  std::array<index_t, 3> key{-1, -1, -1};
  for (std::size_t i = 0; i < verts.size() && i < 3; ++i) key[i] = verts[i];
  std::sort(key.begin(), key.begin() + verts.size());
  return key;
}

std::vector<index_t> Mesh::tagged_facet_vertices(int tag) const {
  std::set<index_t> out;
  for (const auto& [key, t] : facet_tags) {
    if (t != tag) continue;
    for (index_t v : key)
      if (v >= 0) out.insert(v);
  }
  return {out.begin(), out.end()};
}

std::vector<std::vector<index_t>> Mesh::tagged_facets(int tag) const {
  std::vector<std::vector<index_t>> out;
  for (const auto& [key, t] : facet_tags) {
    if (t != tag) continue;
    std::vector<index_t> f;
    for (index_t v : key)
      if (v >= 0) f.push_back(v);
    out.push_back(std::move(f));
  }
  return out;
}

double Curve1D::segment_length(index_t s) const {
  auto [a, b] = segments[s];
  double d = 0.0;
  for (int k = 0; k < 3; ++k) d += (vertices[a][k] - vertices[b][k]) * (vertices[a][k] - vertices[b][k]);
  return std::sqrt(d);
}

std::array<double, 3> Curve1D::tangent(index_t v) const {
  std::array<double, 3> t{0.0, 0.0, 0.0};
  for (index_t s = 0; s < n_segments(); ++s) {
    auto [a, b] = segments[s];
    if (a != v && b != v) continue;
    double len = segment_length(s);
    for (int k = 0; k < 3; ++k) t[k] += (vertices[b][k] - vertices[a][k]) / len;
  }
  double n = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
  if (n == 0.0) throw std::runtime_error("Curve1D::tangent: isolated vertex");
  for (int k = 0; k < 3; ++k) t[k] /= n;
  return t;
}

bool DofPartition::is_gamma(index_t i) const {
  return std::binary_search(gamma.begin(), gamma.end(), i);
}

void DofPartition::validate() const {
  std::vector<index_t> all;
  all.reserve(n_total);
  all.insert(all.end(), omega.begin(), omega.end());
  all.insert(all.end(), gamma.begin(), gamma.end());
  all.insert(all.end(), upsilon_minus_gamma.begin(), upsilon_minus_gamma.end());
  std::sort(all.begin(), all.end());
  if (static_cast<index_t>(all.size()) != n_total)
    throw std::invalid_argument("DofPartition: lists do not cover all DOFs");
  for (index_t i = 0; i < n_total; ++i)
    if (all[i] != i) throw std::invalid_argument("DofPartition: gap or duplicate");
}

Mesh unit_box_mesh(int dim, index_t n, std::array<double, 3> extents) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("unit_box_mesh: dim must be 1..3");
  if (n < 1) throw std::invalid_argument("unit_box_mesh: n must be >= 1");
  Mesh mesh;
  mesh.dim = dim;
  const index_t np = n + 1;
  std::array<double, 3> h{extents[0] / n, extents[1] / n, extents[2] / n};

  auto vid = [&](index_t i, index_t j, index_t k) {
    return i + np * (j + np * k);
  };

  if (dim == 1) {
    mesh.vertex_coords.resize(np);
    for (index_t i = 0; i < np; ++i) mesh.vertex_coords[i] = i * h[0];
    for (index_t i = 0; i < n; ++i) {
      mesh.cells.push_back(i);
      mesh.cells.push_back(i + 1);
    }
  } else if (dim == 2) {
    mesh.vertex_coords.resize(np * np * 2);
    for (index_t j = 0; j < np; ++j)
      for (index_t i = 0; i < np; ++i) {
        index_t v = vid(i, j, 0);
        mesh.vertex_coords[2 * v] = i * h[0];
        mesh.vertex_coords[2 * v + 1] = j * h[1];
      }
    for (index_t j = 0; j < n; ++j)
      for (index_t i = 0; i < n; ++i) {
        index_t v00 = vid(i, j, 0), v10 = vid(i + 1, j, 0);
        index_t v01 = vid(i, j + 1, 0), v11 = vid(i + 1, j + 1, 0);
        mesh.cells.insert(mesh.cells.end(), {v00, v10, v11});
        mesh.cells.insert(mesh.cells.end(), {v00, v11, v01});
      }
  } else {
    mesh.vertex_coords.resize(np * np * np * 3);
    for (index_t k = 0; k < np; ++k)
      for (index_t j = 0; j < np; ++j)
        for (index_t i = 0; i < np; ++i) {
          index_t v = vid(i, j, k);
          mesh.vertex_coords[3 * v] = i * h[0];
          mesh.vertex_coords[3 * v + 1] = j * h[1];
          mesh.vertex_coords[3 * v + 2] = k * h[2];
        }
    // Kuhn split: one tetrahedron per permutation of the axes, all sharing
    // the main diagonal of the cube.
    const std::array<std::array<int, 3>, 6> perms = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (index_t k = 0; k < n; ++k)
      for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < n; ++i) {
          for (const auto& perm : perms) {
            std::array<index_t, 3> c{i, j, k};
            std::array<index_t, 4> tet;
            tet[0] = vid(c[0], c[1], c[2]);
            for (int s = 0; s < 3; ++s) {
              c[perm[s]] += 1;
              tet[s + 1] = vid(c[0], c[1], c[2]);
            }
            mesh.cells.insert(mesh.cells.end(), tet.begin(), tet.end());
          }
        }
  }

  // Fix orientation: swap the last two vertices of negative cells.
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    auto cellv = std::span<index_t>(mesh.cells.data() + c * (dim + 1),
                                    static_cast<std::size_t>(dim + 1));
    if (signed_volume(mesh, cellv) < 0.0) std::swap(cellv[dim - 1], cellv[dim]);
  }

  // Boundary facet tags: face id 2*axis + side; facets on box edges keep the
  // lowest face id.
  const double tol = 1e-12 * (*std::max_element(extents.begin(), extents.end()));
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    auto cellv = mesh.cell(c);
    for (int drop = 0; drop <= dim; ++drop) {
      std::vector<index_t> facet;
      for (int s = 0; s <= dim; ++s)
        if (s != drop) facet.push_back(cellv[s]);
      for (int axis = 0; axis < dim; ++axis) {
        for (int side = 0; side < 2; ++side) {
          double plane = side == 0 ? 0.0 : extents[axis];
          bool on = true;
          for (index_t v : facet)
            if (std::abs(mesh.vertex(v)[axis] - plane) > tol) on = false;
          if (on) {
            auto key = Mesh::facet_key(facet);
            auto it = mesh.facet_tags.find(key);
            int tag = 2 * axis + side;
            if (it == mesh.facet_tags.end() || it->second > tag)
              mesh.facet_tags[key] = tag;
          }
        }
      }
    }
  }
  return mesh;
}

Mesh split_box_mesh(int dim, index_t n) {
  if (n % 2 != 0) throw std::invalid_argument("split_box_mesh: n must be even");
  Mesh mesh = unit_box_mesh(dim, n);
  const int last = dim - 1;
  mesh.cell_tags.resize(mesh.n_cells());
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    double mid = 0.0;
    for (index_t v : mesh.cell(c)) mid += mesh.vertex(v)[last];
    mid /= (dim + 1);
    mesh.cell_tags[c] = mid < 0.5 ? cell_tag_intra : cell_tag_extra;
  }
  // Interface facets: cell facets lying entirely in the midplane.
  const double tol = 1e-12;
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    auto cellv = mesh.cell(c);
    for (int drop = 0; drop <= dim; ++drop) {
      std::vector<index_t> facet;
      for (int s = 0; s <= dim; ++s)
        if (s != drop) facet.push_back(cellv[s]);
      bool on = true;
      for (index_t v : facet)
        if (std::abs(mesh.vertex(v)[last] - 0.5) > tol) on = false;
      if (on) mesh.facet_tags[Mesh::facet_key(facet)] = Mesh::interface_tag;
    }
  }
  return mesh;
}

std::pair<Mesh, std::vector<index_t>> extract_submesh(const Mesh& mesh, int cell_tag) {
  if (mesh.cell_tags.empty())
    throw std::invalid_argument("extract_submesh: mesh has no cell tags");
  Mesh sub;
  sub.dim = mesh.dim;
  std::set<index_t> vset;
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    if (mesh.cell_tags[c] != cell_tag) continue;
    for (index_t v : mesh.cell(c)) vset.insert(v);
  }
  std::vector<index_t> parent(vset.begin(), vset.end());
  std::map<index_t, index_t> to_sub;
  for (index_t i = 0; i < static_cast<index_t>(parent.size()); ++i)
    to_sub[parent[i]] = i;
  sub.vertex_coords.resize(parent.size() * mesh.dim);
  for (index_t i = 0; i < static_cast<index_t>(parent.size()); ++i)
    for (int d = 0; d < mesh.dim; ++d)
      sub.vertex_coords[i * mesh.dim + d] = mesh.vertex_coords[parent[i] * mesh.dim + d];
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    if (mesh.cell_tags[c] != cell_tag) continue;
    for (index_t v : mesh.cell(c)) sub.cells.push_back(to_sub.at(v));
  }
  for (const auto& [key, tag] : mesh.facet_tags) {
    std::vector<index_t> remapped;
    bool inside = true;
    for (index_t v : key) {
      if (v < 0) continue;
      auto it = to_sub.find(v);
      if (it == to_sub.end()) {
        inside = false;
        break;
      }
      remapped.push_back(it->second);
    }
    if (inside) sub.facet_tags[Mesh::facet_key(remapped)] = tag;
  }
  for (const auto& [v, tag] : mesh.vertex_tags) {
    auto it = to_sub.find(v);
    if (it != to_sub.end()) sub.vertex_tags[it->second] = tag;
  }
  return {std::move(sub), std::move(parent)};
}

namespace {

// Vertices on an axis-aligned lattice line, ordered along the axis; verifies
// each consecutive pair is an edge of the mesh.
std::vector<index_t> lattice_line(const Mesh& mesh, int axis,
                                  std::array<double, 3> anchor,
                                  double lo, double hi,
                                  const std::vector<std::vector<index_t>>& v2c) {
  const double tol = 1e-12;
  std::vector<index_t> verts;
  for (index_t v = 0; v < mesh.n_vertices(); ++v) {
    auto p = mesh.vertex(v);
    bool on = true;
    for (int d = 0; d < mesh.dim; ++d) {
      if (d == axis) continue;
      if (std::abs(p[d] - anchor[d]) > tol) on = false;
    }
    if (on && p[axis] >= lo - tol && p[axis] <= hi + tol) verts.push_back(v);
  }
  if (verts.size() < 2)
    throw std::invalid_argument("embedded_curve: line not representable on lattice");
  std::sort(verts.begin(), verts.end(), [&](index_t a, index_t b) {
    return mesh.vertex(a)[axis] < mesh.vertex(b)[axis];
  });
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    bool edge = false;
    for (index_t c : v2c[verts[i]]) {
      auto cv = mesh.cell(c);
      if (std::find(cv.begin(), cv.end(), verts[i + 1]) != cv.end()) edge = true;
    }
    if (!edge)
      throw std::invalid_argument("embedded_curve: line not representable on lattice");
  }
  return verts;
}

}  // namespace

Curve1D embedded_curve(const Mesh& mesh3d, CurveKind kind, const CurveParams& params) {
  if (mesh3d.dim != 3) throw std::invalid_argument("embedded_curve: 3D mesh required");
  if (params.rho <= 0.0) throw std::invalid_argument("embedded_curve: rho must be > 0");
  std::vector<std::vector<index_t>> v2c(mesh3d.n_vertices());
  for (index_t c = 0; c < mesh3d.n_cells(); ++c)
    for (index_t v : mesh3d.cell(c)) v2c[v].push_back(c);

  std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (index_t v = 0; v < mesh3d.n_vertices(); ++v) {
    auto p = mesh3d.vertex(v);
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  std::array<double, 3> center{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]),
                               0.5 * (lo[2] + hi[2])};

  Curve1D curve;
  std::map<index_t, index_t> seen;  // mesh vertex -> curve vertex
  auto push_leg = [&](const std::vector<index_t>& leg) {
    for (std::size_t i = 0; i < leg.size(); ++i) {
      if (!seen.count(leg[i])) {
        seen[leg[i]] = curve.n_vertices();
        curve.vertices.push_back(mesh3d.vertex(leg[i]));
        curve.mesh_vertex.push_back(leg[i]);
        curve.radius.push_back(params.rho);
      }
      if (i > 0)
        curve.segments.push_back({seen.at(leg[i - 1]), seen.at(leg[i])});
    }
  };

  if (kind == CurveKind::straight) {
    push_leg(lattice_line(mesh3d, 2, center, lo[2], hi[2], v2c));
  } else {
    // Y junction at the box center: trunk rises along z, two arms leave
    // along +x and +y at the junction height.
    push_leg(lattice_line(mesh3d, 2, center, lo[2], center[2], v2c));
    std::array<double, 3> anchor{center[0], center[1], center[2]};
    push_leg(lattice_line(mesh3d, 0, anchor, center[0], hi[0], v2c));
    push_leg(lattice_line(mesh3d, 1, anchor, center[1], hi[1], v2c));
  }

  // Arc length from the first vertex, walking the segment tree.
  curve.arclength.assign(curve.n_vertices(), -1.0);
  curve.arclength[0] = 0.0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (index_t s = 0; s < curve.n_segments(); ++s) {
      auto [a, b] = curve.segments[s];
      double len = curve.segment_length(s);
      if (curve.arclength[a] >= 0.0 && curve.arclength[b] < 0.0) {
        curve.arclength[b] = curve.arclength[a] + len;
        changed = true;
      } else if (curve.arclength[b] >= 0.0 && curve.arclength[a] < 0.0) {
        curve.arclength[a] = curve.arclength[b] + len;
        changed = true;
      }
    }
  }
  return curve;
}

CellLocator::CellLocator(const Mesh& mesh) : mesh_(mesh) {
  lo_ = {1e300, 1e300, 1e300};
  hi_ = {-1e300, -1e300, -1e300};
  for (index_t v = 0; v < mesh.n_vertices(); ++v) {
    auto p = mesh.vertex(v);
    for (int d = 0; d < 3; ++d) {
      lo_[d] = std::min(lo_[d], p[d]);
      hi_[d] = std::max(hi_[d], p[d]);
    }
  }
  double target = std::pow(static_cast<double>(mesh.n_cells()), 1.0 / mesh.dim);
  for (int d = 0; d < mesh.dim; ++d)
    nbins_[d] = std::max<index_t>(1, static_cast<index_t>(target / 2));
  bins_.assign(nbins_[0] * nbins_[1] * nbins_[2], {});
  auto bin_coord = [&](double x, int d) {
    double w = hi_[d] - lo_[d];
    if (w <= 0.0) return index_t{0};
    auto b = static_cast<index_t>((x - lo_[d]) / w * nbins_[d]);
    return std::clamp(b, index_t{0}, nbins_[d] - 1);
  };
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    std::array<index_t, 3> blo{0, 0, 0}, bhi{0, 0, 0};
    for (int d = 0; d < mesh.dim; ++d) {
      double mn = 1e300, mx = -1e300;
      for (index_t v : mesh.cell(c)) {
        mn = std::min(mn, mesh.vertex(v)[d]);
        mx = std::max(mx, mesh.vertex(v)[d]);
      }
      blo[d] = bin_coord(mn, d);
      bhi[d] = bin_coord(mx, d);
    }
    for (index_t bz = blo[2]; bz <= bhi[2]; ++bz)
      for (index_t by = blo[1]; by <= bhi[1]; ++by)
        for (index_t bx = blo[0]; bx <= bhi[0]; ++bx)
          bins_[bx + nbins_[0] * (by + nbins_[1] * bz)].push_back(c);
  }
}

index_t CellLocator::bin_of(std::array<double, 3> p) const {
  std::array<index_t, 3> b{0, 0, 0};
  for (int d = 0; d < mesh_.dim; ++d) {
    double w = hi_[d] - lo_[d];
    if (w <= 0.0) continue;
    b[d] = std::clamp(static_cast<index_t>((p[d] - lo_[d]) / w * nbins_[d]),
                      index_t{0}, nbins_[d] - 1);
  }
  return b[0] + nbins_[0] * (b[1] + nbins_[1] * b[2]);
}

std::optional<std::pair<index_t, std::vector<double>>> CellLocator::locate(
    std::array<double, 3> p) const {
  const double tol = -1e-10;
  for (index_t c : bins_[bin_of(p)]) {
    auto cellv = mesh_.cell(c);
    auto p0 = mesh_.vertex(cellv[0]);
    // Solve the barycentric system for the dim trailing coordinates.
    const int dim = mesh_.dim;
    std::array<std::array<double, 3>, 3> B{};
    std::array<double, 3> rhs{};
    for (int col = 0; col < dim; ++col) {
      auto pc = mesh_.vertex(cellv[col + 1]);
      for (int r = 0; r < dim; ++r) B[r][col] = pc[r] - p0[r];
    }
    for (int r = 0; r < dim; ++r) rhs[r] = p[r] - p0[r];
    std::array<double, 3> lam{};
    if (dim == 1) {
      lam[0] = rhs[0] / B[0][0];
    } else if (dim == 2) {
      double det = B[0][0] * B[1][1] - B[0][1] * B[1][0];
      lam[0] = (rhs[0] * B[1][1] - B[0][1] * rhs[1]) / det;
      lam[1] = (B[0][0] * rhs[1] - rhs[0] * B[1][0]) / det;
    } else {
      double det = det3(B);
      auto minor = [&](int col) {
        auto M = B;
        for (int r = 0; r < 3; ++r) M[r][col] = rhs[r];
        return det3(M);
      };
      lam[0] = minor(0) / det;
      lam[1] = minor(1) / det;
      lam[2] = minor(2) / det;
    }
    double l0 = 1.0;
    bool ok = true;
    std::vector<double> bary(dim + 1);
    for (int d = 0; d < dim; ++d) {
      l0 -= lam[d];
      bary[d + 1] = lam[d];
      if (lam[d] < tol) ok = false;
    }
    bary[0] = l0;
    if (l0 < tol) ok = false;
    if (ok) return std::make_pair(c, bary);
  }
  return std::nullopt;
}

std::array<double, 3> CellLocator::clamp(std::array<double, 3> p) const {
  for (int d = 0; d < mesh_.dim; ++d) p[d] = std::clamp(p[d], lo_[d], hi_[d]);
  return p;
}

namespace {

using nlohmann::json;

json tags_to_json(const Mesh& mesh) {
  json tags = json::object();
  if (!mesh.cell_tags.empty()) tags["cells"] = mesh.cell_tags;
  if (!mesh.facet_tags.empty()) {
    json facets = json::array();
    for (const auto& [key, tag] : mesh.facet_tags) {
      json row = json::array();
      for (index_t v : key)
        if (v >= 0) row.push_back(v);
      row.push_back(tag);
      facets.push_back(row);
    }
    tags["facets"] = facets;
  }
  if (!mesh.vertex_tags.empty()) {
    json verts = json::array();
    for (const auto& [v, tag] : mesh.vertex_tags) verts.push_back({v, tag});
    tags["vertices"] = verts;
  }
  return tags;
}

}  // namespace

std::string mesh_to_json(const Mesh& mesh) {
  json j;
  j["dim"] = mesh.dim;
  json verts = json::array();
  for (index_t v = 0; v < mesh.n_vertices(); ++v) {
    json p = json::array();
    for (int d = 0; d < mesh.dim; ++d) p.push_back(mesh.vertex_coords[v * mesh.dim + d]);
    verts.push_back(p);
  }
  j["vertices"] = verts;
  json cells = json::array();
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    json row = json::array();
    for (index_t v : mesh.cell(c)) row.push_back(v);
    cells.push_back(row);
  }
  j["cells"] = cells;
  j["tags"] = tags_to_json(mesh);
  return j.dump();
}

Mesh mesh_from_json(const std::string& text) {
  json j = json::parse(text);
  Mesh mesh;
  mesh.dim = j.at("dim").get<int>();
  for (const auto& p : j.at("vertices"))
    for (int d = 0; d < mesh.dim; ++d) mesh.vertex_coords.push_back(p.at(d).get<double>());
  for (const auto& row : j.at("cells"))
    for (const auto& v : row) mesh.cells.push_back(v.get<index_t>());
  if (j.contains("tags")) {
    const auto& tags = j["tags"];
    if (tags.contains("cells")) mesh.cell_tags = tags["cells"].get<std::vector<int>>();
    if (tags.contains("facets")) {
      for (const auto& row : tags["facets"]) {
        std::vector<index_t> verts;
        for (std::size_t i = 0; i + 1 < row.size(); ++i)
          verts.push_back(row.at(i).get<index_t>());
        mesh.facet_tags[Mesh::facet_key(verts)] = row.back().get<int>();
      }
    }
    if (tags.contains("vertices"))
      for (const auto& row : tags["vertices"])
        mesh.vertex_tags[row.at(0).get<index_t>()] = row.at(1).get<int>();
  }
  return mesh;
}

std::string curve_to_json(const Curve1D& curve) {
  json j;
  json verts = json::array();
  for (const auto& p : curve.vertices) verts.push_back({p[0], p[1], p[2]});
  j["vertices"] = verts;
  json segs = json::array();
  for (const auto& s : curve.segments) segs.push_back({s[0], s[1]});
  j["segments"] = segs;
  j["radius"] = curve.radius;
  j["arclength"] = curve.arclength;
  j["mesh_vertex"] = curve.mesh_vertex;
  return j.dump();
}

Curve1D curve_from_json(const std::string& text) {
  json j = json::parse(text);
  Curve1D curve;
  for (const auto& p : j.at("vertices"))
    curve.vertices.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                              p.at(2).get<double>()});
  for (const auto& s : j.at("segments"))
    curve.segments.push_back({s.at(0).get<index_t>(), s.at(1).get<index_t>()});
  curve.radius = j.at("radius").get<std::vector<double>>();
  if (j.contains("arclength")) curve.arclength = j["arclength"].get<std::vector<double>>();
  if (j.contains("mesh_vertex"))
    curve.mesh_vertex = j["mesh_vertex"].get<std::vector<index_t>>();
  return curve;
}

}  // namespace camg
