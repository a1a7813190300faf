#include "camg/assembly.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "camg/mtx_io.hpp"

namespace camg {

void ProblemSpec::validate() const {
  if (alpha_e <= 0.0 || alpha_i <= 0.0)
    throw std::invalid_argument("ProblemSpec: conductivities must be positive");
  if (gamma <= 0.0) throw std::invalid_argument("ProblemSpec: gamma must be positive");
  if (model == ModelKind::reduced_emi && rho <= 0.0)
    throw std::invalid_argument("ProblemSpec: rho must be positive");
  if (n < 1) throw std::invalid_argument("ProblemSpec: n must be >= 1");
}

SparseMatrix CoupledSystem::system_matrix() const {
  return add(A0, A1, gamma, 1.0);
}

void CoupledSystem::constrain_rhs(std::span<double> f) const {
  if (bc_indices.empty()) return;
  for (index_t i = 0; i < static_cast<index_t>(f.size()); ++i)
    f[i] -= bc_rhs_correction[i];
  for (std::size_t k = 0; k < bc_indices.size(); ++k)
    f[bc_indices[k]] = bc_diag[k] * bc_values[k];
}

namespace {

// Gradients of the barycentric basis and the cell measure.
struct CellGeometry {
  double volume;
  std::vector<std::array<double, 3>> grads;  // one per cell vertex
};

CellGeometry cell_geometry(const Mesh& mesh, index_t c) {
  const int d = mesh.dim;
  auto verts = mesh.cell(c);
  auto p0 = mesh.vertex(verts[0]);
  // B columns are edge vectors from vertex 0.
  double B[3][3] = {};
  for (int col = 0; col < d; ++col) {
    auto pc = mesh.vertex(verts[col + 1]);
    for (int r = 0; r < d; ++r) B[r][col] = pc[r] - p0[r];
  }
  double det;
  double inv[3][3] = {};
  if (d == 1) {
    det = B[0][0];
    inv[0][0] = 1.0 / det;
  } else if (d == 2) {
    det = B[0][0] * B[1][1] - B[0][1] * B[1][0];
    inv[0][0] = B[1][1] / det;
    inv[0][1] = -B[0][1] / det;
    inv[1][0] = -B[1][0] / det;
    inv[1][1] = B[0][0] / det;
  } else {
    det = B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1]) -
          B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0]) +
          B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]);
    double c00 = B[1][1] * B[2][2] - B[1][2] * B[2][1];
    double c01 = B[1][2] * B[2][0] - B[1][0] * B[2][2];
    double c02 = B[1][0] * B[2][1] - B[1][1] * B[2][0];
    double c10 = B[0][2] * B[2][1] - B[0][1] * B[2][2];
    double c11 = B[0][0] * B[2][2] - B[0][2] * B[2][0];
    double c12 = B[0][1] * B[2][0] - B[0][0] * B[2][1];
    double c20 = B[0][1] * B[1][2] - B[0][2] * B[1][1];
    double c21 = B[0][2] * B[1][0] - B[0][0] * B[1][2];
    double c22 = B[0][0] * B[1][1] - B[0][1] * B[1][0];
    inv[0][0] = c00 / det; inv[0][1] = c10 / det; inv[0][2] = c20 / det;
    inv[1][0] = c01 / det; inv[1][1] = c11 / det; inv[1][2] = c21 / det;
    inv[2][0] = c02 / det; inv[2][1] = c12 / det; inv[2][2] = c22 / det;
  }
  double fact = d == 1 ? 1.0 : (d == 2 ? 2.0 : 6.0);
  CellGeometry geom;
  geom.volume = std::abs(det) / fact;
  if (geom.volume <= 0.0)
    throw std::invalid_argument("assemble: degenerate cell " + std::to_string(c));
  geom.grads.assign(d + 1, {0.0, 0.0, 0.0});
  // grad(lambda_j) = row j-1 of B^{-1}; grad(lambda_0) = -sum of the others.
  for (int j = 1; j <= d; ++j)
    for (int r = 0; r < d; ++r) {
      geom.grads[j][r] = inv[j - 1][r];
      geom.grads[0][r] -= inv[j - 1][r];
    }
  return geom;
}

double facet_measure(const Mesh& mesh, const std::vector<index_t>& facet) {
  if (facet.size() == 1) return 1.0;  // point facet: counting measure
  auto p0 = mesh.vertex(facet[0]);
  if (facet.size() == 2) {
    auto p1 = mesh.vertex(facet[1]);
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += (p1[k] - p0[k]) * (p1[k] - p0[k]);
    return std::sqrt(s);
  }
  auto p1 = mesh.vertex(facet[1]);
  auto p2 = mesh.vertex(facet[2]);
  std::array<double, 3> u, v, w;
  for (int k = 0; k < 3; ++k) {
    u[k] = p1[k] - p0[k];
    v[k] = p2[k] - p0[k];
  }
  w[0] = u[1] * v[2] - u[2] * v[1];
  w[1] = u[2] * v[0] - u[0] * v[2];
  w[2] = u[0] * v[1] - u[1] * v[0];
  return 0.5 * std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> kappa) {
  if (static_cast<index_t>(kappa.size()) != mesh.n_cells())
    throw std::invalid_argument("assemble_stiffness: kappa must be cellwise");
  const int d = mesh.dim;
  CooBuilder coo(mesh.n_vertices(), mesh.n_vertices());
  coo.reserve(mesh.n_cells() * (d + 1) * (d + 1));
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    auto geom = cell_geometry(mesh, c);
    auto verts = mesh.cell(c);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; b <= d; ++b) {
        double g = 0.0;
        for (int r = 0; r < d; ++r) g += geom.grads[a][r] * geom.grads[b][r];
        coo.add(verts[a], verts[b], kappa[c] * geom.volume * g);
      }
  }
  return coo.finalize(true);
}

SparseMatrix assemble_stiffness(const Mesh& mesh, double kappa) {
  std::vector<double> k(mesh.n_cells(), kappa);
  return assemble_stiffness(mesh, k);
}

SparseMatrix assemble_mass(const Mesh& mesh, bool lumped) {
  const int d = mesh.dim;
  CooBuilder coo(mesh.n_vertices(), mesh.n_vertices());
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    double vol = mesh.cell_volume(c);
    auto verts = mesh.cell(c);
    if (lumped) {
      for (int a = 0; a <= d; ++a) coo.add(verts[a], verts[a], vol / (d + 1));
    } else {
      double base = vol / ((d + 1) * (d + 2));
      for (int a = 0; a <= d; ++a)
        for (int b = 0; b <= d; ++b)
          coo.add(verts[a], verts[b], base * (a == b ? 2.0 : 1.0));
    }
  }
  return coo.finalize(true);
}

SparseMatrix assemble_facet_mass(const Mesh& mesh, int facet_tag, bool lumped,
                                 std::vector<index_t>& vertex_order) {
  auto facets = mesh.tagged_facets(facet_tag);
  if (facets.empty())
    throw std::invalid_argument("assemble_facet_mass: no facets with requested tag");
  vertex_order = mesh.tagged_facet_vertices(facet_tag);
  std::map<index_t, index_t> local;
  for (index_t i = 0; i < static_cast<index_t>(vertex_order.size()); ++i)
    local[vertex_order[i]] = i;
  const index_t n = static_cast<index_t>(vertex_order.size());
  CooBuilder coo(n, n);
  for (const auto& facet : facets) {
    double measure = facet_measure(mesh, facet);
    const int nv = static_cast<int>(facet.size());
    if (lumped) {
      for (index_t v : facet) coo.add(local.at(v), local.at(v), measure / nv);
    } else {
      double base = measure / (nv * (nv + 1));
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
          coo.add(local.at(facet[a]), local.at(facet[b]),
                  base * (a == b ? 2.0 : 1.0));
    }
  }
  return coo.finalize(true);
}

SparseMatrix curve_stiffness(const Curve1D& curve, double kappa) {
  CooBuilder coo(curve.n_vertices(), curve.n_vertices());
  for (index_t s = 0; s < curve.n_segments(); ++s) {
    auto [a, b] = curve.segments[s];
    double len = curve.segment_length(s);
    if (len <= 0.0) throw std::invalid_argument("curve_stiffness: degenerate segment");
    double rho = 0.5 * (curve.radius[a] + curve.radius[b]);
    double w = kappa * std::numbers::pi * rho * rho / len;
    coo.add(a, a, w);
    coo.add(b, b, w);
    coo.add(a, b, -w);
    coo.add(b, a, -w);
  }
  return coo.finalize(true);
}

SparseMatrix curve_mass(const Curve1D& curve, bool lumped) {
  CooBuilder coo(curve.n_vertices(), curve.n_vertices());
  for (index_t s = 0; s < curve.n_segments(); ++s) {
    auto [a, b] = curve.segments[s];
    double len = curve.segment_length(s);
    double circumference_a = 2.0 * std::numbers::pi * curve.radius[a];
    double circumference_b = 2.0 * std::numbers::pi * curve.radius[b];
    if (lumped) {
      coo.add(a, a, 0.5 * len * circumference_a);
      coo.add(b, b, 0.5 * len * circumference_b);
    } else {
      double circ = 0.5 * (circumference_a + circumference_b);
      coo.add(a, a, circ * len / 3.0);
      coo.add(b, b, circ * len / 3.0);
      coo.add(a, b, circ * len / 6.0);
      coo.add(b, a, circ * len / 6.0);
    }
  }
  return coo.finalize(true);
}

SparseMatrix averaging_operator(const Mesh& mesh3d, const Curve1D& curve,
                                int quadrature_points, BuildReport* report) {
  if (quadrature_points < 1)
    throw std::invalid_argument("averaging_operator: need >= 1 quadrature point");
  CellLocator locator(mesh3d);
  CooBuilder coo(curve.n_vertices(), mesh3d.n_vertices());
  for (index_t k = 0; k < curve.n_vertices(); ++k) {
    auto t = curve.tangent(k);
    // Orthonormal frame normal to the tangent.
    int axis = 0;
    for (int d = 1; d < 3; ++d)
      if (std::abs(t[d]) < std::abs(t[axis])) axis = d;
    std::array<double, 3> e{0.0, 0.0, 0.0};
    e[axis] = 1.0;
    std::array<double, 3> n1{t[1] * e[2] - t[2] * e[1], t[2] * e[0] - t[0] * e[2],
                             t[0] * e[1] - t[1] * e[0]};
    double nn = std::sqrt(n1[0] * n1[0] + n1[1] * n1[1] + n1[2] * n1[2]);
    for (int d = 0; d < 3; ++d) n1[d] /= nn;
    std::array<double, 3> n2{t[1] * n1[2] - t[2] * n1[1], t[2] * n1[0] - t[0] * n1[2],
                             t[0] * n1[1] - t[1] * n1[0]};
    const double rho = curve.radius[k];
    const auto& x = curve.vertices[k];
    for (int m = 0; m < quadrature_points; ++m) {
      double theta = 2.0 * std::numbers::pi * (m + 0.5) / quadrature_points;
      std::array<double, 3> q;
      for (int d = 0; d < 3; ++d)
        q[d] = x[d] + rho * (std::cos(theta) * n1[d] + std::sin(theta) * n2[d]);
      auto hit = locator.locate(q);
      if (!hit) {
        q = locator.clamp(q);
        hit = locator.locate(q);
        if (report) report->clamped_quadrature_points++;
      }
      if (!hit)
        throw std::runtime_error("averaging_operator: quadrature point not located");
      auto [cell, bary] = *hit;
      auto verts = mesh3d.cell(cell);
      for (std::size_t a = 0; a < verts.size(); ++a)
        coo.add(k, verts[a], bary[a] / quadrature_points);
    }
  }
  return coo.finalize(false, /*drop_zeros=*/true);
}

SparseMatrix trace_operator(const Mesh& mesh3d, const Curve1D& curve) {
  std::vector<std::vector<index_t>> v2c(mesh3d.n_vertices());
  for (index_t c = 0; c < mesh3d.n_cells(); ++c)
    for (index_t v : mesh3d.cell(c)) v2c[v].push_back(c);
  CooBuilder coo(curve.n_vertices(), mesh3d.n_vertices());
  for (index_t k = 0; k < curve.n_vertices(); ++k) {
    index_t v = curve.mesh_vertex.empty() ? -1 : curve.mesh_vertex[k];
    if (v < 0)
      throw std::invalid_argument("trace_operator: curve must be fitted to the mesh");
    if (v2c[v].empty())
      throw std::invalid_argument("trace_operator: curve vertex outside mesh");
    index_t cell = *std::min_element(v2c[v].begin(), v2c[v].end());
    auto verts = mesh3d.cell(cell);
    for (index_t w : verts) coo.add(k, w, 1.0 / static_cast<double>(verts.size()));
  }
  return coo.finalize();
}

namespace {

SparseMatrix block_diag(const SparseMatrix& A, const SparseMatrix& B, double sa,
                        double sb) {
  SparseMatrix C;
  C.nrows = A.nrows + B.nrows;
  C.ncols = A.ncols + B.ncols;
  C.symmetric = A.symmetric && B.symmetric;
  C.row_offsets.reserve(C.nrows + 1);
  C.row_offsets.push_back(0);
  for (index_t i = 0; i < A.nrows; ++i) {
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      C.col_indices.push_back(A.col_indices[k]);
      C.values.push_back(sa * A.values[k]);
    }
    C.row_offsets.push_back(static_cast<index_t>(C.col_indices.size()));
  }
  for (index_t i = 0; i < B.nrows; ++i) {
    for (index_t k = B.row_offsets[i]; k < B.row_offsets[i + 1]; ++k) {
      C.col_indices.push_back(A.ncols + B.col_indices[k]);
      C.values.push_back(sb * B.values[k]);
    }
    C.row_offsets.push_back(static_cast<index_t>(C.col_indices.size()));
  }
  return C;
}

SparseMatrix metric_term(const SparseMatrix& R, const SparseMatrix& M_gamma) {
  SparseMatrix A0 = matmul(transpose(R), matmul(M_gamma, R));
  A0.symmetric = true;
  return A0;
}

std::vector<index_t> sorted_range(index_t lo, index_t hi) {
  std::vector<index_t> out(hi - lo);
  for (index_t i = lo; i < hi; ++i) out[i - lo] = i;
  return out;
}

}  // namespace

CoupledSystem build_bidomain(const ProblemSpec& spec) {
  spec.validate();
  Mesh mesh = unit_box_mesh(spec.dim, spec.n, spec.extents);
  const index_t nv = mesh.n_vertices();
  SparseMatrix A = assemble_stiffness(mesh, 1.0);
  SparseMatrix M = assemble_mass(mesh, spec.lumped_mass);

  CoupledSystem sys;
  sys.gamma = spec.gamma;
  sys.A1 = block_diag(A, A, spec.alpha_e, spec.alpha_i);
  sys.M_gamma = M;
  // R = [I, -I]: one row per vertex, coupling the two field copies.
  {
    CooBuilder coo(nv, 2 * nv);
    for (index_t j = 0; j < nv; ++j) {
      coo.add(j, j, 1.0);
      coo.add(j, nv + j, -1.0);
    }
    sys.R = coo.finalize();
  }
  sys.A0 = metric_term(sys.R, sys.M_gamma);
  sys.partition.n_total = 2 * nv;
  sys.partition.omega = sorted_range(0, nv);
  sys.partition.gamma = sorted_range(nv, 2 * nv);
  sys.gamma_dof_of_row = sys.partition.gamma;
  sys.dof_coords.resize(2 * nv);
  for (index_t v = 0; v < nv; ++v) {
    sys.dof_coords[v] = mesh.vertex(v);
    sys.dof_coords[nv + v] = mesh.vertex(v);
  }
  sys.neumann_kernel = std::vector<double>(2 * nv, 1.0);
  return sys;
}

CoupledSystem build_emi(const ProblemSpec& spec) {
  spec.validate();
  Mesh split = split_box_mesh(spec.dim, spec.n);
  auto [mesh_e, parent_e] = extract_submesh(split, cell_tag_extra);
  auto [mesh_i, parent_i] = extract_submesh(split, cell_tag_intra);
  const index_t ne = mesh_e.n_vertices();
  const index_t ni = mesh_i.n_vertices();

  // Interface correspondence: parent interface vertex -> (e copy, i copy).
  auto interface_parents = split.tagged_facet_vertices(Mesh::interface_tag);
  if (interface_parents.empty())
    throw std::invalid_argument("build_emi: missing interface tags");
  auto local_index = [](const std::vector<index_t>& parent, index_t p) {
    auto it = std::lower_bound(parent.begin(), parent.end(), p);
    if (it == parent.end() || *it != p)
      throw std::invalid_argument("build_emi: interface vertex missing from submesh");
    return static_cast<index_t>(it - parent.begin());
  };

  SparseMatrix Ae = assemble_stiffness(mesh_e, 1.0);
  SparseMatrix Ai = assemble_stiffness(mesh_i, 1.0);

  // Dirichlet on the faces parallel to the interface (the outer faces
  // orthogonal to the last axis); Neumann elsewhere.
  const int tag_lo = 2 * (spec.dim - 1);
  const int tag_hi = tag_lo + 1;
  auto dirichlet_of = [&](const Mesh& m) {
    std::set<index_t> verts;
    for (int tag : {tag_lo, tag_hi})
      for (index_t v : m.tagged_facet_vertices(tag)) verts.insert(v);
    return std::vector<index_t>(verts.begin(), verts.end());
  };
  auto bc_e = dirichlet_of(mesh_e);
  auto bc_i = dirichlet_of(mesh_i);

  CoupledSystem sys;
  sys.gamma = spec.gamma;
  sys.A1 = block_diag(Ae, Ai, spec.alpha_e, spec.alpha_i);

  std::vector<index_t> mgamma_order;
  {
    // Interface mass assembled on the i-side submesh (conforming copy).
    std::vector<index_t> order_i;
    SparseMatrix Mg = assemble_facet_mass(mesh_i, Mesh::interface_tag,
                                          spec.lumped_mass, order_i);
    sys.M_gamma = Mg;
    mgamma_order = order_i;  // local i-mesh ids, ascending
  }
  const index_t ng = static_cast<index_t>(mgamma_order.size());

  // R v = tau_i v_i - tau_e v_e via the duplicated-DOF correspondence.
  {
    CooBuilder coo(ng, ne + ni);
    for (index_t k = 0; k < ng; ++k) {
      index_t i_local = mgamma_order[k];
      index_t p = parent_i[i_local];
      index_t e_local = local_index(parent_e, p);
      coo.add(k, ne + i_local, 1.0);
      coo.add(k, e_local, -1.0);
    }
    sys.R = coo.finalize();
  }
  sys.A0 = metric_term(sys.R, sys.M_gamma);

  sys.partition.n_total = ne + ni;
  sys.partition.omega = sorted_range(0, ne);
  sys.gamma_dof_of_row.resize(ng);
  for (index_t k = 0; k < ng; ++k) sys.gamma_dof_of_row[k] = ne + mgamma_order[k];
  sys.partition.gamma = sys.gamma_dof_of_row;  // already ascending
  {
    std::set<index_t> gset(sys.partition.gamma.begin(), sys.partition.gamma.end());
    for (index_t v = 0; v < ni; ++v)
      if (!gset.count(ne + v)) sys.partition.upsilon_minus_gamma.push_back(ne + v);
  }
  sys.dof_coords.resize(ne + ni);
  for (index_t v = 0; v < ne; ++v) sys.dof_coords[v] = mesh_e.vertex(v);
  for (index_t v = 0; v < ni; ++v) sys.dof_coords[ne + v] = mesh_i.vertex(v);

  // Ground the system with the homogeneous Dirichlet data.
  std::vector<index_t> bc;
  for (index_t v : bc_e) bc.push_back(v);
  for (index_t v : bc_i) bc.push_back(ne + v);
  std::vector<double> bc_vals(bc.size(), 0.0);
  return apply_dirichlet(std::move(sys), bc, bc_vals);
}

CoupledSystem build_reduced_emi(const ProblemSpec& spec) {
  spec.validate();
  if (spec.dim != 3)
    throw std::invalid_argument("build_reduced_emi: 3D mesh required");
  Mesh mesh = unit_box_mesh(3, spec.n, spec.extents);
  Curve1D curve = embedded_curve(mesh, spec.curve, {spec.rho});
  const index_t nv = mesh.n_vertices();
  const index_t ng = curve.n_vertices();

  CoupledSystem sys;
  sys.gamma = spec.gamma;
  SparseMatrix A3 = assemble_stiffness(mesh, 1.0);
  SparseMatrix A1d = curve_stiffness(curve, spec.alpha_i);
  sys.A1 = block_diag(A3, A1d, spec.alpha_e, 1.0);
  sys.M_gamma = curve_mass(curve, spec.lumped_mass);

  SparseMatrix Pi = spec.coupling == CouplingKind::average
                        ? averaging_operator(mesh, curve, spec.quadrature_points,
                                             &sys.report)
                        : trace_operator(mesh, curve);
  {
    // R = [-Pi, I]
    CooBuilder coo(ng, nv + ng);
    for (index_t k = 0; k < ng; ++k) {
      for (index_t p = Pi.row_offsets[k]; p < Pi.row_offsets[k + 1]; ++p)
        coo.add(k, Pi.col_indices[p], -Pi.values[p]);
      coo.add(k, nv + k, 1.0);
    }
    sys.R = coo.finalize();
  }
  sys.A0 = metric_term(sys.R, sys.M_gamma);

  sys.partition.n_total = nv + ng;
  sys.partition.omega = sorted_range(0, nv);
  sys.partition.gamma = sorted_range(nv, nv + ng);
  sys.gamma_dof_of_row = sys.partition.gamma;
  sys.dof_coords.resize(nv + ng);
  for (index_t v = 0; v < nv; ++v) sys.dof_coords[v] = mesh.vertex(v);
  for (index_t k = 0; k < ng; ++k) sys.dof_coords[nv + k] = curve.vertices[k];
  sys.neumann_kernel = std::vector<double>(nv + ng, 1.0);
  return sys;
}

CoupledSystem build_system(const ProblemSpec& spec) {
  switch (spec.model) {
    case ModelKind::bidomain:
      return build_bidomain(spec);
    case ModelKind::emi:
      return build_emi(spec);
    case ModelKind::reduced_emi:
      return build_reduced_emi(spec);
  }
  throw std::invalid_argument("build_system: unknown model");
}

void eliminate_dirichlet(SparseMatrix& A, std::span<const index_t> indices,
                         std::span<const double> values,
                         std::vector<double>& rhs_correction,
                         std::vector<double>& preserved_diag) {
  std::map<index_t, double> bc;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    auto [it, inserted] = bc.emplace(indices[k], values[k]);
    if (!inserted && it->second != values[k])
      throw std::invalid_argument(
          "eliminate_dirichlet: duplicate index with conflicting value");
  }
  rhs_correction.assign(A.nrows, 0.0);
  preserved_diag.clear();

  SparseMatrix out;
  out.nrows = A.nrows;
  out.ncols = A.ncols;
  out.symmetric = A.symmetric;
  out.row_offsets.push_back(0);
  for (index_t i = 0; i < A.nrows; ++i) {
    bool row_bc = bc.count(i) > 0;
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      index_t j = A.col_indices[k];
      double v = A.values[k];
      if (row_bc) {
        if (j == i) {
          out.col_indices.push_back(j);
          out.values.push_back(v);
        }
        continue;
      }
      auto it = bc.find(j);
      if (it != bc.end()) {
        rhs_correction[i] += v * it->second;
        continue;
      }
      out.col_indices.push_back(j);
      out.values.push_back(v);
    }
    out.row_offsets.push_back(static_cast<index_t>(out.col_indices.size()));
  }
  for (const auto& [i, v] : bc) {
    (void)v;
    preserved_diag.push_back(A.diag(i));
    rhs_correction[i] = 0.0;
  }
  A = std::move(out);
}

CoupledSystem apply_dirichlet(CoupledSystem system, std::span<const index_t> indices,
                              std::span<const double> values) {
  for (index_t i : indices)
    if (i < 0 || i >= system.n_total())
      throw std::invalid_argument("apply_dirichlet: index out of range");
  std::vector<double> correction, diag;
  eliminate_dirichlet(system.A1, indices, values, correction, diag);

  // Drop eliminated columns from the coupling map and rebuild the metric term.
  std::set<index_t> bc(indices.begin(), indices.end());
  bool r_touched = false;
  for (index_t k = 0; k < system.R.nnz(); ++k)
    if (bc.count(system.R.col_indices[k])) r_touched = true;
  if (r_touched) {
    CooBuilder coo(system.R.nrows, system.R.ncols);
    for (index_t r = 0; r < system.R.nrows; ++r)
      for (index_t k = system.R.row_offsets[r]; k < system.R.row_offsets[r + 1]; ++k)
        if (!bc.count(system.R.col_indices[k]))
          coo.add(r, system.R.col_indices[k], system.R.values[k]);
    system.R = coo.finalize();
    system.A0 = matmul(transpose(system.R), matmul(system.M_gamma, system.R));
    system.A0.symmetric = true;
  }

  // Merge with any previously recorded data (sorted by index).
  std::map<index_t, std::pair<double, double>> merged;  // idx -> (value, diag)
  for (std::size_t k = 0; k < system.bc_indices.size(); ++k)
    merged[system.bc_indices[k]] = {system.bc_values[k], system.bc_diag[k]};
  {
    std::map<index_t, double> bcmap;
    for (std::size_t k = 0; k < indices.size(); ++k) bcmap[indices[k]] = values[k];
    std::size_t pos = 0;
    for (const auto& [i, v] : bcmap) merged[i] = {v, diag[pos++]};
  }
  system.bc_indices.clear();
  system.bc_values.clear();
  system.bc_diag.clear();
  for (const auto& [i, vd] : merged) {
    system.bc_indices.push_back(i);
    system.bc_values.push_back(vd.first);
    system.bc_diag.push_back(vd.second);
  }
  if (system.bc_rhs_correction.empty())
    system.bc_rhs_correction.assign(system.n_total(), 0.0);
  for (index_t i = 0; i < system.n_total(); ++i)
    system.bc_rhs_correction[i] += correction[i];
  system.neumann_kernel.reset();
  return system;
}

ProblemSpec problem_spec_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ProblemSpec spec;
  std::string model = j.at("model").get<std::string>();
  if (model == "bidomain")
    spec.model = ModelKind::bidomain;
  else if (model == "emi")
    spec.model = ModelKind::emi;
  else if (model == "reduced_emi")
    spec.model = ModelKind::reduced_emi;
  else
    throw std::invalid_argument("problem_spec_from_json: unknown model " + model);
  spec.dim = j.value("dim", spec.model == ModelKind::reduced_emi ? 3 : 2);
  spec.n = j.value("n", index_t{8});
  spec.alpha_e = j.value("alpha_e", 1.0);
  spec.alpha_i = j.value("alpha_i", 1.0);
  spec.gamma = j.value("gamma", 1.0);
  spec.rho = j.value("rho", 1.0);
  if (j.contains("coupling")) {
    std::string c = j["coupling"].get<std::string>();
    if (c == "average")
      spec.coupling = CouplingKind::average;
    else if (c == "trace")
      spec.coupling = CouplingKind::trace;
    else
      throw std::invalid_argument("problem_spec_from_json: unknown coupling " + c);
  }
  if (j.contains("curve"))
    spec.curve = j["curve"].get<std::string>() == "branched" ? CurveKind::branched
                                                             : CurveKind::straight;
  spec.lumped_mass = j.value("lumped_mass", true);
  spec.quadrature_points = j.value("quadrature_points", 8);
  if (j.contains("extents"))
    for (int d = 0; d < 3; ++d) spec.extents[d] = j["extents"].at(d).get<double>();
  spec.validate();
  return spec;
}

std::string problem_spec_to_json(const ProblemSpec& spec) {
  nlohmann::json j;
  j["model"] = spec.model == ModelKind::bidomain
                   ? "bidomain"
                   : (spec.model == ModelKind::emi ? "emi" : "reduced_emi");
  j["dim"] = spec.dim;
  j["n"] = spec.n;
  j["alpha_e"] = spec.alpha_e;
  j["alpha_i"] = spec.alpha_i;
  j["gamma"] = spec.gamma;
  j["rho"] = spec.rho;
  j["coupling"] = spec.coupling == CouplingKind::average ? "average" : "trace";
  j["curve"] = spec.curve == CurveKind::straight ? "straight" : "branched";
  j["lumped_mass"] = spec.lumped_mass;
  j["quadrature_points"] = spec.quadrature_points;
  j["extents"] = {spec.extents[0], spec.extents[1], spec.extents[2]};
  return j.dump();
}

void export_system(const CoupledSystem& system, const std::string& prefix) {
  write_matrix_market(system.system_matrix(), prefix + "A.mtx");
  write_matrix_market(system.A0, prefix + "A0.mtx");
  write_matrix_market(system.A1, prefix + "A1.mtx");
  write_matrix_market(system.R, prefix + "R.mtx");
}

}  // namespace camg
