#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "camg/decomposition.hpp"
#include "camg/dense.hpp"
#include "test_helpers.hpp"

using namespace camg;
using namespace camg::testing;

namespace {

ProblemSpec bidomain_spec(index_t n, double gamma = 10.0) {
  ProblemSpec spec;
  spec.model = ModelKind::bidomain;
  spec.dim = 2;
  spec.n = n;
  spec.gamma = gamma;
  return spec;
}

}  // namespace

TEST_CASE("neighborhoods: bidomain pairs") {
  auto sys = build_bidomain(bidomain_spec(3));
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  const index_t nv = 16;
  REQUIRE(nb.n_owners() == nv);
  for (index_t p = 0; p < nb.n_owners(); ++p) {
    auto list = nb.of(p);
    REQUIRE(list.size() == 1);
    CHECK(list[0] == nb.owner_dofs[p] + nv);  // the paired copy
  }
}

TEST_CASE("neighborhoods: reduced emi trace from element incidence") {
  ProblemSpec spec;
  spec.model = ModelKind::reduced_emi;
  spec.dim = 3;
  spec.n = 4;
  spec.gamma = 100.0;
  spec.coupling = CouplingKind::trace;
  auto sys = build_reduced_emi(spec);
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  const index_t nv = 125;

  // Independent fixture: the trace row of curve vertex k averages the 3D
  // vertices of the lowest-index cell containing it.
  Mesh mesh = unit_box_mesh(3, 4);
  Curve1D curve = embedded_curve(mesh, CurveKind::straight, {1.0});
  std::vector<std::vector<index_t>> expected(nv);
  for (index_t k = 0; k < curve.n_vertices(); ++k) {
    index_t v = curve.mesh_vertex[k];
    index_t cell = -1;
    for (index_t c = 0; c < mesh.n_cells() && cell < 0; ++c) {
      auto verts = mesh.cell(c);
      if (std::find(verts.begin(), verts.end(), v) != verts.end()) cell = c;
    }
    for (index_t w : mesh.cell(cell)) expected[w].push_back(nv + k);
  }
  index_t coupled = 0;
  for (index_t p = 0; p < nb.n_owners(); ++p) {
    index_t j = nb.owner_dofs[p];
    auto list = nb.of(p);
    if (j < nv) {
      std::vector<index_t> want = expected[j];
      std::sort(want.begin(), want.end());
      CHECK(std::vector<index_t>(list.begin(), list.end()) == want);
      if (!list.empty()) ++coupled;
    }
  }
  CHECK(coupled > 0);
  // Interior DOFs untouched by the coupling have empty neighborhoods.
  CHECK(coupled < nv);
}

TEST_CASE("patches: bidomain disjoint pairs with exact frames") {
  auto sys = build_bidomain(bidomain_spec(4));
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  auto dec = build_patches(nb, sys);
  const index_t nv = 25;
  REQUIRE(dec.n_patches() == nv);
  for (index_t p = 0; p < dec.n_patches(); ++p) {
    REQUIRE(dec.patches[p].size() == 2);
    CHECK(dec.patches[p][1] == dec.patches[p][0] + nv);
    REQUIRE(dec.kernel_frame[p].size() == 2);
    CHECK(dec.kernel_frame[p][0] == 1.0);
    CHECK(dec.kernel_frame[p][1] == 1.0);  // sigma = identity
  }
  for (index_t i = 0; i < sys.n_total(); ++i) CHECK(dec.overlap_count[i] == 1);
}

TEST_CASE("patches: emi interface pairs and interior singletons") {
  ProblemSpec spec;
  spec.model = ModelKind::emi;
  spec.dim = 2;
  spec.n = 4;
  spec.gamma = 10.0;
  auto sys = build_emi(spec);
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  auto dec = build_patches(nb, sys);

  std::set<index_t> gamma(sys.partition.gamma.begin(), sys.partition.gamma.end());
  index_t pair_patches = 0, singletons = 0;
  for (index_t p = 0; p < dec.n_patches(); ++p) {
    if (dec.patches[p].size() == 2) {
      ++pair_patches;
      CHECK(gamma.count(dec.patches[p][1]) == 1);
      // Trace-difference kernel: equal values on both copies.
      CHECK(dec.kernel_frame[p] == std::vector<double>{1.0, 1.0});
    } else {
      CHECK(dec.patches[p].size() == 1);
      ++singletons;
    }
  }
  CHECK(pair_patches == static_cast<index_t>(gamma.size()));
  CHECK(singletons > 0);
  // Coverage of every DOF.
  for (index_t i = 0; i < sys.n_total(); ++i) CHECK(dec.overlap_count[i] >= 1);
}

TEST_CASE("patch overlap bounded by R column degree") {
  ProblemSpec spec;
  spec.model = ModelKind::reduced_emi;
  spec.dim = 3;
  spec.n = 4;
  spec.gamma = 5.0;
  spec.rho = 0.4;
  auto sys = build_reduced_emi(spec);
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  auto dec = build_patches(nb, sys);
  SparseMatrix Rt = transpose(sys.R);
  index_t max_col_nnz = Rt.max_row_nnz();
  for (index_t i = 0; i < sys.n_total(); ++i)
    CHECK(dec.overlap_count[i] <= max_col_nnz + 1);
}

TEST_CASE("partition of unity is exact") {
  auto sys = build_bidomain(bidomain_spec(4));
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  auto dec = build_patches(nb, sys);
  auto v = random_vector(sys.n_total(), 2024);
  auto w = dec.pou_sum(v);
  for (index_t i = 0; i < sys.n_total(); ++i) CHECK(w[i] == v[i]);  // bitwise

  // Rational weights per DOF sum to one: count/count.
  for (index_t i = 0; i < sys.n_total(); ++i) CHECK(dec.overlap_count[i] >= 1);
}

TEST_CASE("metric map pairs coinciding coordinates") {
  auto sys = build_bidomain(bidomain_spec(3));
  auto L = metric_map(sys);
  const index_t nv = 16;
  REQUIRE(L.size() == static_cast<std::size_t>(nv));
  for (index_t k = 0; k < nv; ++k) CHECK(L[k] == k);  // distance-0 partner

  // Hop-distance fallback when no coordinates are stored.
  CoupledSystem stripped = sys;
  stripped.dof_coords.clear();
  auto Lh = metric_map(stripped);
  for (index_t k = 0; k < nv; ++k) {
    // The gamma DOF nv+k connects to omega DOF k through A0's pattern.
    CHECK(Lh[k] == k);
  }
}

TEST_CASE("aggregate: path graph pairwise matching") {
  auto L = path_laplacian(8);
  auto agg = aggregate(strength_graph(L), nullptr, 2);
  CHECK(agg.n_agg == 4);
  auto members = agg.members();
  for (const auto& m : members) CHECK(m.size() == 2);
  // Deterministic greedy pairing along the path.
  CHECK(agg.aggregate_of[0] == agg.aggregate_of[1]);
  CHECK(agg.aggregate_of[2] == agg.aggregate_of[3]);
}

TEST_CASE("aggregate: constraint seeds bidomain pairs") {
  auto sys = build_bidomain(bidomain_spec(4, 1.0));
  auto constraint = make_constraint(sys);
  auto agg = aggregate(strength_graph(sys.A1), &constraint, 8);
  const index_t nv = 25;
  // Every seed pair sits inside one aggregate.
  for (index_t k = 0; k < nv; ++k)
    CHECK(agg.aggregate_of[k] == agg.aggregate_of[nv + k]);
  for (auto& m : agg.members()) CHECK(m.size() <= 8);

  // Aggregates are connected in the graph of the full matrix A.
  auto g = graph_of(sys.system_matrix());
  for (auto& m : agg.members()) CHECK(g.connected(m));

  // The metric form vanishes on the coarse space: aggregate indicators are
  // kernel vectors of A0.
  auto members = agg.members();
  for (index_t a = 0; a < agg.n_agg; ++a) {
    std::vector<double> ind(sys.n_total(), 0.0);
    for (index_t i : members[a]) ind[i] = 1.0;
    for (double r : spmv(sys.A0, ind)) CHECK(std::abs(r) < 1e-12);
  }
}

TEST_CASE("redefine_a0") {
  auto sys = build_bidomain(bidomain_spec(3, 2.0));
  auto L = metric_map(sys);
  auto A0_tilde = redefine_a0(sys, L);
  // Bidomain with the pairing map reproduces A0 exactly (lumped mass).
  REQUIRE(A0_tilde.nnz() == sys.A0.nnz());
  for (index_t k = 0; k < sys.A0.nnz(); ++k) {
    CHECK(A0_tilde.col_indices[k] == sys.A0.col_indices[k]);
    CHECK(A0_tilde.values[k] == doctest::Approx(sys.A0.values[k]).epsilon(1e-14));
  }

  // 1_{L~(j)} spans the kernel.
  const index_t nv = 16;
  for (index_t j = 0; j < nv; ++j) {
    std::vector<double> ind(sys.n_total(), 0.0);
    ind[j] = 1.0;
    ind[nv + j] = 1.0;
    for (double r : spmv(A0_tilde, ind)) CHECK(std::abs(r) < 1e-14);
  }
}

TEST_CASE("redefine_a0 matches a single-vertex trace construction") {
  // Direct construction: R couples each interface DOF to exactly one owner
  // with unit weights, so the redefined form has the same pattern and values
  // as R^T M R.
  const index_t n_omega = 4, n_gamma = 2;
  CoupledSystem sys;
  sys.gamma = 1.0;
  {
    CooBuilder coo(n_gamma, n_omega + n_gamma);
    coo.add(0, 1, -1.0);
    coo.add(0, n_omega + 0, 1.0);
    coo.add(1, 3, -1.0);
    coo.add(1, n_omega + 1, 1.0);
    sys.R = coo.finalize();
  }
  {
    CooBuilder coo(n_gamma, n_gamma);
    coo.add(0, 0, 0.5);
    coo.add(1, 1, 0.25);
    sys.M_gamma = coo.finalize(true);
  }
  sys.A0 = matmul(transpose(sys.R), matmul(sys.M_gamma, sys.R));
  sys.A1 = SparseMatrix::identity(n_omega + n_gamma);
  sys.partition.n_total = n_omega + n_gamma;
  sys.partition.omega = {0, 1, 2, 3};
  sys.partition.gamma = {4, 5};
  sys.gamma_dof_of_row = {4, 5};
  std::vector<index_t> L{1, 3};
  auto A0_tilde = redefine_a0(sys, L);
  REQUIRE(A0_tilde.nnz() == sys.A0.nnz());
  for (index_t k = 0; k < sys.A0.nnz(); ++k) {
    CHECK(A0_tilde.col_indices[k] == sys.A0.col_indices[k]);
    CHECK(A0_tilde.values[k] == doctest::Approx(sys.A0.values[k]).epsilon(1e-14));
  }
}

TEST_CASE("verify_kernel_condition: bidomain passes with dim 25") {
  auto sys = build_bidomain(bidomain_spec(4));
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  auto dec = build_patches(nb, sys);
  auto constraint = make_constraint(sys);
  auto agg = aggregate(strength_graph(sys.A1), &constraint, 8);
  auto report = verify_kernel_condition(dec, agg, sys.A0);
  CHECK(report.kernel_dim == 25);
  CHECK(report.pass);
  CHECK(report.max_residual <= 1e-8);
}

TEST_CASE("verify_kernel_condition: pointwise decomposition fails on bidomain") {
  auto sys = build_bidomain(bidomain_spec(4));
  auto dec = singleton_decomposition(sys);
  auto agg = aggregate(strength_graph(sys.system_matrix()), nullptr, 8);
  auto report = verify_kernel_condition(dec, agg, sys.A0);
  CHECK_FALSE(report.pass);
}

TEST_CASE("verify_kernel_condition: zero metric term passes trivially") {
  auto sys = build_bidomain(bidomain_spec(2));
  SparseMatrix zero;
  zero.nrows = zero.ncols = sys.n_total();
  zero.row_offsets.assign(sys.n_total() + 1, 0);
  zero.symmetric = true;
  auto dec = singleton_decomposition(sys);
  // With A0 = 0 every singleton carries a frame.
  for (auto& f : dec.kernel_frame) f = {1.0};
  auto agg = aggregate(strength_graph(sys.system_matrix()), nullptr, 8);
  auto report = verify_kernel_condition(dec, agg, zero);
  CHECK(report.pass);
  CHECK(report.kernel_dim == sys.n_total());
}

TEST_CASE("decomposition and aggregation json dumps") {
  auto sys = build_bidomain(bidomain_spec(2));
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  auto dec = build_patches(nb, sys);
  auto text = decomposition_to_json(dec);
  CHECK(text.find("patches") != std::string::npos);
  auto agg = aggregate(strength_graph(sys.system_matrix()), nullptr, 4);
  CHECK(aggregation_to_json(agg).find("n_agg") != std::string::npos);
}
