#include <doctest.h>

#include <cmath>

#include "camg/assembly.hpp"
#include "camg/dense.hpp"
#include "test_helpers.hpp"

using namespace camg;
using namespace camg::testing;

TEST_CASE("1D stiffness by hand integration") {
  // n=2 on the unit interval, h = 1/2: hat-function integrals give
  // [[2,-2,0],[-2,4,-2],[0,-2,2]].
  Mesh mesh = unit_box_mesh(1, 2);
  auto A = assemble_stiffness(mesh, 1.0);
  CHECK(A.entry(0, 0) == doctest::Approx(2.0));
  CHECK(A.entry(0, 1) == doctest::Approx(-2.0));
  CHECK(A.entry(1, 1) == doctest::Approx(4.0));
  CHECK(A.entry(1, 2) == doctest::Approx(-2.0));
  CHECK(A.entry(2, 2) == doctest::Approx(2.0));
  CHECK(A.entry(0, 2) == 0.0);
}

TEST_CASE("stiffness kernel and homogeneity") {
  for (int dim : {1, 2, 3}) {
    Mesh mesh = unit_box_mesh(dim, 3);
    auto A = assemble_stiffness(mesh, 1.0);
    std::vector<double> ones(mesh.n_vertices(), 1.0);
    for (double v : spmv(A, ones)) CHECK(std::abs(v) < 1e-12);

    auto A2 = assemble_stiffness(mesh, 2.0);
    for (index_t k = 0; k < A.nnz(); ++k)
      CHECK(A2.values[k] == doctest::Approx(2.0 * A.values[k]).epsilon(1e-14));
  }
}

TEST_CASE("mass matrix exact integrals") {
  Mesh mesh = unit_box_mesh(1, 1);  // single element of length 1
  auto M = assemble_mass(mesh, false);
  CHECK(M.entry(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(M.entry(0, 1) == doctest::Approx(1.0 / 6.0));
  auto Ml = assemble_mass(mesh, true);
  CHECK(Ml.entry(0, 0) == doctest::Approx(0.5));
  CHECK(Ml.entry(1, 1) == doctest::Approx(0.5));
  CHECK(Ml.entry(0, 1) == 0.0);

  for (int dim : {1, 2, 3}) {
    Mesh box = unit_box_mesh(dim, 3, {2.0, 1.0, 1.0});
    double want = 2.0;  // box volume
    for (bool lumped : {false, true}) {
      auto Mb = assemble_mass(box, lumped);
      double total = 0.0;
      for (double v : Mb.values) total += v;
      CHECK(total == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("bidomain builder") {
  ProblemSpec spec;
  spec.model = ModelKind::bidomain;
  spec.dim = 2;
  spec.n = 4;
  spec.gamma = 10.0;
  auto sys = build_bidomain(spec);
  const index_t nv = 25;
  CHECK(sys.n_total() == 2 * nv);
  sys.partition.validate();

  // A0 (v, v) = 0 for 20 random v: the coupling kernel.
  for (int trial = 0; trial < 20; ++trial) {
    auto v = random_vector(nv, 40 + trial);
    std::vector<double> vv(2 * nv);
    for (index_t i = 0; i < nv; ++i) vv[i] = vv[nv + i] = v[i];
    for (double r : spmv(sys.A0, vv)) CHECK(std::abs(r) < 1e-12);
  }

  // A0 = R^T M R entrywise.
  auto A0_ref = matmul(transpose(sys.R), matmul(sys.M_gamma, sys.R));
  REQUIRE(A0_ref.nnz() == sys.A0.nnz());
  for (index_t k = 0; k < sys.A0.nnz(); ++k)
    CHECK(sys.A0.values[k] ==
          doctest::Approx(A0_ref.values[k]).epsilon(1e-12));

  // 2178 DOFs at n=32.
  ProblemSpec s32 = spec;
  s32.n = 32;
  CHECK(build_bidomain(s32).n_total() == 2178);

  ProblemSpec bad = spec;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(build_bidomain(bad), std::invalid_argument);
}

TEST_CASE("emi builder") {
  ProblemSpec spec;
  spec.model = ModelKind::emi;
  spec.dim = 2;
  spec.n = 8;
  spec.gamma = 100.0;
  auto sys = build_emi(spec);
  sys.partition.validate();
  CHECK_FALSE(sys.partition.gamma.empty());
  CHECK_FALSE(sys.partition.upsilon_minus_gamma.empty());
  CHECK_FALSE(sys.bc_indices.empty());

  // v with equal traces on both interface copies lies in the kernel of A0.
  std::vector<double> v = random_vector(sys.n_total(), 99);
  for (index_t k = 0; k < sys.R.nrows; ++k) {
    // Row k couples the two copies with +-1; set both to the same value.
    index_t gdof = sys.gamma_dof_of_row[k];
    for (index_t e = sys.R.row_offsets[k]; e < sys.R.row_offsets[k + 1]; ++e)
      v[sys.R.col_indices[e]] = v[gdof];
  }
  for (double r : spmv(sys.A0, v)) CHECK(std::abs(r) < 1e-12);

  // Interface mass total = |Gamma| = 1 on the split unit square.
  double total = 0.0;
  for (double m : sys.M_gamma.values) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // Grounded by Dirichlet: the assembled system must be SPD.
  auto A = sys.system_matrix();
  for (int trial = 0; trial < 10; ++trial) {
    auto w = random_vector(sys.n_total(), 7 + trial);
    CHECK(quadratic_form(A, w) > 0.0);
  }
  CHECK_FALSE(sys.neumann_kernel.has_value());
}

TEST_CASE("emi DOF counts match the two-sided construction") {
  // 2(n+1)(n/2+1) duplicated-interface DOFs; n=64 gives the 4290 figure.
  ProblemSpec spec;
  spec.model = ModelKind::emi;
  spec.dim = 2;
  spec.gamma = 1.0;
  for (index_t n : {8, 64}) {
    spec.n = n;
    auto sys = build_emi(spec);
    CHECK(sys.n_total() == 2 * (n + 1) * (n / 2 + 1));
  }
  spec.n = 64;
  CHECK(build_emi(spec).n_total() == 4290);
}

TEST_CASE("reduced emi builder with averaging") {
  ProblemSpec spec;
  spec.model = ModelKind::reduced_emi;
  spec.dim = 3;
  spec.n = 4;
  spec.gamma = 1e4;
  spec.rho = 0.2;
  spec.alpha_e = 3.0;
  spec.alpha_i = 7.0;
  auto sys = build_reduced_emi(spec);
  sys.partition.validate();
  const index_t nv = 125, ng = 5;
  CHECK(sys.n_total() == nv + ng);

  // Averaging of a constant field is the constant.
  std::vector<double> c(sys.n_total(), 3.25);
  for (double r : spmv(sys.A0, c)) CHECK(std::abs(r) < 1e-10);

  // Kernel: (v_omega, Pi v_omega) for random v_omega.
  // Recover Pi rows from R: R = [-Pi, I].
  for (int trial = 0; trial < 5; ++trial) {
    auto vo = random_vector(nv, 11 + trial);
    std::vector<double> v(sys.n_total(), 0.0);
    for (index_t i = 0; i < nv; ++i) v[i] = vo[i];
    for (index_t k = 0; k < sys.R.nrows; ++k) {
      double pi_v = 0.0;
      for (index_t e = sys.R.row_offsets[k]; e < sys.R.row_offsets[k + 1]; ++e) {
        index_t col = sys.R.col_indices[e];
        if (col < nv) pi_v += -sys.R.values[e] * vo[col];
      }
      v[nv + k] = pi_v;
    }
    double scale = 0.0;
    for (double m : sys.A0.values) scale = std::max(scale, std::abs(m));
    for (double r : spmv(sys.A0, v)) CHECK(std::abs(r) <= 1e-12 * scale * 100);
  }

  // rho stored per curve vertex.
  ProblemSpec s2 = spec;
  s2.coupling = CouplingKind::trace;
  auto sys_trace = build_reduced_emi(s2);
  CHECK(sys_trace.n_total() == nv + ng);
  // Trace rows average the vertices of one containing cell.
  for (index_t k = 0; k < sys_trace.R.nrows; ++k) {
    double sum = 0.0;
    index_t count = 0;
    for (index_t e = sys_trace.R.row_offsets[k]; e < sys_trace.R.row_offsets[k + 1];
         ++e) {
      if (sys_trace.R.col_indices[e] < nv) {
        sum += -sys_trace.R.values[e];
        ++count;
      }
    }
    CHECK(count == 4);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("averaging operator clamps points that leave the box") {
  Mesh mesh = unit_box_mesh(3, 4);
  Curve1D curve = embedded_curve(mesh, CurveKind::straight, {5.0});
  BuildReport report;
  auto Pi = averaging_operator(mesh, curve, 8, &report);
  CHECK(report.clamped_quadrature_points > 0);
  // Rows still sum to one (clamping preserves constants).
  for (index_t k = 0; k < Pi.nrows; ++k) {
    double s = 0.0;
    for (index_t e = Pi.row_offsets[k]; e < Pi.row_offsets[k + 1]; ++e)
      s += Pi.values[e];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dirichlet elimination") {
  // 1D Laplacian with u(0)=0, u(1)=1, f=0: solution is linear, u_i = i*h.
  Mesh mesh = unit_box_mesh(1, 8);
  auto A = assemble_stiffness(mesh, 1.0);
  A.symmetric = true;
  std::vector<double> correction, diag;
  std::vector<index_t> idx{0, 8};
  std::vector<double> vals{0.0, 1.0};
  eliminate_dirichlet(A, idx, vals, correction, diag);
  CHECK(A.symmetric);
  CHECK(is_symmetric(A));

  std::vector<double> f(9, 0.0);
  for (index_t i = 0; i < 9; ++i) f[i] -= correction[i];
  f[0] = diag[0] * 0.0;
  f[8] = diag[1] * 1.0;
  auto x = dense_solve(to_dense(A), f);
  for (index_t i = 0; i < 9; ++i)
    CHECK(x[i] == doctest::Approx(i / 8.0).epsilon(1e-10));

  // Eliminating every DOF leaves a pure diagonal.
  auto B = assemble_stiffness(mesh, 1.0);
  std::vector<index_t> all(9);
  std::vector<double> bvals(9);
  for (index_t i = 0; i < 9; ++i) {
    all[i] = i;
    bvals[i] = i * 1.0;
  }
  eliminate_dirichlet(B, all, bvals, correction, diag);
  CHECK(B.nnz() == 9);
  std::vector<double> g(9);
  for (index_t i = 0; i < 9; ++i) g[i] = diag[i] * bvals[i];
  auto y = dense_solve(to_dense(B), g);
  for (index_t i = 0; i < 9; ++i) CHECK(y[i] == doctest::Approx(bvals[i]));

  // Conflicting duplicate values are rejected.
  auto C = assemble_stiffness(mesh, 1.0);
  std::vector<index_t> dup{0, 0};
  std::vector<double> dupv{0.0, 1.0};
  CHECK_THROWS_AS(eliminate_dirichlet(C, dup, dupv, correction, diag),
                  std::invalid_argument);
}

TEST_CASE("apply_dirichlet on a coupled system") {
  ProblemSpec spec;
  spec.model = ModelKind::bidomain;
  spec.dim = 1;
  spec.n = 4;
  spec.gamma = 5.0;
  auto sys = build_bidomain(spec);
  std::vector<index_t> idx{0};
  std::vector<double> vals{2.0};
  auto grounded = apply_dirichlet(sys, idx, vals);
  CHECK_FALSE(grounded.neumann_kernel.has_value());
  CHECK(grounded.A1.symmetric);
  CHECK(is_symmetric(grounded.A1));

  // The constrained RHS reproduces the boundary value through a solve.
  auto A = grounded.system_matrix();
  std::vector<double> f(grounded.n_total(), 1.0);
  grounded.constrain_rhs(f);
  auto x = dense_solve(to_dense(A), f);
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("problem spec json round trip") {
  ProblemSpec spec;
  spec.model = ModelKind::reduced_emi;
  spec.dim = 3;
  spec.n = 4;
  spec.alpha_e = 3.0;
  spec.alpha_i = 7.0;
  spec.gamma = 1e6;
  spec.rho = 0.2;
  spec.coupling = CouplingKind::trace;
  auto back = problem_spec_from_json(problem_spec_to_json(spec));
  CHECK(back.model == spec.model);
  CHECK(back.n == spec.n);
  CHECK(back.rho == spec.rho);
  CHECK(back.coupling == spec.coupling);
  CHECK(back.gamma == spec.gamma);
}
