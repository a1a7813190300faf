#include <doctest.h>

#include <cmath>

#include "camg/amg.hpp"
#include "camg/dense.hpp"
#include "camg/graph.hpp"
#include "camg/krylov.hpp"
#include "camg/smoothers.hpp"
#include "test_helpers.hpp"

// Cross-module property suites at desk scale.

using namespace camg;
using namespace camg::testing;

namespace {

CoupledSystem grounded_bidomain(index_t n, double gamma) {
  ProblemSpec spec;
  spec.model = ModelKind::bidomain;
  spec.dim = 2;
  spec.n = n;
  spec.gamma = gamma;
  auto sys = build_bidomain(spec);
  std::vector<index_t> idx{0};
  std::vector<double> vals{0.0};
  return apply_dirichlet(std::move(sys), idx, vals);
}

DenseMatrix symmetrized(DenseMatrix M) {
  for (index_t i = 0; i < M.nrows; ++i)
    for (index_t j = i + 1; j < M.ncols; ++j) {
      double v = 0.5 * (M(i, j) + M(j, i));
      M(i, j) = M(j, i) = v;
    }
  return M;
}

}  // namespace

TEST_CASE("graph Poincare inequality on every hierarchy aggregate") {
  // For each aggregate of a built level: the deviation-from-best-constant in
  // the diagonal norm is bounded by c_a times the local energy, with c_a from
  // the dense eigen-oracle. Verified by sampling.
  ProblemSpec spec;
  spec.model = ModelKind::emi;
  spec.dim = 2;
  spec.n = 8;
  spec.gamma = 1e4;
  auto sys = build_emi(spec);
  auto A = sys.system_matrix();
  auto agg = aggregate(strength_graph(A), nullptr, 8);
  auto members = agg.members();
  auto g = graph_of(A);
  auto d = diagonal(A);

  for (index_t a = 0; a < agg.n_agg; ++a) {
    const auto& m = members[a];
    if (m.size() < 2) continue;
    CHECK(g.connected(m));
    const index_t sz = static_cast<index_t>(m.size());
    // Deviation form J = D - D 1 1^T D / (1^T D 1), local energy = A[m, m].
    DenseMatrix J(sz, sz), Aloc(sz, sz);
    double dsum = 0.0;
    for (index_t p = 0; p < sz; ++p) dsum += d[m[p]];
    for (index_t p = 0; p < sz; ++p)
      for (index_t q = 0; q < sz; ++q) {
        J(p, q) = (p == q ? d[m[p]] : 0.0) - d[m[p]] * d[m[q]] / dsum;
        Aloc(p, q) = A.entry(m[p], m[q]);
      }
    auto eigs = dense_generalized_eigs(J, symmetrized(Aloc));
    double c_a = eigs.back();
    CHECK(c_a >= 0.0);
    // Sampled inequality: min_c ||v - c 1||_D^2 <= c_a ||v||_A,local^2.
    for (int trial = 0; trial < 5; ++trial) {
      auto v = random_vector(sz, 500 + 10 * a + trial);
      double jv = 0.0, av = 0.0;
      for (index_t p = 0; p < sz; ++p)
        for (index_t q = 0; q < sz; ++q) {
          jv += v[p] * J(p, q) * v[q];
          av += v[p] * Aloc(p, q) * v[q];
        }
      CHECK(jv <= c_a * av * (1.0 + 1e-8) + 1e-12);
    }
  }
}

TEST_CASE("additive and multiplicative Schwarz norms are equivalent") {
  // 1/4 v' S_add^-1 v <= v' S_mult^-1 v <= c v' S_add^-1 v with c bounded by
  // the patch intersection degree.
  auto sys = grounded_bidomain(4, 1e4);
  auto A = sys.system_matrix();
  auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
  auto dec = build_patches(nb, sys);

  SmootherConfig add;
  add.kind = SmootherKind::schwarz_additive;
  add.damping = 1.0;  // undamped operator sum for the norm comparison
  add.patches = &dec;
  SmootherConfig mult;
  mult.kind = SmootherKind::schwarz_multiplicative_sym;
  mult.patches = &dec;

  auto S_add = symmetrized(smoother_as_operator(add, A));
  auto S_mult = symmetrized(smoother_as_operator(mult, A));
  auto S_add_inv = symmetrized(dense_inverse(S_add));
  auto S_mult_inv = symmetrized(dense_inverse(S_mult));

  // Patch intersection degree: disjoint pairs here, so c is small; measure
  // and record the constant.
  double c_upper = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto v = random_vector(A.nrows, 900 + trial);
    double qa = 0.0, qm = 0.0;
    for (index_t i = 0; i < A.nrows; ++i)
      for (index_t j = 0; j < A.nrows; ++j) {
        qa += v[i] * S_add_inv(i, j) * v[j];
        qm += v[i] * S_mult_inv(i, j) * v[j];
      }
    CHECK(0.25 * qa <= qm * (1.0 + 1e-10));
    c_upper = std::max(c_upper, qm / qa);
  }
  // Intersection degree of disjoint patches is 1; the sweep visits each patch
  // twice, so a small constant must cover the upper bound.
  CHECK(c_upper <= 4.0);
}

TEST_CASE("weak approximation: smoother-norm distance to the coarse average") {
  // ||v - v_c||_{S_mult^-1}^2 <= C ||v||_A^2 with C recorded per gamma and
  // drifting by < 20% across the sweep.
  std::vector<double> constants;
  for (double gamma : {1.0, 1e4, 1e8}) {
    auto sys = grounded_bidomain(4, gamma);
    auto A = sys.system_matrix();
    auto nb = build_neighborhoods(sys.R, sys.partition, sys.gamma_dof_of_row);
    auto dec = build_patches(nb, sys);
    auto constraint = make_constraint(sys);
    auto agg = aggregate(strength_graph(sys.A1), &constraint, 8);

    SmootherConfig mult;
    mult.kind = SmootherKind::schwarz_multiplicative_sym;
    mult.patches = &dec;
    auto S_mult_inv = symmetrized(dense_inverse(symmetrized(smoother_as_operator(mult, A))));

    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      auto v = random_vector(A.nrows, 7000 + trial);
      auto vc = agg.coarse_average(v);
      std::vector<double> w(A.nrows);
      for (index_t i = 0; i < A.nrows; ++i) w[i] = v[i] - vc[i];
      double num = 0.0;
      for (index_t i = 0; i < A.nrows; ++i)
        for (index_t j = 0; j < A.nrows; ++j) num += w[i] * S_mult_inv(i, j) * w[j];
      double den = quadratic_form(A, v);
      worst = std::max(worst, num / den);
    }
    constants.push_back(worst);
  }
  double lo = *std::min_element(constants.begin(), constants.end());
  double hi = *std::max_element(constants.begin(), constants.end());
  CHECK(hi / lo - 1.0 < 0.20);
}

TEST_CASE("coarse stability: aggregation average bounded by the energy norm") {
  auto sys = grounded_bidomain(4, 1e4);
  auto A = sys.system_matrix();
  auto A1 = sys.A1;
  auto constraint = make_constraint(sys);
  auto agg = aggregate(strength_graph(sys.A1), &constraint, 8);
  auto members = agg.members();
  auto d1 = diagonal(A1);

  // Per-aggregate Poincare constants from the eigen-oracle, with the full-A
  // local energy (seed pairs couple through the metric term only).
  double c_max = 0.0;
  auto d = diagonal(A);
  for (const auto& m : members) {
    if (m.size() < 2) continue;
    const index_t sz = static_cast<index_t>(m.size());
    DenseMatrix J(sz, sz), Aloc(sz, sz);
    double dsum = 0.0;
    for (index_t p = 0; p < sz; ++p) dsum += d[m[p]];
    for (index_t p = 0; p < sz; ++p)
      for (index_t q = 0; q < sz; ++q) {
        J(p, q) = (p == q ? d[m[p]] : 0.0) - d[m[p]] * d[m[q]] / dsum;
        Aloc(p, q) = A.entry(m[p], m[q]);
      }
    auto eigs = dense_generalized_eigs(J, symmetrized(Aloc));
    c_max = std::max(c_max, eigs.back());
  }
  CHECK(c_max > 0.0);

  // Measured ratio ||v - v_c||_{D}^2 / ||v||_{A}^2 <= c_max on 50 random v.
  for (int trial = 0; trial < 50; ++trial) {
    auto v = random_vector(sys.n_total(), 3000 + trial);
    auto vc = agg.coarse_average(v);
    double dev = 0.0;
    for (index_t i = 0; i < sys.n_total(); ++i)
      dev += d[i] * (v[i] - vc[i]) * (v[i] - vc[i]);
    double energy = quadratic_form(A, v);
    CHECK(dev <= c_max * energy * (1.0 + 1e-8));
  }
}

TEST_CASE("graph-form equivalence of assembled elliptic blocks") {
  // Generalized eigenvalues of (A1 block, graph Laplacian) stay in a fixed
  // interval across refinements (within 10% between levels).
  std::vector<double> lo_ratio, hi_ratio;
  for (index_t n : {4, 8, 16}) {
    Mesh mesh = unit_box_mesh(2, n);
    auto A = assemble_stiffness(mesh, 1.0);
    std::vector<double> kappa(mesh.n_cells(), 1.0);
    auto L = to_graph_laplacian(A, mesh, kappa);
    std::vector<std::vector<double>> kernel{std::vector<double>(mesh.n_vertices(), 1.0)};
    auto eigs = dense_generalized_eigs_deflated(to_dense(A), to_dense(L), kernel);
    lo_ratio.push_back(eigs.front());
    hi_ratio.push_back(eigs.back());
  }
  for (std::size_t l = 1; l < lo_ratio.size(); ++l) {
    CHECK(std::abs(lo_ratio[l] / lo_ratio[l - 1] - 1.0) < 0.10);
    CHECK(std::abs(hi_ratio[l] / hi_ratio[l - 1] - 1.0) < 0.10);
  }
}

TEST_CASE("interface restriction is bounded in the field norm") {
  // Rayleigh quotient of (sigma^T M_G sigma) against (A1 + M) on the
  // restricted block stays bounded across refinements.
  std::vector<double> lmax;
  for (index_t n : {8, 16, 32}) {
    ProblemSpec spec;
    spec.model = ModelKind::emi;
    spec.dim = 2;
    spec.n = n;
    spec.gamma = 1.0;
    auto sys = build_emi(spec);

    // Omega block = extracellular side; assemble its mass for the H1 norm.
    Mesh split = split_box_mesh(2, n);
    auto [mesh_e, parent_e] = extract_submesh(split, cell_tag_extra);
    auto Me = assemble_mass(mesh_e, true);
    const index_t ne = mesh_e.n_vertices();

    // sigma^T M_G sigma on the omega block: strip the gamma columns from R.
    CooBuilder sig(sys.R.nrows, ne);
    for (index_t k = 0; k < sys.R.nrows; ++k)
      for (index_t e = sys.R.row_offsets[k]; e < sys.R.row_offsets[k + 1]; ++e)
        if (sys.R.col_indices[e] < ne) sig.add(k, sys.R.col_indices[e], sys.R.values[e]);
    auto sigma = sig.finalize();
    auto StMS = matmul(transpose(sigma), matmul(sys.M_gamma, sigma));

    CooBuilder h1(ne, ne);
    for (index_t i = 0; i < ne; ++i) {
      for (index_t k = sys.A1.row_offsets[i]; k < sys.A1.row_offsets[i + 1]; ++k)
        if (sys.A1.col_indices[k] < ne) h1.add(i, sys.A1.col_indices[k], sys.A1.values[k]);
      h1.add(i, i, 0.0);
    }
    auto H = add(h1.finalize(true), Me);
    DenseMatrix Sd = to_dense(StMS);
    Sd.nrows = Sd.ncols = ne;  // already ne x ne
    auto eigs = dense_generalized_eigs(symmetrized(to_dense(StMS)), symmetrized(to_dense(H)));
    lmax.push_back(eigs.back());
  }
  CHECK(lmax[1] <= 1.3 * lmax[0] + 1e-12);
  CHECK(lmax[2] <= 1.3 * lmax[1] + 1e-12);
}

TEST_CASE("metric perturbation bounds: A1 <= A <= (1 + c gamma) A1") {
  for (double gamma : {1.0, 1e4}) {
    ProblemSpec spec;
    spec.model = ModelKind::emi;
    spec.dim = 2;
    spec.n = 8;
    spec.gamma = gamma;
    auto sys = build_emi(spec);
    auto A = sys.system_matrix();
    double c_est = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      auto v = random_vector(sys.n_total(), 600 + trial);
      double a = quadratic_form(A, v);
      double a1 = quadratic_form(sys.A1, v);
      CHECK(a >= a1 * (1.0 - 1e-12));
      c_est = std::max(c_est, (a / a1 - 1.0) / gamma);
    }
    // The sampled c stays of one scale across the sweep: bounded by the
    // gamma-free Rayleigh bound of A0 against A1.
    CHECK(c_est > 0.0);
    CHECK(c_est < 1e3);
  }
}

TEST_CASE("bitwise reproducible solves under a fixed setup") {
  ProblemSpec spec;
  spec.model = ModelKind::emi;
  spec.dim = 2;
  spec.n = 8;
  spec.gamma = 1e6;
  auto sys = build_emi(spec);
  HierarchyOptions opt;
  auto run = [&]() {
    Hierarchy h = build_hierarchy(sys, opt);
    auto A = sys.system_matrix();
    std::vector<double> f(sys.n_total(), 1.0);
    sys.constrain_rhs(f);
    LinearOperator Aop = as_operator(A);
    LinearOperator Bop{A.nrows, [&](std::span<const double> b, std::span<double> x) {
                         cycle(h, b, x);
                       }};
    PcgOptions popt;
    popt.tol = 1e-10;
    return pcg(Aop, Bop, f, popt).second;
  };
  auto r1 = run();
  auto r2 = run();
  CHECK(r1.iterations == r2.iterations);
  REQUIRE(r1.residual_history.size() == r2.residual_history.size());
  for (std::size_t i = 0; i < r1.residual_history.size(); ++i)
    CHECK(r1.residual_history[i] == r2.residual_history[i]);
}
