#include "camg/amg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace camg {

ProlongationKind prolongation_from_string(const std::string& name) {
  if (name == "ua") return ProlongationKind::ua;
  if (name == "sa") return ProlongationKind::sa;
  if (name == "special") return ProlongationKind::special;
  throw std::invalid_argument("unknown prolongation kind: " + name);
}

std::string to_string(ProlongationKind kind) {
  switch (kind) {
    case ProlongationKind::ua: return "ua";
    case ProlongationKind::sa: return "sa";
    case ProlongationKind::special: return "special";
  }
  return "?";
}

SparseMatrix ua_prolongation(const Aggregation& agg) {
  const index_t n = static_cast<index_t>(agg.aggregate_of.size());
  if (n == 0 || agg.n_agg == 0)
    throw std::invalid_argument("ua_prolongation: empty aggregation");
  SparseMatrix P;
  P.nrows = n;
  P.ncols = agg.n_agg;
  P.row_offsets.resize(n + 1);
  P.col_indices.resize(n);
  P.values.assign(n, 1.0);
  for (index_t i = 0; i <= n; ++i) P.row_offsets[i] = i;
  for (index_t i = 0; i < n; ++i) P.col_indices[i] = agg.aggregate_of[i];
  return P;
}

double sa_default_omega(const SparseMatrix& A) {
  auto d = diagonal(A);
  std::vector<double> v(A.nrows);
  // Deterministic start vector.
  for (index_t i = 0; i < A.nrows; ++i)
    v[i] = 1.0 + 0.5 * ((i * 2654435761u) % 1024) / 1024.0;
  double rho = 1.0;
  std::vector<double> w(A.nrows);
  for (int it = 0; it < 10; ++it) {
    spmv(A, v, w);
    for (index_t i = 0; i < A.nrows; ++i) w[i] /= d[i];
    double nw = norm2(w);
    if (nw == 0.0) break;
    rho = nw / norm2(v);
    for (index_t i = 0; i < A.nrows; ++i) v[i] = w[i] / nw;
  }
  return (2.0 / 3.0) * (2.0 / rho);
}

SparseMatrix sa_prolongation(const SparseMatrix& P_tent, const SparseMatrix& A,
                             double omega) {
  if (omega == 0.0) return P_tent;
  auto d = diagonal(A);
  // S = I - omega D^{-1} A
  SparseMatrix S = A;
  for (index_t i = 0; i < S.nrows; ++i) {
    bool has_diag = false;
    for (index_t k = S.row_offsets[i]; k < S.row_offsets[i + 1]; ++k) {
      S.values[k] = -omega * S.values[k] / d[i];
      if (S.col_indices[k] == i) {
        S.values[k] += 1.0;
        has_diag = true;
      }
    }
    if (!has_diag)
      throw std::invalid_argument("sa_prolongation: missing diagonal entry");
  }
  S.symmetric = false;
  return matmul(S, P_tent);
}

SparseMatrix bidomain_special_prolongation(index_t n_scalar) {
  if (n_scalar < 1)
    throw std::invalid_argument("bidomain_special_prolongation: empty system");
  SparseMatrix P;
  P.nrows = 2 * n_scalar;
  P.ncols = n_scalar;
  P.row_offsets.resize(2 * n_scalar + 1);
  P.col_indices.resize(2 * n_scalar);
  P.values.assign(2 * n_scalar, 1.0);
  for (index_t i = 0; i <= 2 * n_scalar; ++i) P.row_offsets[i] = i;
  for (index_t i = 0; i < 2 * n_scalar; ++i) P.col_indices[i] = i % n_scalar;
  return P;
}

namespace {

SmootherConfig make_config(SmootherKind kind, double damping, int sweeps,
                           const SubspaceDecomposition* patches) {
  SmootherConfig cfg;
  cfg.kind = kind;
  cfg.damping = damping;
  cfg.sweeps = sweeps;
  cfg.patches = patches;
  return cfg;
}

void check_spd_diag(const SparseMatrix& A, int level) {
  for (index_t i = 0; i < A.nrows; ++i)
    if (!(A.diag(i) > 0.0))
      throw std::runtime_error("build_hierarchy: nonpositive diagonal on level " +
                               std::to_string(level));
}

// True when every R row touches at most one non-interface DOF (pure pairing
// couplings: the interface side can coarsen in lockstep with its owners).
// Rows emptied by Dirichlet elimination are allowed.
bool pure_pairing(const CoupledSystem& system) {
  std::vector<char> is_gamma(system.n_total(), 0);
  for (index_t g : system.partition.gamma) is_gamma[g] = 1;
  for (index_t k = 0; k < system.R.nrows; ++k) {
    int omega_nnz = 0;
    for (index_t e = system.R.row_offsets[k]; e < system.R.row_offsets[k + 1]; ++e)
      if (!is_gamma[system.R.col_indices[e]] && system.R.values[e] != 0.0) ++omega_nnz;
    if (omega_nnz > 1) return false;
  }
  return true;
}

// Rows without off-diagonal couplings (eliminated Dirichlet DOFs). They are
// solved exactly by the smoother and get no coarse representation.
std::vector<char> inactive_rows(const SparseMatrix& A) {
  std::vector<char> inactive(A.nrows, 0);
  for (index_t i = 0; i < A.nrows; ++i) {
    bool coupled = false;
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      if (A.col_indices[k] != i && A.values[k] != 0.0) coupled = true;
    inactive[i] = coupled ? 0 : 1;
  }
  return inactive;
}

// Remove prolongation columns supported entirely on inactive rows.
SparseMatrix drop_inactive_columns(const SparseMatrix& P, const std::vector<char>& inactive) {
  std::vector<char> col_active(P.ncols, 0);
  for (index_t i = 0; i < P.nrows; ++i) {
    if (inactive[i]) continue;
    for (index_t k = P.row_offsets[i]; k < P.row_offsets[i + 1]; ++k)
      col_active[P.col_indices[k]] = 1;
  }
  std::vector<index_t> newcol(P.ncols, -1);
  index_t next = 0;
  for (index_t c = 0; c < P.ncols; ++c)
    if (col_active[c]) newcol[c] = next++;
  if (next == P.ncols) return P;
  CooBuilder coo(P.nrows, next);
  for (index_t i = 0; i < P.nrows; ++i) {
    if (inactive[i]) continue;
    for (index_t k = P.row_offsets[i]; k < P.row_offsets[i + 1]; ++k)
      if (newcol[P.col_indices[k]] >= 0)
        coo.add(i, newcol[P.col_indices[k]], P.values[k]);
  }
  return coo.finalize();
}

std::unique_ptr<SubspaceDecomposition> patches_from(const CoupledSystem& system) {
  auto nb = build_neighborhoods(system.R, system.partition, system.gamma_dof_of_row);
  return std::make_unique<SubspaceDecomposition>(build_patches(nb, system));
}

}  // namespace

std::pair<SparseMatrix, CoupledSystem> coarsen_coupled(const CoupledSystem& system,
                                                       const SparseMatrix& A,
                                                       ProlongationKind prolongation,
                                                       double sa_omega, index_t c_agg) {
  const index_t n = system.n_total();
  std::vector<char> is_gamma(n, 0);
  for (index_t g : system.partition.gamma) is_gamma[g] = 1;
  std::vector<char> inactive = inactive_rows(A);

  // Elliptic-side aggregation on the non-interface block of A1; DOFs without
  // couplings (eliminated rows) stay out of the coarse space.
  std::vector<index_t> omega_dofs;
  omega_dofs.reserve(n);
  for (index_t i = 0; i < n; ++i)
    if (!is_gamma[i] && !inactive[i]) omega_dofs.push_back(i);
  std::vector<index_t> omega_pos(n, -1);
  for (index_t p = 0; p < static_cast<index_t>(omega_dofs.size()); ++p)
    omega_pos[omega_dofs[p]] = p;

  SparseMatrix A_omega;
  {
    CooBuilder coo(omega_dofs.size(), omega_dofs.size());
    for (index_t p = 0; p < static_cast<index_t>(omega_dofs.size()); ++p) {
      index_t i = omega_dofs[p];
      for (index_t k = system.A1.row_offsets[i]; k < system.A1.row_offsets[i + 1]; ++k) {
        index_t q = omega_pos[system.A1.col_indices[k]];
        if (q >= 0) coo.add(p, q, system.A1.values[k]);
      }
    }
    A_omega = coo.finalize(true);
  }
  Aggregation agg = aggregate(strength_graph(A_omega), nullptr, c_agg);

  const bool lockstep = pure_pairing(system);
  const index_t n_rows = system.R.nrows;

  // Interface-side coarse ids, one per distinct interface DOF. Lockstep: the
  // DOF follows the aggregate of its single owner; otherwise identity (the
  // interface stays uncoarsened). Several rows may share one interface DOF on
  // coarse levels; the first row places it.
  index_t n_gamma_coarse = 0;
  std::vector<index_t> coarse_of_gdof(n, -1);
  if (lockstep) {
    std::vector<index_t> agg_to_gamma(agg.n_agg, -1);
    for (index_t k = 0; k < n_rows; ++k) {
      index_t g = system.gamma_dof_of_row[k];
      if (coarse_of_gdof[g] >= 0) continue;
      index_t owner = -1;
      for (index_t e = system.R.row_offsets[k]; e < system.R.row_offsets[k + 1]; ++e) {
        index_t col = system.R.col_indices[e];
        if (!is_gamma[col] && system.R.values[e] != 0.0) owner = col;
      }
      if (owner < 0) {
        // Eliminated pairing row: the interface DOF keeps its own coarse id.
        coarse_of_gdof[g] = n_gamma_coarse++;
        continue;
      }
      index_t a = agg.aggregate_of[omega_pos[owner]];
      if (agg_to_gamma[a] < 0) agg_to_gamma[a] = n_gamma_coarse++;
      coarse_of_gdof[g] = agg_to_gamma[a];
    }
  } else {
    for (index_t g : system.partition.gamma) coarse_of_gdof[g] = n_gamma_coarse++;
  }

  const index_t n_omega_coarse = agg.n_agg;
  const index_t n_coarse = n_omega_coarse + n_gamma_coarse;

  // Tentative prolongation: elliptic-side aggregates first, interface block
  // after them; unit entries (kernel frames are carried by R_c below).
  SparseMatrix P;
  {
    CooBuilder coo(n, n_coarse);
    for (index_t p = 0; p < static_cast<index_t>(omega_dofs.size()); ++p)
      coo.add(omega_dofs[p], agg.aggregate_of[p], 1.0);
    for (index_t g : system.partition.gamma)
      coo.add(g, n_omega_coarse + coarse_of_gdof[g], 1.0);
    P = coo.finalize();
  }
  if (prolongation == ProlongationKind::sa) {
    double omega = sa_omega >= 0.0 ? sa_omega : sa_default_omega(A);
    // Smooth only inside the elliptic block: a monolithic smoothing step
    // would spread interface columns across the coupling and destroy the
    // exact coarse kernel frames.
    SparseMatrix P_omega;
    {
      CooBuilder coo(omega_dofs.size(), n_omega_coarse);
      for (index_t p = 0; p < static_cast<index_t>(omega_dofs.size()); ++p)
        coo.add(p, agg.aggregate_of[p], 1.0);
      P_omega = sa_prolongation(coo.finalize(), A_omega, omega);
    }
    CooBuilder coo(n, n_coarse);
    for (index_t p = 0; p < static_cast<index_t>(omega_dofs.size()); ++p)
      for (index_t k = P_omega.row_offsets[p]; k < P_omega.row_offsets[p + 1]; ++k)
        coo.add(omega_dofs[p], P_omega.col_indices[k], P_omega.values[k]);
    for (index_t g : system.partition.gamma)
      coo.add(g, n_omega_coarse + coarse_of_gdof[g], 1.0);
    P = coo.finalize();
  }

  // Coarse coupled system: Galerkin blocks plus R_c = R P over the same
  // interface mass.
  CoupledSystem coarse;
  coarse.gamma = system.gamma;
  coarse.A1 = galerkin_product(P, system.A1);
  coarse.A1.symmetric = true;
  coarse.M_gamma = system.M_gamma;
  coarse.R = matmul(system.R, P);
  coarse.A0 = matmul(transpose(coarse.R), matmul(coarse.M_gamma, coarse.R));
  coarse.A0.symmetric = true;
  coarse.partition.n_total = n_coarse;
  for (index_t i = 0; i < n_omega_coarse; ++i) coarse.partition.omega.push_back(i);
  for (index_t i = 0; i < n_gamma_coarse; ++i)
    coarse.partition.gamma.push_back(n_omega_coarse + i);
  coarse.gamma_dof_of_row.resize(n_rows);
  for (index_t k = 0; k < n_rows; ++k)
    coarse.gamma_dof_of_row[k] =
        n_omega_coarse + coarse_of_gdof[system.gamma_dof_of_row[k]];
  return {std::move(P), std::move(coarse)};
}

namespace {

Hierarchy build_impl(const SparseMatrix& A_fine, const CoupledSystem* system,
                     const HierarchyOptions& opt) {
  Hierarchy h;
  h.plan = opt.plan;

  auto level0 = std::make_unique<Level>();
  level0->A = A_fine;
  level0->A.symmetric = true;
  h.levels.push_back(std::move(level0));

  // Finest-level smoother: Schwarz patches come from the coupling map.
  {
    Level& lvl = *h.levels.back();
    SmootherKind kind = opt.fine_smoother;
    const SubspaceDecomposition* patches = nullptr;
    bool needs_patches = kind == SmootherKind::schwarz_additive ||
                         kind == SmootherKind::schwarz_multiplicative_sym ||
                         kind == SmootherKind::bidomain_block;
    if (needs_patches && system) {
      lvl.patches = patches_from(*system);
      patches = lvl.patches.get();
    }
    if ((kind == SmootherKind::schwarz_additive ||
         kind == SmootherKind::schwarz_multiplicative_sym) &&
        !patches)
      throw std::invalid_argument(
          "build_hierarchy: Schwarz smoother requires a coupled system");
    lvl.smoother_cfg = make_config(kind, opt.damping, opt.smoother_sweeps, patches);
    lvl.smoother = Smoother::build(lvl.smoother_cfg, lvl.A);
  }

  const bool coupling_aware =
      opt.prolongation == ProlongationKind::special && system != nullptr;
  if (opt.prolongation == ProlongationKind::special && !system)
    throw std::invalid_argument("build_hierarchy: special prolongation needs the "
                                "coupled system");

  // Coupling carried alongside the levels (special kind only). The fine-level
  // coupling is borrowed from the caller's system.
  const CoupledSystem* current_coupling = system;
  bool collapsed = false;

  while (static_cast<int>(h.levels.size()) < opt.max_levels &&
         h.levels.back()->A.nrows > opt.coarse_size_cap) {
    const int l = static_cast<int>(h.levels.size()) - 1;
    const SparseMatrix& A = h.levels.back()->A;
    check_spd_diag(A, l);

    SparseMatrix P;
    std::unique_ptr<CoupledSystem> coarse_coupling;
    if (coupling_aware && opt.special_collapse && l == 0) {
      // Literal two-field collapse: coarse space = one scalar field.
      if (A.nrows % 2 != 0)
        throw std::invalid_argument(
            "build_hierarchy: special collapse needs an even two-field size");
      P = bidomain_special_prolongation(A.nrows / 2);
      collapsed = true;
    } else if (coupling_aware && !collapsed) {
      auto [Pc, coarse] = coarsen_coupled(
          *current_coupling, A,
          opt.special_smooth_omega ? ProlongationKind::sa : ProlongationKind::ua,
          opt.sa_omega, opt.c_agg);
      P = std::move(Pc);
      if (P.ncols >= A.nrows) break;  // no progress
      coarse_coupling = std::make_unique<CoupledSystem>(std::move(coarse));
    } else {
      Aggregation agg;
      if (l == 0 && opt.constrained_aggregation && system) {
        AggregationConstraint constraint = make_constraint(*system);
        agg = aggregate(strength_graph(system->A1), &constraint, opt.c_agg);
      } else {
        agg = aggregate(strength_graph(A), nullptr, opt.c_agg);
      }
      P = drop_inactive_columns(ua_prolongation(agg), inactive_rows(A));
      if (P.ncols >= A.nrows) break;  // no progress
      if (opt.prolongation == ProlongationKind::sa) {
        double omega = opt.sa_omega >= 0.0 ? opt.sa_omega : sa_default_omega(A);
        P = sa_prolongation(P, A, omega);
      }
    }

    SparseMatrix Ac = galerkin_product(P, A);
    Ac.symmetric = true;
    h.levels.back()->P = std::move(P);

    auto next = std::make_unique<Level>();
    next->A = std::move(Ac);
    next->coupling = std::move(coarse_coupling);
    h.levels.push_back(std::move(next));
    Level& lvl = *h.levels.back();
    check_spd_diag(lvl.A, l + 1);

    if (lvl.coupling) {
      // Kernel-aware smoothing continues on the coarse level.
      lvl.patches = patches_from(*lvl.coupling);
      lvl.smoother_cfg = make_config(SmootherKind::schwarz_multiplicative_sym,
                                     opt.damping, opt.smoother_sweeps,
                                     lvl.patches.get());
      current_coupling = lvl.coupling.get();
    } else {
      lvl.smoother_cfg =
          make_config(opt.coarse_smoother, opt.damping, opt.smoother_sweeps, nullptr);
    }
    lvl.smoother = Smoother::build(lvl.smoother_cfg, lvl.A);
  }

  h.coarse_solver = DenseFactor(to_dense(h.levels.back()->A));
  return h;
}

}  // namespace

Hierarchy build_hierarchy(const CoupledSystem& system, const HierarchyOptions& opt) {
  return build_impl(system.system_matrix(), &system, opt);
}

Hierarchy build_hierarchy(const SparseMatrix& A, const HierarchyOptions& opt) {
  return build_impl(A, nullptr, opt);
}

namespace {

void cycle_level(const Hierarchy& h, index_t l, std::span<const double> b,
                 std::span<double> x) {
  const Level& lvl = *h.levels[l];
  if (l + 1 == h.n_levels()) {
    h.coarse_solver.solve(b, x);
    return;
  }
  for (int s = 0; s < h.plan.pre_sweeps; ++s) lvl.smoother.apply(b, x);

  std::vector<double> r(b.begin(), b.end());
  spmv_add(lvl.A, x, r, -1.0);
  const SparseMatrix& P = lvl.P;
  std::vector<double> rc(P.ncols, 0.0);
  // rc = P^T r
  for (index_t i = 0; i < P.nrows; ++i)
    for (index_t k = P.row_offsets[i]; k < P.row_offsets[i + 1]; ++k)
      rc[P.col_indices[k]] += P.values[k] * r[i];

  std::vector<double> xc(P.ncols, 0.0);
  cycle_level(h, l + 1, rc, xc);
  if (h.plan.cycle == CycleType::W && l + 2 < h.n_levels()) {
    std::vector<double> rc2(rc);
    spmv_add(h.levels[l + 1]->A, xc, rc2, -1.0);
    std::vector<double> xc2(P.ncols, 0.0);
    cycle_level(h, l + 1, rc2, xc2);
    axpy(1.0, xc2, xc);
  }
  // x += P xc
  for (index_t i = 0; i < P.nrows; ++i)
    for (index_t k = P.row_offsets[i]; k < P.row_offsets[i + 1]; ++k)
      x[i] += P.values[k] * xc[P.col_indices[k]];

  for (int s = 0; s < h.plan.post_sweeps; ++s) lvl.smoother.apply(b, x);
}

}  // namespace

void cycle(const Hierarchy& h, std::span<const double> b, std::span<double> x) {
  std::fill(x.begin(), x.end(), 0.0);
  cycle_level(h, 0, b, x);
}

std::string Hierarchy::stats_json() const {
  nlohmann::json j;
  nlohmann::json lv = nlohmann::json::array();
  index_t nnz_total = 0;
  for (const auto& level : levels) {
    nlohmann::json one;
    one["n"] = level->A.nrows;
    one["nnz"] = level->A.nnz();
    one["smoother"] = to_string(level->smoother_cfg.kind);
    if (level->patches) one["n_patches"] = level->patches->n_patches();
    lv.push_back(one);
    nnz_total += level->A.nnz();
  }
  j["levels"] = lv;
  j["cycle"] = plan.cycle == CycleType::W ? "W" : "V";
  j["operator_complexity"] =
      static_cast<double>(nnz_total) / static_cast<double>(levels.front()->A.nnz());
  return j.dump();
}

}  // namespace camg
