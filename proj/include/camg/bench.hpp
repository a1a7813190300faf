#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "camg/amg.hpp"
#include "camg/assembly.hpp"
#include "camg/krylov.hpp"

namespace camg {

struct SolverChoice {
  ProlongationKind prolongation = ProlongationKind::ua;
  SmootherKind smoother = SmootherKind::schwarz_multiplicative_sym;
  std::string tag() const;
};

/// One experiment grid: mesh levels x gamma sweep x solver matrix. The
/// reduced experiment additionally sweeps coupling radii and a trace row.
struct BenchmarkConfig {
  std::string experiment;  // bidomain2d|bidomain3d|emi2d|emi3d|reduced_emi
  std::vector<index_t> levels;
  std::vector<double> gammas;
  std::vector<SolverChoice> solvers;
  StoppingCriterion criterion = StoppingCriterion::rel_precond_residual;
  double tol = 1e-10;
  int max_iter = 500;
  double alpha_e = 1.0;
  double alpha_i = 1.0;
  std::vector<double> rhos = {5.0, 1.0, 0.2};  // reduced_emi averaging rows
  bool trace_row = true;                       // reduced_emi extra row (rho tag 0)
  double trace_rho = 1.0;                      // physical scaling for the trace row
  double box_extent = 1.0;                     // box side (micrometer for reduced_emi)
  CycleType cycle = CycleType::W;
  index_t c_agg = 4;
  int sweeps = 1;
  index_t coarse_size_cap = 200;
  int max_levels = 10;
  std::uint64_t seed = 1234;
  int jobs = 0;  // 0: hardware concurrency

  void validate() const;
};

struct ResultRow {
  std::string experiment;
  index_t n = 0;
  index_t dofs = 0;
  double gamma = 0.0;
  std::string solver;
  int iters = 0;
  double cond = 0.0;
  double setup_s = 0.0;
  double solve_s = 0.0;
  bool converged = false;
};

std::vector<ResultRow> run_benchmark(const BenchmarkConfig& cfg);

void write_result_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void write_result_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_result_csv(std::istream& in);
std::vector<ResultRow> read_result_csv(const std::string& path);
/// Full metadata dump (config, defaults, git revision, per-row results).
void write_result_json(const BenchmarkConfig& cfg, const std::vector<ResultRow>& rows,
                       const std::string& path);

struct DiffTolerance {
  double rel = 0.2;
  double abs = 2.0;
};
DiffTolerance parse_tolerance(const std::string& text);  // "rel=0.2,abs=3"

struct DiffReport {
  bool pass = false;
  index_t cells_compared = 0;
  std::vector<std::string> failures;
};

/// Cellwise iteration-count comparison of two result tables matched on
/// (experiment, n, dofs, gamma, solver). Throws on shape mismatch.
DiffReport diff_tables(const std::vector<ResultRow>& got,
                       const std::vector<ResultRow>& reference,
                       const DiffTolerance& tol);

BenchmarkConfig default_config(const std::string& experiment);
BenchmarkConfig config_from_json(const std::string& text);
std::string config_to_json(const BenchmarkConfig& cfg);

/// RHS used by every benchmark solve: unit load on the non-interface block,
/// zero on the interface block, Dirichlet data applied, and the all-ones
/// kernel projected out on pure-Neumann systems.
std::vector<double> benchmark_rhs(const CoupledSystem& system);

HierarchyOptions hierarchy_options_for(const BenchmarkConfig& cfg,
                                       const SolverChoice& solver);

}  // namespace camg
