#include "camg/bench.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef CAMG_GIT_REVISION
#define CAMG_GIT_REVISION "unknown"
#endif

namespace camg {

std::string SolverChoice::tag() const {
  return to_string(prolongation) + "+" + to_string(smoother);
}

void BenchmarkConfig::validate() const {
  if (levels.empty()) throw std::invalid_argument("BenchmarkConfig: empty level list");
  if (gammas.empty()) throw std::invalid_argument("BenchmarkConfig: empty gamma sweep");
  if (solvers.empty()) throw std::invalid_argument("BenchmarkConfig: empty solver matrix");
  const bool known = experiment == "bidomain2d" || experiment == "bidomain3d" ||
                     experiment == "emi2d" || experiment == "emi3d" ||
                     experiment == "reduced_emi";
  if (!known)
    throw std::invalid_argument("BenchmarkConfig: unknown experiment " + experiment);
}

std::vector<double> benchmark_rhs(const CoupledSystem& system) {
  std::vector<double> f(system.n_total(), 0.0);
  for (index_t i : system.partition.omega) f[i] = 1.0;
  for (index_t i : system.partition.upsilon_minus_gamma) f[i] = 1.0;
  system.constrain_rhs(f);
  if (system.neumann_kernel) {
    const auto& k = *system.neumann_kernel;
    double proj = dot(f, k) / dot(k, k);
    axpy(-proj, k, f);
  }
  return f;
}

HierarchyOptions hierarchy_options_for(const BenchmarkConfig& cfg,
                                       const SolverChoice& solver) {
  HierarchyOptions opt;
  opt.prolongation = solver.prolongation;
  opt.fine_smoother = solver.smoother;
  opt.plan.cycle = cfg.cycle;
  opt.c_agg = cfg.c_agg;
  opt.smoother_sweeps = cfg.sweeps;
  opt.coarse_size_cap = cfg.coarse_size_cap;
  opt.max_levels = cfg.max_levels;
  return opt;
}

namespace {

struct GridPoint {
  index_t n;
  double gamma;
  SolverChoice solver;
  double rho = 0.0;            // reduced_emi only; 0 marks the trace row
  CouplingKind coupling = CouplingKind::average;
};

// Pure-Neumann builders are grounded at one vertex so that CG iteration
// counts are meaningful for any load.
CoupledSystem ground_if_singular(CoupledSystem sys) {
  if (!sys.neumann_kernel) return sys;
  std::vector<index_t> idx{0};
  std::vector<double> vals{0.0};
  return apply_dirichlet(std::move(sys), idx, vals);
}

ProblemSpec base_spec(const BenchmarkConfig& cfg, index_t n) {
  ProblemSpec spec;
  spec.n = n;
  spec.alpha_e = cfg.alpha_e;
  spec.alpha_i = cfg.alpha_i;
  spec.gamma = 1.0;
  if (cfg.experiment == "bidomain2d") {
    spec.model = ModelKind::bidomain;
    spec.dim = 2;
  } else if (cfg.experiment == "bidomain3d") {
    spec.model = ModelKind::bidomain;
    spec.dim = 3;
  } else if (cfg.experiment == "emi2d") {
    spec.model = ModelKind::emi;
    spec.dim = 2;
  } else if (cfg.experiment == "emi3d") {
    spec.model = ModelKind::emi;
    spec.dim = 3;
  } else {
    spec.model = ModelKind::reduced_emi;
    spec.dim = 3;
  }
  spec.extents = {cfg.box_extent, cfg.box_extent, cfg.box_extent};
  return spec;
}

ResultRow run_point(const BenchmarkConfig& cfg, const CoupledSystem& base,
                    const GridPoint& pt) {
  CoupledSystem system = base;  // cheap relative to the solves; keeps jobs independent
  system.gamma = pt.gamma;

  ResultRow row;
  row.experiment = cfg.experiment;
  row.n = pt.n;
  row.dofs = system.n_total();
  row.gamma = pt.gamma;
  row.solver = pt.solver.tag();
  if (cfg.experiment == "reduced_emi") {
    std::ostringstream tag;
    if (pt.coupling == CouplingKind::trace)
      tag << row.solver << "+trace";
    else
      tag << row.solver << "+rho" << pt.rho;
    row.solver = tag.str();
  }

  auto t0 = std::chrono::steady_clock::now();
  Hierarchy hierarchy = build_hierarchy(system, hierarchy_options_for(cfg, pt.solver));
  row.setup_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<double> f = benchmark_rhs(system);
  SparseMatrix A = system.system_matrix();
  LinearOperator Aop = as_operator(A);
  LinearOperator Bop{A.nrows, [&hierarchy](std::span<const double> b,
                                           std::span<double> x) {
                       cycle(hierarchy, b, x);
                     }};
  PcgOptions popt;
  popt.criterion = cfg.criterion;
  popt.tol = cfg.tol;
  popt.max_iter = cfg.max_iter;
  auto [x, report] = pcg(Aop, Bop, f, popt);
  (void)x;
  row.iters = report.iterations;
  row.cond = report.cond_estimate;
  row.solve_s = report.wall_time;
  row.converged = report.converged;
  return row;
}

}  // namespace

std::vector<ResultRow> run_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  const bool reduced = cfg.experiment == "reduced_emi";

  std::vector<ResultRow> rows;
  for (index_t n : cfg.levels) {
    // Systems are assembled once per (level, geometry) and shared read-only
    // between the gamma/solver jobs.
    std::vector<std::pair<CoupledSystem, std::vector<GridPoint>>> groups;
    if (!reduced) {
      ProblemSpec spec = base_spec(cfg, n);
      CoupledSystem base = ground_if_singular(build_system(spec));
      std::vector<GridPoint> pts;
      for (const SolverChoice& solver : cfg.solvers)
        for (double gamma : cfg.gammas) pts.push_back({n, gamma, solver});
      groups.emplace_back(std::move(base), std::move(pts));
    } else {
      for (double rho : cfg.rhos) {
        ProblemSpec spec = base_spec(cfg, n);
        spec.rho = rho;
        spec.coupling = CouplingKind::average;
        CoupledSystem base = ground_if_singular(build_system(spec));
        std::vector<GridPoint> pts;
        for (const SolverChoice& solver : cfg.solvers)
          for (double gamma : cfg.gammas)
            pts.push_back({n, gamma, solver, rho, CouplingKind::average});
        groups.emplace_back(std::move(base), std::move(pts));
      }
      if (cfg.trace_row) {
        ProblemSpec spec = base_spec(cfg, n);
        spec.rho = cfg.trace_rho;
        spec.coupling = CouplingKind::trace;
        CoupledSystem base = ground_if_singular(build_system(spec));
        std::vector<GridPoint> pts;
        for (const SolverChoice& solver : cfg.solvers)
          for (double gamma : cfg.gammas)
            pts.push_back({n, gamma, solver, 0.0, CouplingKind::trace});
        groups.emplace_back(std::move(base), std::move(pts));
      }
    }

    for (auto& [base, pts] : groups) {
      std::vector<ResultRow> out(pts.size());
      int jobs = cfg.jobs > 0 ? cfg.jobs
                              : static_cast<int>(std::thread::hardware_concurrency());
      jobs = std::max(1, std::min<int>(jobs, static_cast<int>(pts.size())));
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= pts.size()) break;
          out[i] = run_point(cfg, base, pts[i]);
        }
      };
      std::vector<std::thread> pool;
      for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
      rows.insert(rows.end(), out.begin(), out.end());
    }
  }
  return rows;
}

void write_result_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "experiment,n,dofs,gamma,solver,iters,cond,setup_s,solve_s\n";
  for (const auto& r : rows) {
    out << r.experiment << "," << r.n << "," << r.dofs << "," << r.gamma << ","
        << r.solver << "," << r.iters << "," << r.cond << "," << r.setup_s << ","
        << r.solve_s << "\n";
  }
}

void write_result_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_result_csv: cannot open " + path);
  write_result_csv(rows, f);
}

std::vector<ResultRow> read_result_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    ResultRow r;
    auto next = [&]() {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("read_result_csv: short row: " + line);
      return field;
    };
    r.experiment = next();
    r.n = std::stoll(next());
    r.dofs = std::stoll(next());
    r.gamma = std::stod(next());
    r.solver = next();
    r.iters = std::stoi(next());
    r.cond = std::stod(next());
    r.setup_s = std::stod(next());
    r.solve_s = std::stod(next());
    r.converged = true;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> read_result_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_result_csv: cannot open " + path);
  return read_result_csv(f);
}

void write_result_json(const BenchmarkConfig& cfg, const std::vector<ResultRow>& rows,
                       const std::string& path) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_to_json(cfg));
  j["git_revision"] = CAMG_GIT_REVISION;
  j["rhs"] = "unit load on the non-interface block, zero on the interface block";
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json one;
    one["experiment"] = r.experiment;
    one["n"] = r.n;
    one["dofs"] = r.dofs;
    one["gamma"] = r.gamma;
    one["solver"] = r.solver;
    one["iters"] = r.iters;
    one["cond"] = r.cond;
    one["setup_s"] = r.setup_s;
    one["solve_s"] = r.solve_s;
    one["converged"] = r.converged;
    rj.push_back(one);
  }
  j["results"] = rj;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_result_json: cannot open " + path);
  f << j.dump(2) << "\n";
}

DiffTolerance parse_tolerance(const std::string& text) {
  DiffTolerance tol;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("parse_tolerance: expected key=value in " + text);
    std::string key = item.substr(0, eq);
    double value = std::stod(item.substr(eq + 1));
    if (key == "rel")
      tol.rel = value;
    else if (key == "abs")
      tol.abs = value;
    else
      throw std::invalid_argument("parse_tolerance: unknown key " + key);
  }
  return tol;
}

DiffReport diff_tables(const std::vector<ResultRow>& got,
                       const std::vector<ResultRow>& reference,
                       const DiffTolerance& tol) {
  auto key = [](const ResultRow& r) {
    std::ostringstream k;
    k << r.experiment << "|" << r.n << "|" << r.dofs << "|" << r.gamma << "|"
      << r.solver;
    return k.str();
  };
  std::map<std::string, const ResultRow*> ref_map;
  for (const auto& r : reference) ref_map[key(r)] = &r;
  if (got.size() != reference.size())
    throw std::invalid_argument("diff_tables: shape mismatch (row counts differ)");

  DiffReport report;
  report.pass = true;
  for (const auto& r : got) {
    auto it = ref_map.find(key(r));
    if (it == ref_map.end())
      throw std::invalid_argument("diff_tables: shape mismatch at " + key(r));
    ++report.cells_compared;
    double allowed = std::max(tol.abs, tol.rel * it->second->iters);
    if (std::abs(r.iters - it->second->iters) > allowed) {
      report.pass = false;
      std::ostringstream msg;
      msg << key(r) << ": iters " << r.iters << " vs " << it->second->iters
          << " (allowed " << allowed << ")";
      report.failures.push_back(msg.str());
    }
  }
  return report;
}

BenchmarkConfig default_config(const std::string& experiment) {
  BenchmarkConfig cfg;
  cfg.experiment = experiment;
  cfg.gammas = {1.0, 1e2, 1e4, 1e6, 1e8, 1e10};
  if (experiment == "bidomain2d") {
    cfg.levels = {32, 64, 128, 256};
    cfg.solvers = {{ProlongationKind::special, SmootherKind::schwarz_multiplicative_sym}};
  } else if (experiment == "bidomain3d") {
    cfg.levels = {8, 16, 32};
    cfg.solvers = {{ProlongationKind::special, SmootherKind::schwarz_multiplicative_sym}};
  } else if (experiment == "emi2d") {
    cfg.levels = {64, 128, 256, 512};
    cfg.solvers = {{ProlongationKind::ua, SmootherKind::schwarz_multiplicative_sym}};
  } else if (experiment == "emi3d") {
    cfg.levels = {8, 16, 32, 64};
    cfg.solvers = {{ProlongationKind::ua, SmootherKind::schwarz_multiplicative_sym}};
  } else if (experiment == "reduced_emi") {
    cfg.levels = {46};
    cfg.solvers = {{ProlongationKind::special, SmootherKind::schwarz_multiplicative_sym}};
    cfg.alpha_e = 3.0;
    cfg.alpha_i = 7.0;
    // Box side in micrometers: h = 2 um at the default resolution, so the
    // largest coupling radius spans a few cells as in a fitted morphology.
    cfg.box_extent = 92.0;
    cfg.c_agg = 2;
    cfg.criterion = StoppingCriterion::rel_l2_residual;
    cfg.tol = 1e-6;
  } else {
    throw std::invalid_argument("default_config: unknown experiment " + experiment);
  }
  return cfg;
}

BenchmarkConfig config_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BenchmarkConfig cfg = default_config(j.at("experiment").get<std::string>());
  if (j.contains("levels")) cfg.levels = j["levels"].get<std::vector<index_t>>();
  if (j.contains("gamma")) cfg.gammas = j["gamma"].get<std::vector<double>>();
  if (j.contains("solvers")) {
    cfg.solvers.clear();
    for (const auto& s : j["solvers"]) {
      SolverChoice choice;
      choice.prolongation =
          prolongation_from_string(s.at("prolongation").get<std::string>());
      choice.smoother = smoother_kind_from_string(s.at("smoother").get<std::string>());
      cfg.solvers.push_back(choice);
    }
  }
  if (j.contains("stopping")) {
    const auto& s = j["stopping"];
    if (s.contains("criterion")) {
      std::string c = s["criterion"].get<std::string>();
      if (c == "rel_l2_residual")
        cfg.criterion = StoppingCriterion::rel_l2_residual;
      else if (c == "rel_precond_residual")
        cfg.criterion = StoppingCriterion::rel_precond_residual;
      else
        throw std::invalid_argument("config_from_json: unknown criterion " + c);
    }
    cfg.tol = s.value("tol", cfg.tol);
    cfg.max_iter = s.value("max_iter", cfg.max_iter);
  }
  cfg.alpha_e = j.value("alpha_e", cfg.alpha_e);
  cfg.alpha_i = j.value("alpha_i", cfg.alpha_i);
  if (j.contains("rho")) cfg.rhos = j["rho"].get<std::vector<double>>();
  cfg.trace_row = j.value("trace_row", cfg.trace_row);
  cfg.trace_rho = j.value("trace_rho", cfg.trace_rho);
  cfg.box_extent = j.value("box_extent", cfg.box_extent);
  if (j.contains("cycle"))
    cfg.cycle = j["cycle"].get<std::string>() == "V" ? CycleType::V : CycleType::W;
  cfg.c_agg = j.value("c_agg", cfg.c_agg);
  cfg.sweeps = j.value("sweeps", cfg.sweeps);
  cfg.coarse_size_cap = j.value("coarse_size_cap", cfg.coarse_size_cap);
  cfg.max_levels = j.value("max_levels", cfg.max_levels);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.validate();
  return cfg;
}

std::string config_to_json(const BenchmarkConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = cfg.experiment;
  j["levels"] = cfg.levels;
  j["gamma"] = cfg.gammas;
  nlohmann::json solvers = nlohmann::json::array();
  for (const auto& s : cfg.solvers) {
    solvers.push_back({{"prolongation", to_string(s.prolongation)},
                       {"smoother", to_string(s.smoother)}});
  }
  j["solvers"] = solvers;
  j["stopping"] = {
      {"criterion", cfg.criterion == StoppingCriterion::rel_l2_residual
                        ? "rel_l2_residual"
                        : "rel_precond_residual"},
      {"tol", cfg.tol},
      {"max_iter", cfg.max_iter}};
  j["alpha_e"] = cfg.alpha_e;
  j["alpha_i"] = cfg.alpha_i;
  j["rho"] = cfg.rhos;
  j["trace_row"] = cfg.trace_row;
  j["trace_rho"] = cfg.trace_rho;
  j["box_extent"] = cfg.box_extent;
  j["cycle"] = cfg.cycle == CycleType::W ? "W" : "V";
  j["c_agg"] = cfg.c_agg;
  j["sweeps"] = cfg.sweeps;
  j["coarse_size_cap"] = cfg.coarse_size_cap;
  j["max_levels"] = cfg.max_levels;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  return j.dump();
}

}  // namespace camg
