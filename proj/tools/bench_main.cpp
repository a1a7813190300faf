#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "camg/bench.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for the coupled-problem AMG solver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment grid from a config file");
  std::string config_path, out_dir = ".", experiment;
  int jobs = 0;
  run->add_option("--config", config_path, "JSON benchmark config");
  run->add_option("--experiment", experiment,
                  "Built-in default config (bidomain2d|bidomain3d|emi2d|emi3d|reduced_emi)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--jobs", jobs, "Worker threads (0: hardware concurrency)");

  auto* diff = app.add_subcommand("diff", "Compare two result CSVs");
  std::string ref_path, got_path, tol_text = "rel=0.2,abs=2";
  diff->add_option("--ref", ref_path, "Reference CSV")->required();
  diff->add_option("--got", got_path, "Result CSV")->required();
  diff->add_option("--tol", tol_text, "Tolerance spec, e.g. rel=0.2,abs=3");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      camg::BenchmarkConfig cfg;
      if (!config_path.empty())
        cfg = camg::config_from_json(read_file(config_path));
      else if (!experiment.empty())
        cfg = camg::default_config(experiment);
      else {
        std::cerr << "bench run: need --config or --experiment\n";
        return 1;
      }
      if (jobs > 0) cfg.jobs = jobs;
      auto rows = camg::run_benchmark(cfg);
      std::filesystem::create_directories(out_dir);
      std::string base = out_dir + "/" + cfg.experiment;
      camg::write_result_csv(rows, base + ".csv");
      camg::write_result_json(cfg, rows, base + ".json");

      bool all_converged = true;
      for (const auto& r : rows) {
        std::cout << r.experiment << " n=" << r.n << " dofs=" << r.dofs
                  << " gamma=" << r.gamma << " solver=" << r.solver
                  << " iters=" << r.iters << " cond=" << r.cond
                  << (r.converged ? "" : "  [NOT CONVERGED]") << "\n";
        all_converged = all_converged && r.converged;
      }
      std::cout << "wrote " << base << ".csv and " << base << ".json\n";
      return all_converged ? 0 : 2;
    }
    if (diff->parsed()) {
      auto got = camg::read_result_csv(got_path);
      auto ref = camg::read_result_csv(ref_path);
      auto report = camg::diff_tables(got, ref, camg::parse_tolerance(tol_text));
      for (const auto& f : report.failures) std::cout << "FAIL " << f << "\n";
      std::cout << (report.pass ? "PASS" : "FAIL") << " (" << report.cells_compared
                << " cells compared)\n";
      return report.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
