#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pmga/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pareto-manifold gradient ascent experiments"};
  app.require_subcommand(1);

  pmga::cli::RunOptions run_opts;
  std::string config_path;
  auto* run = app.add_subcommand("run", "learn rho and write trace, frontier and summary files");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_flag("--dry-run", run_opts.dry_run, "validate the config without computing");
  run->add_option("--threads", run_opts.threads, "worker cap (default: PMGA_THREADS or all cores)");
  run->add_option("--output-dir", run_opts.output_dir, "output directory (default: PMGA_OUTPUT_DIR or config)");

  std::vector<double> rho_values;
  double tol = 1e-3;
  auto* grad = app.add_subcommand("check-grad", "compare the analytic gradient with finite differences");
  grad->add_option("config", config_path, "experiment config (JSON)")->required();
  grad->add_option("--rho", rho_values, "evaluation point (default: rho0)");
  grad->add_option("--tol", tol, "maximum relative error");

  double r_bar = 0, d_bar = 0, g_bar = 0, gamma = 0, eps = 0, delta = 0;
  long horizon = 0;
  auto* bound = app.add_subcommand("sample-bound", "trajectories needed for an eps-accurate Hessian estimate");
  bound->add_option("R_bar", r_bar)->required();
  bound->add_option("D_bar", d_bar)->required();
  bound->add_option("G_bar", g_bar)->required();
  bound->add_option("gamma", gamma)->required();
  bound->add_option("H", horizon)->required();
  bound->add_option("epsilon", eps)->required();
  bound->add_option("delta", delta)->required();

  std::string summary_path, csv_path;
  bool verify = false;
  auto* front = app.add_subcommand("frontier", "evaluate the frontier at the rho stored in a summary");
  front->add_option("config", config_path, "experiment config (JSON)")->required();
  front->add_option("--summary", summary_path, "summary.json written by run")->required();
  front->add_option("--csv", csv_path, "write the frontier CSV here");
  front->add_flag("--verify", verify, "compare against the stored statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : pmga::cli::kExitError;
  }

  if (*run) return pmga::cli::run(config_path, run_opts, std::cout, std::cerr);
  if (*grad) {
    std::optional<pmga::Vec> rho;
    if (!rho_values.empty()) rho = Eigen::Map<const pmga::Vec>(rho_values.data(), static_cast<pmga::Index>(rho_values.size()));
    return pmga::cli::check_grad(config_path, rho, tol, std::cout, std::cerr);
  }
  if (*bound) return pmga::cli::sample_bound(r_bar, d_bar, g_bar, gamma, horizon, eps, delta, std::cout, std::cerr);
  if (*front) return pmga::cli::frontier(config_path, summary_path, csv_path, verify, std::cout, std::cerr);
  return pmga::cli::kExitError;
}
