#pragma once

// Subcommand implementations behind tools/pmga_cli.cpp. Each returns the
// process exit code and never throws.
//
// run exit codes: 0 converged, 2 divergence flag raised (not converged),
// 3 iteration cap reached with neither, 1 error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "pmga/config.hpp"
#include "pmga/estimators.hpp"
#include "pmga/io.hpp"
#include "pmga/parallel.hpp"
#include "pmga/pmga.hpp"

namespace pmga::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDiverging = 2;
inline constexpr int kExitCap = 3;

struct RunOptions {
  bool dry_run = false;
  unsigned threads = 0;
  std::string output_dir;  // overrides config and PMGA_OUTPUT_DIR when set
};

inline std::string resolve_output_dir(const config::ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PMGA_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

inline std::uint64_t evaluation_seed(const config::ExperimentConfig& cfg) { return derive_seed(cfg.seed, 0, 0xee); }

inline FrontierReport frontier_for(const config::Experiment& ex, const Vec& rho) {
  return evaluate_frontier(ex.problem, rho, ex.config.frontier_points, ex.hypervolume_reference,
                           evaluation_seed(ex.config), ex.config.dominance_fraction);
}

inline int run(const std::string& config_path, const RunOptions& opts, std::ostream& out, std::ostream& err,
               const MapRegistry& registry = MapRegistry()) {
  try {
    if (opts.threads) set_thread_cap(opts.threads);
    const config::ExperimentConfig cfg = config::load_config(config_path);
    const config::Experiment ex = config::build_experiment(cfg, registry);
    if (opts.dry_run) {
      out << "config ok: map " << cfg.map_id << " (" << ex.problem.map->rho_dim() << " parameters), "
          << ex.problem.model->objectives() << " objectives, " << ex.problem.quadrature.nodes << " nodes\n";
      return kExitOk;
    }
    const std::filesystem::path dir = resolve_output_dir(cfg, opts.output_dir);
    std::filesystem::create_directories(dir);
    const LearnResult res = learn(ex.problem, cfg.optimizer, ex.rho0);
    const FrontierReport rep = frontier_for(ex, res.rho);
    {
      auto f = io::open_out((dir / cfg.trace_file).string());
      io::write_trace_csv(f, res.trace);
    }
    {
      auto f = io::open_out((dir / cfg.frontier_file).string());
      io::write_frontier_csv(f, rep);
    }
    {
      auto f = io::open_out((dir / cfg.summary_file).string());
      f << io::summary_json(res, ex.rho0, rep, cfg.source).dump(2) << '\n';
    }
    out << "status: " << to_string(res.status) << " after " << res.trace.size() << " iterations\n";
    if (res.divergence_flag) out << "divergence flag raised at iteration " << res.divergence_iteration << '\n';
    out << "J(rho): " << io::fmt(res.trace.back().j_rho) << "\n";
    out << "area: " << io::fmt(rep.area) << "  hypervolume: " << io::fmt(rep.hypervolume)
        << "  dominated: " << rep.dominated << "/" << rep.j.size() << '\n';
    out << "output: " << dir.string() << '\n';
    if (res.converged) return kExitOk;
    return res.divergence_flag ? kExitDiverging : kExitCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

inline int check_grad(const std::string& config_path, std::optional<Vec> rho, double tol, std::ostream& out,
                      std::ostream& err, const MapRegistry& registry = MapRegistry()) {
  try {
    const config::ExperimentConfig cfg = config::load_config(config_path);
    const config::Experiment ex = config::build_experiment(cfg, registry);
    const Vec at = rho ? *rho : ex.rho0;
    if (at.size() != ex.problem.map->rho_dim()) throw ConfigError("--rho has the wrong length");
    const GradientCheck c = check_gradient(ex.problem, at);
    out << "analytic:";
    for (Index i = 0; i < c.analytic.size(); ++i) out << ' ' << io::fmt(c.analytic[i]);
    out << "\nnumeric: ";
    for (Index i = 0; i < c.numeric.size(); ++i) out << ' ' << io::fmt(c.numeric[i]);
    out << "\nmax relative error: " << io::fmt(c.relative_error) << '\n';
    const bool pass = c.relative_error <= tol;
    out << (pass ? "PASS" : "FAIL") << " (tolerance " << tol << ")\n";
    return pass ? kExitOk : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

inline int sample_bound(double r_bar, double d_bar, double g_bar, double gamma, long horizon, double epsilon,
                        double delta, std::ostream& out, std::ostream& err) {
  try {
    est::EstimatorBounds b;
    b.r_bar = Vec::Constant(1, r_bar);
    b.d_bar = d_bar;
    b.g_bar = g_bar;
    b.gamma = gamma;
    b.horizon = horizon;
    out << est::theorem5_sample_count(b, 0, epsilon, delta) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

/// Re-evaluates the frontier at the final rho stored in a summary. With verify,
/// compares the statistics against the stored ones (relative 1e-9).
inline int frontier(const std::string& config_path, const std::string& summary_path, const std::string& csv_path,
                    bool verify, std::ostream& out, std::ostream& err, const MapRegistry& registry = MapRegistry()) {
  try {
    const config::ExperimentConfig cfg = config::load_config(config_path);
    const config::Experiment ex = config::build_experiment(cfg, registry);
    std::ifstream in(summary_path);
    if (!in) throw ConfigError("cannot open summary '" + summary_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const json summary = config::parse_json_text(ss.str(), summary_path);
    const Vec rho = io::vec_from_json(summary.at("final_rho"));
    const FrontierReport rep = frontier_for(ex, rho);
    if (!csv_path.empty()) {
      auto f = io::open_out(csv_path);
      io::write_frontier_csv(f, rep);
    }
    const json now = io::frontier_stats_json(rep);
    out << now.dump(2) << '\n';
    if (!verify) return kExitOk;
    const json& stored = summary.at("frontier");
    bool ok = true;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    for (const char* key : {"area", "hypervolume"}) {
      if (!close(now.at(key).get<double>(), stored.at(key).get<double>())) {
        out << "mismatch: " << key << '\n';
        ok = false;
      }
    }
    for (const char* key : {"dominated_count", "pareto_size", "frontier_points"}) {
      if (now.at(key) != stored.at(key)) {
        out << "mismatch: " << key << '\n';
        ok = false;
      }
    }
    for (const char* key : {"j_min", "j_max"}) {
      const Vec a = io::vec_from_json(now.at(key));
      const Vec b = io::vec_from_json(stored.at(key));
      for (Index i = 0; i < a.size(); ++i) {
        if (a.size() != b.size() || !close(a[i], b[i])) {
          out << "mismatch: " << key << '\n';
          ok = false;
          break;
        }
      }
    }
    out << (ok ? "round-trip OK" : "round-trip FAILED") << '\n';
    return ok ? kExitOk : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace pmga::cli
