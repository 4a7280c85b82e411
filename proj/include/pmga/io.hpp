#pragma once

// CSV / JSON output.
//   trace.csv     iteration,J_rho,grad_norm,rho_1..rho_p,wall_time_s
//   frontier.csv  t_1..t_b,theta_1..theta_d,J_1..J_q
//   summary.json  final rho, frontier statistics, status flags, echoed config

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmga/common.hpp"
#include "pmga/pmga.hpp"

namespace pmga::io {

using json = nlohmann::json;

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  const Index p = trace.empty() ? 0 : trace.front().rho.size();
  out << "iteration,J_rho,grad_norm";
  for (Index i = 0; i < p; ++i) out << ",rho_" << i + 1;
  out << ",wall_time_s\n";
  for (const TraceRow& r : trace) {
    out << r.iteration << ',' << fmt(r.j_rho) << ',' << fmt(r.grad_norm);
    for (Index i = 0; i < r.rho.size(); ++i) out << ',' << fmt(r.rho[i]);
    out << ',' << fmt(r.wall_time_s) << '\n';
  }
}

inline void write_frontier_csv(std::ostream& out, const FrontierReport& rep) {
  if (rep.j.empty()) {
    out << "t_1,theta_1,J_1\n";
    return;
  }
  const Index b = rep.t.front().size();
  const Index d = rep.theta.front().size();
  const Index q = rep.j.front().size();
  std::string sep;
  for (Index i = 0; i < b; ++i, sep = ",") out << sep << "t_" << i + 1;
  for (Index i = 0; i < d; ++i) out << ",theta_" << i + 1;
  for (Index i = 0; i < q; ++i) out << ",J_" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < rep.j.size(); ++k) {
    sep.clear();
    for (Index i = 0; i < b; ++i, sep = ",") out << sep << fmt(rep.t[k][i]);
    for (Index i = 0; i < d; ++i) out << ',' << fmt(rep.theta[k][i]);
    for (Index i = 0; i < q; ++i) out << ',' << fmt(rep.j[k][i]);
    out << '\n';
  }
}

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec vec_from_json(const json& a) {
  if (!a.is_array()) throw ConfigError("expected an array of numbers");
  Vec v(static_cast<Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) v[static_cast<Index>(k)] = a.at(k).get<double>();
  return v;
}

inline json frontier_stats_json(const FrontierReport& rep) {
  json j;
  j["frontier_points"] = rep.j.size();
  j["area"] = rep.area;
  j["hypervolume"] = rep.hypervolume;
  j["hypervolume_reference"] = to_json(rep.hypervolume_reference);
  j["dominated_count"] = rep.dominated;
  j["pareto_size"] = rep.pareto_size;
  j["dominance_fraction"] = rep.dominance_fraction;
  j["j_min"] = to_json(rep.j_min);
  j["j_max"] = to_json(rep.j_max);
  return j;
}

inline json summary_json(const LearnResult& res, const Vec& rho0, const FrontierReport& rep, const json& config) {
  json j;
  j["status"] = to_string(res.status);
  j["converged"] = res.converged;
  j["divergence_flag"] = res.divergence_flag;
  j["divergence_iteration"] = res.divergence_iteration;
  j["iterations"] = res.trace.size();
  j["final_J_rho"] = res.trace.empty() ? 0.0 : res.trace.back().j_rho;
  j["rho0"] = to_json(rho0);
  j["final_rho"] = to_json(res.rho);
  j["frontier"] = frontier_stats_json(rep);
  j["config"] = config;
  return j;
}

}  // namespace pmga::io
