#pragma once

// JSON experiment configuration. Every block is optional except "domain" and
// "map"; unknown keys anywhere are rejected with their JSON path.

#include <cstdint>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmga/common.hpp"
#include "pmga/estimators.hpp"
#include "pmga/lqg.hpp"
#include "pmga/manifold.hpp"
#include "pmga/metrics.hpp"
#include "pmga/pmga.hpp"
#include "pmga/reservoir.hpp"

namespace pmga::config {

using json = nlohmann::json;

namespace detail {

// Read-only view of a JSON object that remembers which keys were consumed.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(where(key) + ": required key missing");
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (!has(key)) return fallback;
    return as<T>(raw(key), where(key));
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(where(key) + ": required key missing");
    return as<T>(raw(key), where(key));
  }

  Vec vec(const std::string& key, const Vec& fallback = {}) {
    if (!has(key)) return fallback;
    return to_vec(raw(key), where(key));
  }

  Block child(const std::string& key) { return Block(raw(key), where(key)); }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }
  }

  static Vec to_vec(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
    Vec out(static_cast<Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ConfigError(where + "[" + std::to_string(k) + "]: expected a number");
      out[static_cast<Index>(k)] = v[k].get<double>();
    }
    return out;
  }

 private:
  template <class T>
  static T as(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class E>
E pick(const std::string& value, const std::vector<std::pair<std::string, E>>& options, const std::string& where) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (name == value) return e;
    names += (names.empty() ? "" : ", ") + name;
  }
  throw ConfigError(where + ": '" + value + "' is not one of {" + names + "}");
}

}  // namespace detail

enum class DomainKind { lqg, reservoir };
enum class EstimationMode { closed_form, estimated };
enum class LayoutChoice { automatic, diagonal, full };

struct ExperimentConfig {
  json source;

  DomainKind domain = DomainKind::lqg;
  lqg::LqgSpec lqg;
  LayoutChoice layout = LayoutChoice::automatic;
  lqg::DerivativeMode lqg_derivatives = lqg::DerivativeMode::analytic;
  reservoir::ReservoirSpec reservoir;

  std::string map_id;
  MapOptions map_options;
  Vec rho0;

  QuadratureConfig quadrature;
  bool quadrature_nodes_set = false;

  metrics::IndicatorSpec indicator;
  bool reference_auto = true;
  double reference_margin = 0.05;

  OptimizerConfig optimizer;

  EstimationMode estimation = EstimationMode::closed_form;
  Index trajectories = 10000;
  est::EstimatorOptions estimator;

  std::size_t frontier_points = 100;
  double dominance_fraction = 0.01;
  Vec hypervolume_reference;  // empty: automatic antiutopia

  std::uint64_t seed = 0;

  std::string output_dir = "pmga_out";
  std::string trace_file = "trace.csv";
  std::string frontier_file = "frontier.csv";
  std::string summary_file = "summary.json";
};

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number.
    std::size_t line = 1;
    for (std::size_t k = 0; k < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') ++line;
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline ExperimentConfig parse_config(const json& j) {
  using detail::Block;
  using detail::pick;
  ExperimentConfig c;
  c.source = j;
  Block root(j, "$");

  // domain
  {
    Block d = root.child("domain");
    c.domain = pick<DomainKind>(d.require<std::string>("type"),
                                {{"lqg", DomainKind::lqg}, {"reservoir", DomainKind::reservoir}}, d.where("type"));
    if (c.domain == DomainKind::lqg) {
      auto& s = c.lqg;
      s.n = d.get<Index>("n", 2);
      s = lqg::LqgSpec::standard(s.n);
      s.gamma = d.get<double>("gamma", s.gamma);
      s.xi = d.get<double>("xi", s.xi);
      s.s0 = d.vec("s0", s.s0);
      if (d.has("sigma")) {
        const json& sj = d.raw("sigma");
        if (sj.is_number()) {
          s.sigma = sj.get<double>() * Mat::Identity(s.n, s.n);
        } else if (sj.is_array() && !sj.empty() && sj[0].is_array()) {
          s.sigma.resize(static_cast<Index>(sj.size()), static_cast<Index>(sj[0].size()));
          for (std::size_t r = 0; r < sj.size(); ++r) {
            const Vec row = Block::to_vec(sj[r], d.where("sigma") + "[" + std::to_string(r) + "]");
            if (row.size() != s.sigma.cols()) throw ConfigError(d.where("sigma") + ": ragged matrix");
            s.sigma.row(static_cast<Index>(r)) = row.transpose();
          }
        } else {
          throw ConfigError(d.where("sigma") + ": expected a number or a matrix");
        }
      }
      s.horizon = d.get<Index>("horizon", s.horizon);
      s.linear_action_term = d.get<bool>("linear_action_term", false);
      c.layout = pick<LayoutChoice>(d.get<std::string>("gain_layout", "auto"),
                                    {{"auto", LayoutChoice::automatic},
                                     {"diagonal", LayoutChoice::diagonal},
                                     {"full", LayoutChoice::full}},
                                    d.where("gain_layout"));
      c.lqg_derivatives = pick<lqg::DerivativeMode>(
          d.get<std::string>("derivatives", "analytic"),
          {{"analytic", lqg::DerivativeMode::analytic}, {"finite_difference", lqg::DerivativeMode::finite_difference}},
          d.where("derivatives"));
      try {
        s.validate();
      } catch (const ConfigError& e) {
        throw ConfigError("$.domain: " + std::string(e.what()));
      }
    } else {
      auto& s = c.reservoir;
      s.surface = d.get<double>("surface", s.surface);
      s.h_bar = d.get<double>("h_bar", s.h_bar);
      s.rho_bar = d.get<double>("rho_bar", s.rho_bar);
      s.gamma = d.get<double>("gamma", s.gamma);
      s.storage_cap = d.get<double>("storage_cap", s.storage_cap);
      s.learn_episodes = d.get<Index>("learn_episodes", s.learn_episodes);
      s.eval_episodes = d.get<Index>("eval_episodes", s.eval_episodes);
      s.steps = d.get<Index>("steps", s.steps);
      if (d.has("initial_states")) {
        const Vec v = d.vec("initial_states");
        s.initial_states.assign(v.data(), v.data() + v.size());
      }
      if (d.has("centers")) {
        const Vec v = d.vec("centers");
        s.centers.assign(v.data(), v.data() + v.size());
      }
      if (d.has("widths")) {
        const Vec v = d.vec("widths");
        s.widths.assign(v.data(), v.data() + v.size());
      }
      s.sigma = d.get<double>("policy_sigma", s.sigma);
      s.squared_features = d.get<bool>("squared_features", false);
      s.penalty = d.get<bool>("penalty", false);
      if (d.has("inflow")) {
        Block in = d.child("inflow");
        const std::string type = in.require<std::string>("type");
        if (type == "deterministic") {
          s.inflow = reservoir::InflowModel::constant(in.require<double>("value"));
        } else if (type == "lognormal") {
          s.inflow = reservoir::InflowModel::lognormal_model(in.get<double>("mu", std::log(40.0)),
                                                             in.get<double>("sigma", 0.5));
        } else if (type == "file") {
          s.inflow = reservoir::InflowModel::from_file(in.require<std::string>("path"));
        } else {
          throw ConfigError(in.where("type") + ": '" + type + "' is not one of {deterministic, lognormal, file}");
        }
        in.finish();
      }
      try {
        s.validate();
      } catch (const ConfigError& e) {
        throw ConfigError("$.domain: " + std::string(e.what()));
      }
    }
    d.finish();
  }

  // map
  {
    Block m = root.child("map");
    c.map_id = m.require<std::string>("id");
    c.map_options.literal = m.get<bool>("literal", false);
    c.rho0 = m.vec("rho0");
    m.finish();
  }

  if (root.has("quadrature")) {
    Block q = root.child("quadrature");
    if (q.has("nodes")) {
      const auto n = q.require<Index>("nodes");
      if (n < 1) throw ConfigError(q.where("nodes") + ": must be positive");
      c.quadrature.nodes = static_cast<std::size_t>(n);
      c.quadrature_nodes_set = true;
    }
    c.quadrature.mode = detail::pick<QuadratureMode>(
        q.get<std::string>("mode", "grid"),
        {{"grid", QuadratureMode::grid}, {"monte_carlo", QuadratureMode::monte_carlo}}, q.where("mode"));
    c.quadrature.resample = q.get<bool>("resample", false);
    q.finish();
  }

  if (root.has("indicator")) {
    Block ib = root.child("indicator");
    auto& ind = c.indicator;
    const std::string kind = ib.get<std::string>("kind", "I3");
    ind.normalization = {};
    if (kind == "I1_area_norm") {
      ind.kind = metrics::IndicatorKind::I1;
      ind.normalization.kind = metrics::NormalizationKind::area_power;
    } else if (kind == "convex_combo") {
      ind.kind = metrics::IndicatorKind::I1;
      ind.normalization.kind = metrics::NormalizationKind::convex_combo;
    } else {
      ind.kind = pick<metrics::IndicatorKind>(
          kind, {{"I1", metrics::IndicatorKind::I1}, {"I2", metrics::IndicatorKind::I2}, {"I3", metrics::IndicatorKind::I3}},
          ib.where("kind"));
    }
    ind.reference_kind = pick<metrics::ReferenceKind>(
        ib.get<std::string>("reference_kind", ind.kind == metrics::IndicatorKind::I3 ? "antiutopia" : "utopia"),
        {{"utopia", metrics::ReferenceKind::utopia}, {"antiutopia", metrics::ReferenceKind::antiutopia}},
        ib.where("reference_kind"));
    if (ind.kind == metrics::IndicatorKind::I3 && ind.reference_kind != metrics::ReferenceKind::antiutopia) {
      throw ConfigError(ib.where("reference_kind") + ": I3 is defined with the antiutopia point");
    }
    if (ib.has("reference")) {
      const json& r = ib.raw("reference");
      if (r.is_string()) {
        if (r.get<std::string>() != "auto") throw ConfigError(ib.where("reference") + ": expected \"auto\" or a point");
        c.reference_auto = true;
      } else {
        ind.reference = Block::to_vec(r, ib.where("reference"));
        c.reference_auto = false;
      }
    }
    c.reference_margin = ib.get<double>("reference_margin", c.reference_margin);
    ind.lambda = ib.get<double>("lambda", ind.lambda);
    ind.raw_distance = ib.get<bool>("raw_distance", false);
    ind.i2_eps = ib.get<double>("i2_smoothing", ind.i2_eps);
    const std::string dir = ib.get<std::string>("direction", "auto");
    if (dir != "auto") {
      ind.direction = pick<metrics::Direction>(
          dir, {{"maximize", metrics::Direction::maximize}, {"minimize", metrics::Direction::minimize}},
          ib.where("direction"));
    }
    if (ib.has("normalization")) {
      Block nb = ib.child("normalization");
      auto& n = ind.normalization;
      n.kind = pick<metrics::NormalizationKind>(
          nb.get<std::string>("type", "none"),
          {{"none", metrics::NormalizationKind::none},
           {"area_power", metrics::NormalizationKind::area_power},
           {"convex_combo", metrics::NormalizationKind::convex_combo}},
          nb.where("type"));
      n.beta = nb.get<double>("beta", n.beta);
      n.w1 = nb.get<double>("w1", n.w1);
      n.w2 = nb.get<double>("w2", n.w2);
      nb.finish();
    }
    ib.finish();
  }

  if (root.has("optimizer")) {
    Block o = root.child("optimizer");
    auto& opt = c.optimizer;
    opt.learning_rate = o.get<double>("learning_rate", opt.learning_rate);
    opt.decay = o.get<bool>("decay", opt.decay);
    opt.max_iterations = o.get<Index>("iterations", opt.max_iterations);
    opt.convergence_window = o.get<Index>("convergence_window", opt.convergence_window);
    opt.convergence_tol = o.get<double>("convergence_tol", opt.convergence_tol);
    opt.divergence_window = o.get<Index>("divergence_window", opt.divergence_window);
    o.finish();
    opt.validate();
  }

  if (root.has("estimation")) {
    Block e = root.child("estimation");
    c.estimation = pick<EstimationMode>(e.get<std::string>("mode", "closed_form"),
                                        {{"closed_form", EstimationMode::closed_form},
                                         {"estimated", EstimationMode::estimated}},
                                        e.where("mode"));
    c.trajectories = e.get<Index>("trajectories", c.trajectories);
    if (c.trajectories < 1) throw ConfigError(e.where("trajectories") + ": must be positive");
    if (e.has("horizon")) c.lqg.horizon = e.require<Index>("horizon");
    c.estimator.baseline = e.get<bool>("baseline", false);
    c.estimator.symmetrize = e.get<bool>("symmetrize", true);
    c.estimator.batches = e.get<Index>("batches", c.estimator.batches);
    if (c.estimator.batches < 1) throw ConfigError(e.where("batches") + ": must be positive");
    e.finish();
  }

  if (root.has("evaluation")) {
    Block e = root.child("evaluation");
    const auto pts = e.get<Index>("frontier_points", 100);
    if (pts < 1) throw ConfigError(e.where("frontier_points") + ": must be positive");
    c.frontier_points = static_cast<std::size_t>(pts);
    c.dominance_fraction = e.get<double>("dominance_fraction", c.dominance_fraction);
    if (e.has("hypervolume_reference")) {
      const json& r = e.raw("hypervolume_reference");
      if (!r.is_string()) c.hypervolume_reference = Block::to_vec(r, e.where("hypervolume_reference"));
      else if (r.get<std::string>() != "auto") throw ConfigError(e.where("hypervolume_reference") + ": expected \"auto\" or a point");
    }
    e.finish();
  }

  if (root.has("seed")) {
    const json& s = root.raw("seed");
    if (!s.is_number_unsigned()) throw ConfigError("$.seed: expected a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }

  if (root.has("output")) {
    Block o = root.child("output");
    c.output_dir = o.get<std::string>("dir", c.output_dir);
    c.trace_file = o.get<std::string>("trace", c.trace_file);
    c.frontier_file = o.get<std::string>("frontier", c.frontier_file);
    c.summary_file = o.get<std::string>("summary", c.summary_file);
    o.finish();
  }

  root.finish();
  if (c.domain == DomainKind::reservoir) {
    if (j.contains("estimation") && j.at("estimation").value("mode", "estimated") == "closed_form") {
      throw ConfigError("$.estimation.mode: the reservoir domain has no closed form");
    }
    c.estimation = EstimationMode::estimated;
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(parse_json_text(ss.str(), path));
}

/// Everything needed to run an experiment.
struct Experiment {
  ExperimentConfig config;
  Problem problem;
  Vec rho0;
  Vec utopia;
  Vec antiutopia;
  Vec hypervolume_reference;
};

inline Experiment build_experiment(const ExperimentConfig& cfg, const MapRegistry& registry = MapRegistry()) {
  Experiment ex;
  ex.config = cfg;
  auto map = std::make_shared<const ParametricMap>(registry.make(cfg.map_id, cfg.map_options));
  ex.rho0 = cfg.rho0.size() ? cfg.rho0 : Vec::Zero(map->rho_dim());
  if (ex.rho0.size() != map->rho_dim()) {
    throw ConfigError("$.map.rho0: map '" + cfg.map_id + "' expects " + std::to_string(map->rho_dim()) +
                      " parameters, got " + std::to_string(ex.rho0.size()));
  }
  Problem& p = ex.problem;
  p.map = map;
  p.indicator = cfg.indicator;
  p.quadrature = cfg.quadrature;
  if (!cfg.quadrature_nodes_set && map->domain().kind == LatentKind::simplex) p.quadrature.nodes = 105;
  p.seed = cfg.seed;

  if (cfg.domain == DomainKind::lqg) {
    lqg::LqgSpec spec = cfg.lqg;
    switch (cfg.layout) {
      case LayoutChoice::diagonal:
        spec.layout = lqg::GainLayout::diagonal;
        break;
      case LayoutChoice::full:
        spec.layout = lqg::GainLayout::full;
        break;
      case LayoutChoice::automatic:
        spec.layout = map->theta_dim() == spec.n * spec.n && spec.n > 1 ? lqg::GainLayout::full
                                                                         : lqg::GainLayout::diagonal;
        break;
    }
    if (cfg.estimation == EstimationMode::closed_form) {
      p.model = std::make_shared<LqgClosedFormModel>(spec, cfg.lqg_derivatives);
    } else {
      p.model = make_lqg_estimated_model(spec, cfg.trajectories, cfg.estimator);
    }
    const lqg::ReferencePoints refs = lqg::reference_points(spec, cfg.reference_margin);
    ex.utopia = refs.utopia;
    ex.antiutopia = refs.antiutopia;
  } else {
    reservoir::ReservoirSpec spec = cfg.reservoir;
    p.model = make_reservoir_model(spec, cfg.estimator);
    // References from the map's endpoints at rho0.
    std::vector<Vec> ends;
    for (double t : {0.0, 1.0}) {
      const Vec theta = map->phi(ex.rho0, Vec::Constant(1, t));
      ends.push_back(reservoir::evaluate_J(spec, theta, derive_seed(cfg.seed, ends.size(), 0xe0)));
    }
    ex.utopia = ends[0].cwiseMax(ends[1]);
    ex.antiutopia = ends[0].cwiseMin(ends[1]);
    ex.utopia += cfg.reference_margin * ex.utopia.cwiseAbs();
    ex.antiutopia -= cfg.reference_margin * ex.antiutopia.cwiseAbs();
  }
  if (map->theta_dim() != p.model->param_dim()) {
    throw ConfigError("$.map.id: map '" + cfg.map_id + "' produces " + std::to_string(map->theta_dim()) +
                      " policy parameters, domain expects " + std::to_string(p.model->param_dim()));
  }
  if (cfg.reference_auto || p.indicator.reference.size() == 0) {
    p.indicator.reference =
        p.indicator.reference_kind == metrics::ReferenceKind::utopia ? ex.utopia : ex.antiutopia;
  }
  ex.hypervolume_reference = cfg.hypervolume_reference.size() ? cfg.hypervolume_reference : ex.antiutopia;
  p.validate();
  return ex;
}

}  // namespace pmga::config
