#pragma once

// Manifold objective J(rho) = integral over T of I(J(phi_rho(t))) vol(T(t)) dt,
// T = D_theta J * D_t phi, and its exact gradient
//   dJ/drho_i = integral [dI/drho_i vol + I d vol/drho_i] dt
//   d vol/drho_i = gram_det_row_derivative(T) vec(D_rho_i T) / (2 vol)
//   vec(D_rho_i T) = (D_t phi^T (x) I_q) D_theta(vec D_theta J) D_rho_i phi
//                    + (I_b (x) D_theta J) vec(D_rho_i D_t phi)
// followed by the learning loop and frontier evaluation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmga/common.hpp"
#include "pmga/estimators.hpp"
#include "pmga/finite_difference.hpp"
#include "pmga/lqg.hpp"
#include "pmga/manifold.hpp"
#include "pmga/matcalc.hpp"
#include "pmga/metrics.hpp"
#include "pmga/parallel.hpp"
#include "pmga/reservoir.hpp"
#include "pmga/rng.hpp"

namespace pmga {

// ---------------------------------------------------------------------------
// Derivative sources
// ---------------------------------------------------------------------------

/// Returns and derivatives at one policy parameter. In estimated mode the
/// per-batch accumulators are kept for jackknife replicates.
struct NodeDerivatives {
  Vec j;
  Mat g;  // q x d
  Mat h;  // q*d x d (empty when not requested)
  std::shared_ptr<const est::BatchedEstimate> batches;
};

class ReturnModel {
 public:
  virtual ~ReturnModel() = default;
  virtual Index objectives() const = 0;
  virtual Index param_dim() const = 0;
  /// J, D_theta J and (if with_hessian) the Hessian stack at theta. seed is
  /// used only by sampling-based models.
  virtual NodeDerivatives derivatives(const Vec& theta, bool with_hessian, std::uint64_t seed) const = 0;
  /// Returns used for frontier reports.
  virtual Vec returns(const Vec& theta, std::uint64_t seed) const = 0;
  virtual bool estimated() const { return false; }
};

class LqgClosedFormModel : public ReturnModel {
 public:
  explicit LqgClosedFormModel(lqg::LqgSpec spec, lqg::DerivativeMode mode = lqg::DerivativeMode::analytic)
      : spec_(std::move(spec)), mode_(mode) {
    spec_.validate();
  }
  Index objectives() const override { return spec_.objectives(); }
  Index param_dim() const override { return spec_.param_dim(); }
  NodeDerivatives derivatives(const Vec& theta, bool with_hessian, std::uint64_t) const override {
    NodeDerivatives out;
    if (mode_ == lqg::DerivativeMode::analytic) {
      auto e = lqg::closed_form(spec_, theta, true, with_hessian);
      out.j = std::move(e.j);
      out.g = std::move(e.jacobian);
      out.h = std::move(e.hessian);
    } else {
      auto e = lqg::closed_form_fd(spec_, theta);
      out.j = std::move(e.j);
      out.g = std::move(e.jacobian);
      if (with_hessian) out.h = std::move(e.hessian);
    }
    return out;
  }
  Vec returns(const Vec& theta, std::uint64_t) const override { return lqg::closed_form_J(spec_, theta); }
  const lqg::LqgSpec& spec() const { return spec_; }

 private:
  lqg::LqgSpec spec_;
  lqg::DerivativeMode mode_;
};

/// Likelihood-ratio estimates from n trajectories per policy parameter.
class EstimatedModel : public ReturnModel {
 public:
  using SamplerFactory = std::function<est::TrajectorySampler(const Vec& theta)>;
  using ReturnsFn = std::function<Vec(const Vec& theta, std::uint64_t seed)>;

  EstimatedModel(Index q, Index d, SamplerFactory factory, ReturnsFn returns_fn, Index n,
                 est::EstimatorOptions opts = {})
      : q_(q), d_(d), factory_(std::move(factory)), returns_fn_(std::move(returns_fn)), n_(n), opts_(opts) {
    if (n_ < 1) throw ConfigError("estimated model: trajectory count must be positive");
  }
  Index objectives() const override { return q_; }
  Index param_dim() const override { return d_; }
  bool estimated() const override { return true; }
  NodeDerivatives derivatives(const Vec& theta, bool with_hessian, std::uint64_t seed) const override {
    est::EstimatorOptions opts = opts_;
    opts.with_hessian = with_hessian;
    auto batched = std::make_shared<const est::BatchedEstimate>(
        est::sample_derivatives(factory_(theta), n_, seed, opts));
    const est::DerivativeEstimate e = batched->pooled().result(opts.baseline, opts.symmetrize);
    return {e.j, e.jacobian, e.hessian, batched};
  }
  Vec returns(const Vec& theta, std::uint64_t seed) const override { return returns_fn_(theta, seed); }
  const est::EstimatorOptions& options() const { return opts_; }

 private:
  Index q_, d_;
  SamplerFactory factory_;
  ReturnsFn returns_fn_;
  Index n_;
  est::EstimatorOptions opts_;
};

inline std::shared_ptr<ReturnModel> make_lqg_estimated_model(const lqg::LqgSpec& spec, Index n,
                                                             est::EstimatorOptions opts = {}) {
  return std::make_shared<EstimatedModel>(
      spec.objectives(), spec.param_dim(),
      [spec](const Vec& theta) { return lqg::trajectory_sampler(spec, theta, spec.horizon); },
      [spec](const Vec& theta, std::uint64_t) { return lqg::closed_form_J(spec, theta); }, n, opts);
}

inline std::shared_ptr<ReturnModel> make_reservoir_model(const reservoir::ReservoirSpec& spec,
                                                         est::EstimatorOptions opts = {}) {
  spec.validate();
  return std::make_shared<EstimatedModel>(
      spec.objectives(), spec.param_dim(),
      [spec](const Vec& theta) { return reservoir::trajectory_sampler(spec, theta); },
      [spec](const Vec& theta, std::uint64_t seed) { return reservoir::evaluate_J(spec, theta, seed); },
      spec.learn_episodes, opts);
}

// ---------------------------------------------------------------------------
// Objective assembly
// ---------------------------------------------------------------------------

struct QuadratureConfig {
  std::size_t nodes = 100;
  QuadratureMode mode = QuadratureMode::grid;
  // Draw fresh Monte Carlo nodes / trajectory seeds at every iteration.
  bool resample = false;
};

struct Problem {
  std::shared_ptr<const ParametricMap> map;
  std::shared_ptr<const ReturnModel> model;
  metrics::IndicatorSpec indicator;
  QuadratureConfig quadrature;
  std::uint64_t seed = 0;
  double rank_tolerance = matcalc::kDefaultRankTolerance;

  void validate() const {
    if (!map || !model) throw ConfigError("problem: map and return model are required");
    if (map->theta_dim() != model->param_dim()) {
      throw ConfigError("problem: map produces " + std::to_string(map->theta_dim()) +
                        " policy parameters, domain expects " + std::to_string(model->param_dim()));
    }
    indicator.validate(model->objectives());
  }
};

/// One quadrature node of the objective.
struct FrontierSample {
  Vec t;
  double weight = 0.0;
  Vec theta;
  Vec j;
  Mat tangent;  // q x b
  double volume = 0.0;
  bool degenerate = false;
  double indicator = 0.0;
  Vec indicator_grad_j;
  Vec integrand_grad;  // d/drho of I * vol at this node
  Vec volume_grad;     // d/drho of vol at this node
};

struct ObjectiveResult {
  double value = 0.0;
  Vec gradient;   // empty when not requested
  double integral = 0.0;  // sum w I vol
  double area = 0.0;      // sum w vol
  Vec integral_grad;
  Vec area_grad;
  std::size_t degenerate_nodes = 0;
  Vec gradient_se;  // estimated models: jackknife standard errors
  std::vector<FrontierSample> samples;
};

namespace detail {

struct NodeInput {
  Vec t;
  double weight;
  Vec theta;
  Mat dt_phi;
  NodeDerivatives deriv;
};

inline std::vector<LatentSample> nodes_for(const Problem& p, std::uint64_t iteration) {
  const std::uint64_t stream = p.quadrature.resample ? iteration : 0;
  return sample_latent(p.map->domain(), p.quadrature.nodes, p.quadrature.mode,
                       derive_seed(p.seed, stream, 0x51));
}

inline std::uint64_t node_seed(const Problem& p, std::size_t k, std::uint64_t iteration) {
  const std::uint64_t stream = p.quadrature.resample ? iteration : 0;
  return derive_seed(derive_seed(p.seed, stream, 0x7e), k, 0x7f);
}

inline std::vector<NodeInput> compute_nodes(const Problem& p, const Vec& rho, bool with_hessian,
                                            std::uint64_t iteration) {
  const auto latent = nodes_for(p, iteration);
  std::vector<NodeInput> nodes(latent.size());
  parallel_for(latent.size(), [&](std::size_t k) {
    NodeInput& n = nodes[k];
    n.t = latent[k].t;
    n.weight = latent[k].weight;
    n.theta = p.map->phi(rho, n.t);
    n.dt_phi = p.map->d_phi_dt(rho, n.t);
    n.deriv = p.model->derivatives(n.theta, with_hessian, node_seed(p, k, iteration));
  });
  return nodes;
}

inline void apply_normalization(const metrics::Normalization& norm, ObjectiveResult& r, bool with_grad) {
  using metrics::NormalizationKind;
  switch (norm.kind) {
    case NormalizationKind::none:
      r.value = r.integral;
      if (with_grad) r.gradient = r.integral_grad;
      return;
    case NormalizationKind::area_power: {
      if (norm.beta == 0.0) {
        r.value = r.integral;
        if (with_grad) r.gradient = r.integral_grad;
        return;
      }
      if (!(r.area > 0.0)) throw DomainError("area normalization: frontier area is zero");
      const double scale = std::pow(r.area, -norm.beta);
      r.value = scale * r.integral;
      if (with_grad) {
        r.gradient = scale * r.integral_grad - norm.beta * scale / r.area * r.integral * r.area_grad;
      }
      return;
    }
    case NormalizationKind::convex_combo:
      r.value = norm.w1 * r.integral + norm.w2 * r.area;
      if (with_grad) r.gradient = norm.w1 * r.integral_grad + norm.w2 * r.area_grad;
      return;
  }
}

// Replicate selection: -1 pooled estimate, r >= 0 leave-batch-r-out.
inline NodeDerivatives replicate(const NodeDerivatives& d, int r, const est::EstimatorOptions& opts) {
  if (r < 0 || !d.batches) return d;
  est::DerivativeAccumulator acc;
  const auto& bs = d.batches->batches();
  for (std::size_t b = 0; b < bs.size(); ++b) {
    if (static_cast<int>(b) != r) acc.merge(bs[b]);
  }
  const auto e = acc.result(opts.baseline, opts.symmetrize);
  return {e.j, e.jacobian, e.hessian, nullptr};
}

inline ObjectiveResult assemble(const Problem& p, const Vec& rho, const std::vector<NodeInput>& nodes,
                                bool with_grad, bool keep_samples, int rep,
                                const est::EstimatorOptions& opts) {
  const Index q = p.model->objectives();
  const Index d = p.model->param_dim();
  const Index b = p.map->latent_dim();
  const Index m = p.map->rho_dim();
  std::vector<FrontierSample> samples(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t k) {
    const NodeInput& in = nodes[k];
    const NodeDerivatives nd = replicate(in.deriv, rep, opts);
    FrontierSample& s = samples[k];
    s.t = in.t;
    s.weight = in.weight;
    s.theta = in.theta;
    s.j = nd.j;
    s.tangent = nd.g * in.dt_phi;
    const matcalc::GramVolume gv = matcalc::gram_volume(s.tangent, p.rank_tolerance);
    s.degenerate = gv.degenerate;
    s.volume = gv.degenerate ? 0.0 : gv.volume;
    const metrics::IndicatorEval ind = metrics::evaluate_indicator(p.indicator, nd.j, &nd.g);
    s.indicator = ind.value;
    s.indicator_grad_j = ind.d_j;
    if (!with_grad) return;
    s.integrand_grad = Vec::Zero(m);
    s.volume_grad = Vec::Zero(m);
    if (s.degenerate) return;
    require_dims(nd.h.rows() == q * d && nd.h.cols() == d, "objective gradient needs the Hessian stack");
    const Mat dvec_g = matcalc::hessian_stack_to_jacobian_derivative(nd.h, q, d);
    const RowVec ddet = matcalc::gram_det_row_derivative(s.tangent, p.rank_tolerance);
    const Mat left = matcalc::kron(in.dt_phi.transpose(), Mat::Identity(q, q));
    const Mat right = matcalc::kron(Mat::Identity(b, b), nd.g);
    const bool uses_g = ind.d_g.size() > 0;
    for (Index i = 0; i < m; ++i) {
      const Vec dphi = p.map->d_phi_drho(rho, in.t, i);
      const Mat dphi_dt = p.map->d2_phi_drho_dt(rho, in.t, i);
      const Vec dvecg_i = dvec_g * dphi;
      const Vec dvec_t = left * dvecg_i + right * matcalc::vec(dphi_dt);
      double d_ind = ind.d_j.dot(nd.g * dphi);
      if (uses_g) d_ind += matcalc::vec(ind.d_g).dot(dvecg_i);
      const double dvol = ddet.dot(dvec_t) / (2.0 * s.volume);
      s.volume_grad[i] = dvol;
      s.integrand_grad[i] = d_ind * s.volume + s.indicator * dvol;
    }
  });

  ObjectiveResult r;
  if (with_grad) {
    r.integral_grad = Vec::Zero(m);
    r.area_grad = Vec::Zero(m);
  }
  for (const FrontierSample& s : samples) {
    if (s.degenerate) {
      ++r.degenerate_nodes;
      continue;
    }
    r.integral += s.weight * s.indicator * s.volume;
    r.area += s.weight * s.volume;
    if (with_grad) {
      r.integral_grad += s.weight * s.integrand_grad;
      r.area_grad += s.weight * s.volume_grad;
    }
  }
  apply_normalization(p.indicator.normalization, r, with_grad);
  if (keep_samples) r.samples = std::move(samples);
  return r;
}

inline est::EstimatorOptions estimator_options(const Problem& p) {
  if (const auto* em = dynamic_cast<const EstimatedModel*>(p.model.get())) return em->options();
  return {};
}

}  // namespace detail

struct ObjectiveOptions {
  bool with_gradient = true;
  bool keep_samples = false;
  // Estimated models: delete-one-batch jackknife standard errors of the gradient.
  bool jackknife = false;
  std::uint64_t iteration = 0;
};

inline ObjectiveResult evaluate_objective(const Problem& p, const Vec& rho, const ObjectiveOptions& o = {}) {
  p.validate();
  require_dims(rho.size() == p.map->rho_dim(), "objective: rho has length " + std::to_string(rho.size()) +
                                                   ", map expects " + std::to_string(p.map->rho_dim()));
  const auto opts = detail::estimator_options(p);
  const auto nodes = detail::compute_nodes(p, rho, o.with_gradient, o.iteration);
  ObjectiveResult r = detail::assemble(p, rho, nodes, o.with_gradient, o.keep_samples, -1, opts);
  if (o.jackknife && o.with_gradient && p.model->estimated() && !nodes.empty() && nodes.front().deriv.batches) {
    const auto nb = static_cast<int>(nodes.front().deriv.batches->batches().size());
    if (nb >= 2) {
      std::vector<Vec> reps;
      Vec mean = Vec::Zero(r.gradient.size());
      for (int b = 0; b < nb; ++b) {
        reps.push_back(detail::assemble(p, rho, nodes, true, false, b, opts).gradient);
        mean += reps.back();
      }
      mean /= nb;
      Vec var = Vec::Zero(mean.size());
      for (const Vec& g : reps) var.array() += (g - mean).array().square();
      r.gradient_se = (var * (static_cast<double>(nb - 1) / nb)).cwiseSqrt();
    }
  }
  return r;
}

inline double objective_J_rho(const Problem& p, const Vec& rho) {
  ObjectiveOptions o;
  o.with_gradient = false;
  return evaluate_objective(p, rho, o).value;
}

inline Vec gradient_J_rho(const Problem& p, const Vec& rho) { return evaluate_objective(p, rho).gradient; }

struct GradientCheck {
  Vec analytic;
  Vec numeric;
  double relative_error = 0.0;
};

/// Analytic gradient against Richardson central differences of objective_J_rho
/// on the same nodes (and trajectory seeds).
inline GradientCheck check_gradient(const Problem& p, const Vec& rho, double rel_step = 1e-4) {
  GradientCheck c;
  c.analytic = gradient_J_rho(p, rho);
  c.numeric = fd::gradient_richardson([&](const Vec& x) { return objective_J_rho(p, x); }, rho, rel_step);
  const double scale = c.numeric.size() ? c.numeric.cwiseAbs().maxCoeff() : 0.0;
  const double diff = c.numeric.size() ? (c.analytic - c.numeric).cwiseAbs().maxCoeff() : 0.0;
  c.relative_error = scale > 1e-12 ? diff / scale : diff;
  return c;
}

// ---------------------------------------------------------------------------
// Learning loop
// ---------------------------------------------------------------------------

struct OptimizerConfig {
  double learning_rate = 0.005;
  bool decay = false;  // eta_k = eta / sqrt(k + 1)
  Index max_iterations = 500;
  Index convergence_window = 50;
  double convergence_tol = 1e-6;
  Index divergence_window = 50;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw ConfigError("optimizer: learning rate must be nonnegative");
    if (max_iterations < 1) throw ConfigError("optimizer: iteration cap must be positive");
    if (convergence_window < 1 || divergence_window < 1) throw ConfigError("optimizer: windows must be positive");
    if (!(convergence_tol > 0.0)) throw ConfigError("optimizer: convergence tolerance must be positive");
  }
};

struct TraceRow {
  Index iteration = 0;
  double j_rho = 0.0;
  double grad_norm = 0.0;
  Vec rho;
  double wall_time_s = 0.0;
};

enum class LearnStatus { converged, diverging, max_iterations };

inline std::string to_string(LearnStatus s) {
  switch (s) {
    case LearnStatus::converged:
      return "converged";
    case LearnStatus::diverging:
      return "diverging";
    case LearnStatus::max_iterations:
      return "max_iterations";
  }
  return "unknown";
}

struct LearnResult {
  std::vector<TraceRow> trace;
  Vec rho;
  LearnStatus status = LearnStatus::max_iterations;
  bool converged = false;
  bool divergence_flag = false;
  Index divergence_iteration = -1;  // first iteration at which the flag was raised
};

/// Largest |J_k - J_{k-1}| / |J_k| over the last `count` steps of the trace.
inline double max_relative_step(const std::vector<TraceRow>& trace, std::size_t count) {
  double worst = 0.0;
  const std::size_t n = trace.size();
  for (std::size_t k = n > count ? n - count : 1; k < n; ++k) {
    const double denom = std::max(std::abs(trace[k].j_rho), std::numeric_limits<double>::min());
    worst = std::max(worst, std::abs(trace[k].j_rho - trace[k - 1].j_rho) / denom);
  }
  return worst;
}

/// rho <- rho +/- eta grad J(rho). Stops once every relative step in the
/// trailing convergence window is below the tolerance. The divergence flag is
/// raised (without stopping) once J(rho) has increased strictly for
/// divergence_window consecutive iterations.
inline LearnResult learn(const Problem& p, const OptimizerConfig& opt, const Vec& rho0,
                         const std::function<void(const TraceRow&)>& on_iteration = {}) {
  p.validate();
  opt.validate();
  require_dims(rho0.size() == p.map->rho_dim(), "learn: rho0 length does not match the map");
  const double sign = p.indicator.resolved_direction() == metrics::Direction::maximize ? 1.0 : -1.0;
  const auto start = std::chrono::steady_clock::now();
  LearnResult res;
  Vec rho = rho0;
  Index increasing = 0;
  for (Index k = 0; k < opt.max_iterations; ++k) {
    ObjectiveOptions oo;
    oo.iteration = static_cast<std::uint64_t>(k);
    const ObjectiveResult r = evaluate_objective(p, rho, oo);
    TraceRow row;
    row.iteration = k;
    row.j_rho = r.value;
    row.grad_norm = r.gradient.norm();
    row.rho = rho;
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!res.trace.empty()) {
      increasing = r.value > res.trace.back().j_rho ? increasing + 1 : 0;
    }
    res.trace.push_back(row);
    if (on_iteration) on_iteration(row);
    if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
      throw DomainError("learn: non-finite objective or gradient at iteration " + std::to_string(k));
    }
    if (increasing >= opt.divergence_window && !res.divergence_flag) {
      res.divergence_flag = true;
      res.divergence_iteration = k;
    }
    if (static_cast<Index>(res.trace.size()) > opt.convergence_window &&
        max_relative_step(res.trace, static_cast<std::size_t>(opt.convergence_window)) < opt.convergence_tol) {
      res.converged = true;
      break;
    }
    const double eta = opt.decay ? opt.learning_rate / std::sqrt(static_cast<double>(k + 1)) : opt.learning_rate;
    rho = rho + sign * eta * r.gradient;
  }
  res.rho = res.converged ? res.trace.back().rho : rho;
  res.status = res.converged ? LearnStatus::converged
                             : (res.divergence_flag ? LearnStatus::diverging : LearnStatus::max_iterations);
  return res;
}

// ---------------------------------------------------------------------------
// Frontier reports
// ---------------------------------------------------------------------------

struct FrontierReport {
  std::vector<Vec> t;
  std::vector<Vec> theta;
  std::vector<Vec> j;
  double area = 0.0;  // length (b = 1) or surface area (b = 2) of the swept J points
  double hypervolume = 0.0;
  Vec hypervolume_reference;
  std::size_t dominated = 0;       // robust count, eps = dominance_fraction * range
  std::size_t pareto_size = 0;     // points kept by pareto_filter at the same eps
  double dominance_fraction = 0.01;
  Vec j_min;
  Vec j_max;
};

/// Measure of the piecewise-linear frontier through the sweep points.
inline double swept_area(const LatentDomain& domain, const std::vector<Vec>& t, const std::vector<Vec>& j) {
  if (j.size() < 2) return 0.0;
  if (domain.kind == LatentKind::interval) {
    double len = 0.0;
    for (std::size_t k = 1; k < j.size(); ++k) len += (j[k] - j[k - 1]).norm();
    return len;
  }
  // Lattice ordering from latent_sweep: (i, j) with i + j <= m, j fastest.
  Index m = 0;
  while (static_cast<std::size_t>((m + 1) * (m + 2) / 2) < j.size()) ++m;
  auto index = [m](Index i, Index jj) { return static_cast<std::size_t>(i * (m + 1) - i * (i - 1) / 2 + jj); };
  auto tri = [&](std::size_t a, std::size_t b, std::size_t c) {
    const Vec u = j[b] - j[a];
    const Vec v = j[c] - j[a];
    const double uu = u.squaredNorm(), vv = v.squaredNorm(), uv = u.dot(v);
    return 0.5 * std::sqrt(std::max(0.0, uu * vv - uv * uv));
  };
  (void)t;
  double area = 0.0;
  for (Index i = 0; i < m; ++i) {
    for (Index jj = 0; i + jj < m; ++jj) {
      area += tri(index(i, jj), index(i + 1, jj), index(i, jj + 1));
      if (i + jj <= m - 2) area += tri(index(i + 1, jj), index(i, jj + 1), index(i + 1, jj + 1));
    }
  }
  return area;
}

inline FrontierReport summarize_frontier(const LatentDomain& domain, std::vector<Vec> t, std::vector<Vec> theta,
                                         std::vector<Vec> j, const Vec& hv_reference,
                                         double dominance_fraction = 0.01) {
  FrontierReport r;
  r.t = std::move(t);
  r.theta = std::move(theta);
  r.j = std::move(j);
  r.dominance_fraction = dominance_fraction;
  r.area = swept_area(domain, r.t, r.j);
  r.hypervolume_reference = hv_reference;
  if (hv_reference.size() > 0) r.hypervolume = metrics::hypervolume(r.j, hv_reference);
  if (!r.j.empty()) {
    const Vec eps = metrics::range_epsilon(r.j, dominance_fraction);
    r.dominated = metrics::dominated_count(r.j, eps);
    r.pareto_size = metrics::pareto_filter(r.j, eps).size();
    r.j_min = r.j.front();
    r.j_max = r.j.front();
    for (const Vec& x : r.j) {
      r.j_min = r.j_min.cwiseMin(x);
      r.j_max = r.j_max.cwiseMax(x);
    }
  }
  return r;
}

/// Dense latent sweep at rho. Returns are evaluated with model->returns using
/// per-point seeds derived from eval_seed.
inline FrontierReport evaluate_frontier(const Problem& p, const Vec& rho, std::size_t n_points,
                                        const Vec& hv_reference, std::uint64_t eval_seed = 0,
                                        double dominance_fraction = 0.01) {
  p.validate();
  const auto ts = latent_sweep(p.map->domain(), n_points);
  std::vector<Vec> theta(ts.size()), j(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) {
    theta[k] = p.map->phi(rho, ts[k]);
    j[k] = p.model->returns(theta[k], derive_seed(eval_seed, k, 0xf0));
  });
  return summarize_frontier(p.map->domain(), ts, std::move(theta), std::move(j), hv_reference,
                            dominance_fraction);
}

}  // namespace pmga
