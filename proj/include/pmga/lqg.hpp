#pragma once

// Multi-objective discrete-time LQG with uncoupled dynamics (A = B = I):
//   s' = s + a,   a ~ N(K s, Sigma)
// Objective i penalizes state i and the actions on the other axes; the xi
// perturbation mixes in the complementary terms so that every R_i is positive
// definite. Returns, Jacobians and Hessians w.r.t. the gain are available in
// closed form through the discounted Lyapunov equation
//   P_i = Q_i + K^T R_i K + gamma (I+K)^T P_i (I+K).

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pmga/common.hpp"
#include "pmga/estimators.hpp"
#include "pmga/finite_difference.hpp"
#include "pmga/matcalc.hpp"
#include "pmga/parallel.hpp"
#include "pmga/policy.hpp"
#include "pmga/rng.hpp"
#include "pmga/trajectory.hpp"

namespace pmga::lqg {

enum class GainLayout {
  full,      // theta = vec(K), column-major, d = n^2
  diagonal,  // K = diag(theta), d = n
};

enum class DerivativeMode { analytic, finite_difference };

struct LqgSpec {
  Index n = 2;
  double gamma = 0.9;
  double xi = 0.1;
  Mat sigma = Mat::Identity(2, 2);
  Vec s0 = Vec::Constant(2, 10.0);
  Index horizon = 50;
  // Literal linear cost xi * a_i in place of xi * a_i^2.
  bool linear_action_term = false;
  GainLayout layout = GainLayout::diagonal;

  /// gamma = 0.9, xi = 0.1, Sigma = I, s0 = 10 * ones.
  static LqgSpec standard(Index n = 2, GainLayout layout = GainLayout::diagonal) {
    LqgSpec s;
    s.n = n;
    s.sigma = Mat::Identity(n, n);
    s.s0 = Vec::Constant(n, 10.0);
    s.layout = layout;
    return s;
  }

  Index objectives() const { return n; }
  Index param_dim() const { return layout == GainLayout::full ? n * n : n; }

  void validate() const {
    if (n < 1) throw ConfigError("lqg: n must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("lqg: gamma must lie in (0, 1)");
    if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("lqg: xi must lie in [0, 1]");
    if (sigma.rows() != n || sigma.cols() != n) throw ConfigError("lqg: Sigma must be n x n");
    if (s0.size() != n) throw ConfigError("lqg: s0 must have length n");
    if (horizon < 1) throw ConfigError("lqg: horizon must be positive");
  }
};

struct CostMatrices {
  Mat q;
  Mat r;
};

/// Q_i = (1-xi) e_i e_i^T + xi (I - e_i e_i^T);
/// R_i = (1-xi) (I - e_i e_i^T) + xi e_i e_i^T  (the xi e_i e_i^T part is
/// dropped under linear_action_term, where the cost is xi * a_i instead).
inline CostMatrices cost_matrices(const LqgSpec& spec, Index i) {
  if (i < 0 || i >= spec.n) throw DomainError("lqg: objective index out of range");
  const Index n = spec.n;
  Mat e = Mat::Zero(n, n);
  e(i, i) = 1.0;
  const Mat id = Mat::Identity(n, n);
  CostMatrices c;
  c.q = (1.0 - spec.xi) * e + spec.xi * (id - e);
  c.r = (1.0 - spec.xi) * (id - e);
  if (!spec.linear_action_term) c.r += spec.xi * e;
  return c;
}

/// r_i(s, a) = -(1-xi)(s_i^2 + sum_{j!=i} a_j^2) - xi(sum_{j!=i} s_j^2 + a_i^2)
/// (a_i instead of a_i^2 under linear_action_term).
inline double reward(const LqgSpec& spec, Index i, const Vec& s, const Vec& a) {
  require_dims(s.size() == spec.n && a.size() == spec.n, "lqg::reward: dimension mismatch");
  const CostMatrices c = cost_matrices(spec, i);
  double cost = s.dot(c.q * s) + a.dot(c.r * a);
  if (spec.linear_action_term) cost += spec.xi * a[i];
  return -cost;
}

inline Vec rewards(const LqgSpec& spec, const Vec& s, const Vec& a) {
  Vec r(spec.n);
  for (Index i = 0; i < spec.n; ++i) r[i] = reward(spec, i, s, a);
  return r;
}

inline Mat gain_matrix(const LqgSpec& spec, const Vec& theta) {
  require_dims(theta.size() == spec.param_dim(), "lqg: theta has length " +
                                                     std::to_string(theta.size()) + ", expected " +
                                                     std::to_string(spec.param_dim()));
  if (spec.layout == GainLayout::full) return matcalc::unvec(theta, spec.n, spec.n);
  return theta.asDiagonal();
}

inline Vec theta_from_gain(const LqgSpec& spec, const Mat& k) {
  require_dims(k.rows() == spec.n && k.cols() == spec.n, "lqg: gain must be n x n");
  if (spec.layout == GainLayout::full) return matcalc::vec(k);
  return k.diagonal();
}

/// Positions of the layout's parameters inside vec(K).
inline std::vector<Index> parameter_positions(const LqgSpec& spec) {
  std::vector<Index> pos;
  if (spec.layout == GainLayout::full) {
    for (Index k = 0; k < spec.n * spec.n; ++k) pos.push_back(k);
  } else {
    for (Index j = 0; j < spec.n; ++j) pos.push_back(j + spec.n * j);
  }
  return pos;
}

/// Spectral radius of sqrt(gamma) (I + K).
inline double discounted_spectral_radius(const LqgSpec& spec, const Mat& k) {
  const Mat a = Mat::Identity(spec.n, spec.n) + k;
  Eigen::EigenSolver<Mat> es(a, false);
  return std::sqrt(spec.gamma) * es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_stable(const LqgSpec& spec, const Vec& theta) {
  return discounted_spectral_radius(spec, gain_matrix(spec, theta)) < 1.0 - 1e-12;
}

struct LqgEvaluation {
  Vec j;         // q
  Mat jacobian;  // q x d
  Mat hessian;   // (q*d) x d, block i is the Hessian of J_i
};

namespace detail {

// Solves X - gamma A^T X A = rhs for symmetric rhs via the vec/Kronecker form.
class LyapunovSolver {
 public:
  LyapunovSolver(const Mat& a, double gamma) : n_(a.rows()) {
    const Mat at = a.transpose();
    const Mat op = Mat::Identity(n_ * n_, n_ * n_) - gamma * matcalc::kron(at, at);
    lu_.compute(op);
  }
  Mat solve(const Mat& rhs) const {
    const Vec x = lu_.solve(matcalc::vec(rhs));
    const Mat out = matcalc::unvec(x, n_, n_);
    return 0.5 * (out + out.transpose());
  }

 private:
  Index n_;
  Eigen::PartialPivLU<Mat> lu_;
};

inline Mat unit_direction(Index n, Index pos) {
  Mat e = Mat::Zero(n, n);
  e(pos % n, pos / n) = 1.0;
  return e;
}

}  // namespace detail

/// Closed-form return vector and (optionally) its analytic derivatives w.r.t.
/// theta in the spec's layout.
inline LqgEvaluation closed_form(const LqgSpec& spec, const Vec& theta, bool with_jacobian = true,
                                 bool with_hessian = true) {
  spec.validate();
  const Index n = spec.n;
  const Index q = spec.objectives();
  const Mat k = gain_matrix(spec, theta);
  const double rad = discounted_spectral_radius(spec, k);
  if (!(rad < 1.0 - 1e-12)) {
    throw InstabilityError("lqg: closed loop sqrt(gamma)(I+K) has spectral radius " +
                           std::to_string(rad) + " >= 1");
  }
  const double g = spec.gamma;
  const Mat id = Mat::Identity(n, n);
  const Mat a = id + k;
  const detail::LyapunovSolver lyap(a, g);
  const Eigen::PartialPivLU<Mat> lin_lu(id - g * a.transpose());
  const std::vector<Index> pos = parameter_positions(spec);
  const Index d = static_cast<Index>(pos.size());
  std::vector<Mat> dirs;
  for (Index p : pos) dirs.push_back(detail::unit_direction(n, p));

  const Vec& s0 = spec.s0;
  const double tail = 1.0 / (1.0 - g);
  // Value J of a quadratic-plus-linear value function (P, l).
  auto value = [&](const Mat& p, const Vec& l, double r_trace) {
    return -s0.dot(p * s0) - l.dot(s0) - (r_trace + g * (p * spec.sigma).trace()) * tail;
  };

  LqgEvaluation out;
  out.j.resize(q);
  if (with_jacobian) out.jacobian.resize(q, d);
  if (with_hessian) out.hessian.resize(q * d, d);

  for (Index i = 0; i < q; ++i) {
    const CostMatrices c = cost_matrices(spec, i);
    const Mat p = lyap.solve(c.q + k.transpose() * c.r * k);
    const Vec ei = id.col(i);
    const double lin = spec.linear_action_term ? spec.xi : 0.0;
    const Vec l = lin_lu.solve(lin * k.transpose() * ei);
    out.j[i] = value(p, l, (c.r * spec.sigma).trace());
    if (!with_jacobian && !with_hessian) continue;

    std::vector<Mat> dp(d);
    std::vector<Vec> dl(d);
    for (Index u = 0; u < d; ++u) {
      const Mat& e = dirs[u];
      const Mat dm = e.transpose() * c.r * k + k.transpose() * c.r * e;
      dp[u] = lyap.solve(dm + g * (e.transpose() * p * a + a.transpose() * p * e));
      dl[u] = lin_lu.solve(lin * e.transpose() * ei + g * e.transpose() * l);
      if (with_jacobian) out.jacobian(i, u) = value(dp[u], dl[u], 0.0);
    }
    if (!with_hessian) continue;
    for (Index u = 0; u < d; ++u) {
      const Mat& e = dirs[u];
      for (Index v = 0; v <= u; ++v) {
        const Mat& f = dirs[v];
        const Mat d2m = e.transpose() * c.r * f + f.transpose() * c.r * e;
        const Mat rhs = d2m + g * (e.transpose() * dp[v] * a + a.transpose() * dp[v] * e +
                                   f.transpose() * dp[u] * a + a.transpose() * dp[u] * f +
                                   e.transpose() * p * f + f.transpose() * p * e);
        const Mat d2p = lyap.solve(rhs);
        const Vec d2l = lin_lu.solve(g * (e.transpose() * dl[v] + f.transpose() * dl[u]));
        const double h = value(d2p, d2l, 0.0);
        out.hessian(i * d + u, v) = h;
        out.hessian(i * d + v, u) = h;
      }
    }
  }
  return out;
}

inline Vec closed_form_J(const LqgSpec& spec, const Vec& theta) {
  return closed_form(spec, theta, false, false).j;
}

/// Derivatives by Richardson-extrapolated central differences of closed_form_J.
inline LqgEvaluation closed_form_fd(const LqgSpec& spec, const Vec& theta, double rel_step = 1e-3) {
  LqgEvaluation out;
  out.j = closed_form_J(spec, theta);
  const Index q = spec.objectives();
  const Index d = theta.size();
  out.jacobian = fd::jacobian_richardson([&](const Vec& x) { return closed_form_J(spec, x); }, theta,
                                         rel_step);
  out.hessian.resize(q * d, d);
  for (Index i = 0; i < q; ++i) {
    out.hessian.block(i * d, 0, d, d) = fd::hessian_richardson(
        [&](const Vec& x) { return closed_form_J(spec, x)[i]; }, theta, rel_step);
  }
  return out;
}

inline LqgEvaluation evaluate(const LqgSpec& spec, const Vec& theta, DerivativeMode mode) {
  return mode == DerivativeMode::analytic ? closed_form(spec, theta) : closed_form_fd(spec, theta);
}

inline Mat closed_form_jacobian(const LqgSpec& spec, const Vec& theta,
                                DerivativeMode mode = DerivativeMode::analytic) {
  return mode == DerivativeMode::analytic ? closed_form(spec, theta, true, false).jacobian
                                          : closed_form_fd(spec, theta).jacobian;
}

inline Mat closed_form_hessian(const LqgSpec& spec, const Vec& theta,
                               DerivativeMode mode = DerivativeMode::analytic) {
  return evaluate(spec, theta, mode).hessian;
}

/// Gaussian policy a ~ N(K s, Sigma) with the layout's parameter Jacobian:
/// full: Phi(s) = s^T (x) I_n; diagonal: Phi(s) = diag(s).
inline LinearGaussianPolicy make_policy(const LqgSpec& spec, const Vec& theta) {
  require_dims(theta.size() == spec.param_dim(), "lqg::make_policy: theta length mismatch");
  const Index n = spec.n;
  const GainLayout layout = spec.layout;
  auto features = [n, layout](const Vec& s) -> Mat {
    if (layout == GainLayout::full) return matcalc::kron(s.transpose(), Mat::Identity(n, n));
    return s.asDiagonal();
  };
  return LinearGaussianPolicy(features, theta, spec.sigma);
}

inline Trajectory rollout(const LqgSpec& spec, const LinearGaussianPolicy& policy, Index horizon,
                          Rng& rng) {
  Trajectory tr;
  tr.rewards.resize(horizon, spec.objectives());
  Vec s = spec.s0;
  for (Index k = 0; k < horizon; ++k) {
    const Vec a = policy.sample(s, rng);
    tr.states.push_back(s);
    tr.actions.push_back(a);
    tr.rewards.row(k) = rewards(spec, s, a).transpose();
    s = s + a;
  }
  return tr;
}

/// n_episodes independent rollouts; episode e uses generator derive_seed(seed, e).
inline std::vector<Trajectory> simulate(const LqgSpec& spec, const Vec& theta, Index horizon,
                                        Index n_episodes, std::uint64_t seed) {
  const LinearGaussianPolicy policy = make_policy(spec, theta);
  std::vector<Trajectory> out(static_cast<std::size_t>(n_episodes));
  parallel_for(out.size(), [&](std::size_t e) {
    Rng rng = make_rng(seed, e);
    out[e] = rollout(spec, policy, horizon, rng);
  });
  return out;
}

/// Sampler for the likelihood-ratio estimators (horizon-H discounted returns).
inline est::TrajectorySampler trajectory_sampler(const LqgSpec& spec, const Vec& theta, Index horizon) {
  auto policy = std::make_shared<const LinearGaussianPolicy>(make_policy(spec, theta));
  return [spec, policy, horizon](Rng& rng) {
    return est::score_trajectory(rollout(spec, *policy, horizon, rng), *policy, spec.gamma);
  };
}

/// gamma^H / (1 - gamma) relative weight of the truncated tail.
inline double truncation_tail(const LqgSpec& spec, Index horizon) {
  return std::pow(spec.gamma, static_cast<double>(horizon)) / (1.0 - spec.gamma);
}

/// Optimal gain for objective i alone (discounted Riccati iteration with
/// A = B = I). Under linear_action_term this is the optimal feedback part of
/// the quadratic problem only.
inline Mat riccati_optimal_gain(const LqgSpec& spec, Index i, int max_iter = 100000,
                                double tol = 1e-14) {
  const CostMatrices c = cost_matrices(spec, i);
  const Index n = spec.n;
  const double g = spec.gamma;
  Mat r = c.r;
  if (spec.linear_action_term) r += spec.xi * Mat::Identity(n, n).col(i) * Mat::Identity(n, n).row(i);
  Mat p = c.q;
  for (int it = 0; it < max_iter; ++it) {
    const Mat gain_term = (r + g * p).ldlt().solve(g * p);
    const Mat next = c.q + g * p - g * p * gain_term;
    const double delta = (next - p).cwiseAbs().maxCoeff();
    p = 0.5 * (next + next.transpose());
    if (delta < tol * std::max(1.0, p.cwiseAbs().maxCoeff())) break;
  }
  return -(r + g * p).ldlt().solve(g * p);
}

struct ReferencePoints {
  Vec utopia;
  Vec antiutopia;
  Mat optima;  // q x q, column i = J at the optimum of objective i
};

/// Utopia / antiutopia from the single-objective optima, each moved outward by
/// `margin` of its magnitude (utopia better, antiutopia worse).
inline ReferencePoints reference_points(const LqgSpec& spec, double margin = 0.05) {
  LqgSpec full = spec;
  full.layout = GainLayout::full;
  const Index q = spec.objectives();
  ReferencePoints out;
  out.optima.resize(q, q);
  for (Index i = 0; i < q; ++i) {
    const Mat k = riccati_optimal_gain(spec, i);
    out.optima.col(i) = closed_form_J(full, matcalc::vec(k));
  }
  out.utopia = out.optima.rowwise().maxCoeff();
  out.antiutopia = out.optima.rowwise().minCoeff();
  out.utopia += margin * out.utopia.cwiseAbs();
  out.antiutopia -= margin * out.antiutopia.cwiseAbs();
  return out;
}

}  // namespace pmga::lqg
