#pragma once

// Small finite-horizon tabular MOMDP with a softmax policy, theta[s * A + a].
// Small enough to enumerate every trajectory, which makes the exact returns,
// the exact expectation of the likelihood-ratio estimators and the true
// per-sample bounds all computable.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "pmga/common.hpp"
#include "pmga/estimators.hpp"
#include "pmga/rng.hpp"

namespace pmga::tabular {

struct TabularMomdp {
  Index states = 2;
  Index actions = 2;
  Index horizon = 2;
  double gamma = 0.9;
  Vec initial;                                 // states
  std::vector<std::vector<Vec>> transition;    // [s][a] -> distribution over s'
  std::vector<Mat> reward;                     // [objective] -> states x actions

  Index objectives() const { return static_cast<Index>(reward.size()); }
  Index param_dim() const { return states * actions; }

  /// The 2-state, 2-action, H = 2, two-objective instance used in the tests.
  static TabularMomdp standard() {
    TabularMomdp m;
    m.initial = Vec(2);
    m.initial << 0.6, 0.4;
    m.transition.assign(2, std::vector<Vec>(2, Vec(2)));
    m.transition[0][0] << 0.8, 0.2;
    m.transition[0][1] << 0.3, 0.7;
    m.transition[1][0] << 0.5, 0.5;
    m.transition[1][1] << 0.1, 0.9;
    Mat r1(2, 2), r2(2, 2);
    r1 << 1.0, -0.5, 0.2, 0.8;
    r2 << -0.3, 0.9, 1.0, -0.7;
    m.reward = {r1, r2};
    return m;
  }
};

inline Vec policy_probs(const TabularMomdp& m, const Vec& theta, Index s) {
  require_dims(theta.size() == m.param_dim(), "tabular: theta length mismatch");
  const Vec logits = theta.segment(s * m.actions, m.actions);
  const Vec e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

inline Vec log_policy_grad(const TabularMomdp& m, const Vec& theta, Index s, Index a) {
  Vec g = Vec::Zero(m.param_dim());
  const Vec p = policy_probs(m, theta, s);
  g.segment(s * m.actions, m.actions) = -p;
  g[s * m.actions + a] += 1.0;
  return g;
}

inline Mat log_policy_hessian(const TabularMomdp& m, const Vec& theta, Index s) {
  Mat h = Mat::Zero(m.param_dim(), m.param_dim());
  const Vec p = policy_probs(m, theta, s);
  h.block(s * m.actions, s * m.actions, m.actions, m.actions) =
      p * p.transpose() - Mat(p.asDiagonal());
  return h;
}

struct Path {
  std::vector<Index> states;
  std::vector<Index> actions;
};

/// Calls fn(path, probability) for every length-H state/action path.
inline void enumerate_paths(const TabularMomdp& m, const Vec& theta,
                            const std::function<void(const Path&, double)>& fn) {
  Path path;
  std::function<void(Index, double)> rec = [&](Index s, double prob) {
    const Vec pa = policy_probs(m, theta, s);
    for (Index a = 0; a < m.actions; ++a) {
      path.states.push_back(s);
      path.actions.push_back(a);
      const double pr = prob * pa[a];
      if (static_cast<Index>(path.actions.size()) == m.horizon) {
        fn(path, pr);
      } else {
        const Vec& next = m.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        for (Index s2 = 0; s2 < m.states; ++s2) rec(s2, pr * next[s2]);
      }
      path.states.pop_back();
      path.actions.pop_back();
    }
  };
  for (Index s = 0; s < m.states; ++s) rec(s, m.initial[s]);
}

inline est::ScoredTrajectory score_path(const TabularMomdp& m, const Vec& theta, const Path& path) {
  const Index d = m.param_dim();
  est::ScoredTrajectory out{Vec::Zero(m.objectives()), Vec::Zero(d), Mat::Zero(d, d)};
  double g = 1.0;
  for (std::size_t k = 0; k < path.actions.size(); ++k) {
    const Index s = path.states[k];
    const Index a = path.actions[k];
    for (Index i = 0; i < m.objectives(); ++i) out.returns[i] += g * m.reward[static_cast<std::size_t>(i)](s, a);
    out.score += log_policy_grad(m, theta, s, a);
    out.score_hessian += log_policy_hessian(m, theta, s);
    g *= m.gamma;
  }
  return out;
}

inline Vec exact_J(const TabularMomdp& m, const Vec& theta) {
  Vec j = Vec::Zero(m.objectives());
  enumerate_paths(m, theta, [&](const Path& p, double pr) { j += pr * score_path(m, theta, p).returns; });
  return j;
}

/// Exact expectation of the per-trajectory Jacobian and Hessian samples.
inline est::DerivativeEstimate exact_estimator_expectation(const TabularMomdp& m, const Vec& theta) {
  const Index q = m.objectives();
  const Index d = m.param_dim();
  est::DerivativeEstimate e;
  e.j = Vec::Zero(q);
  e.jacobian = Mat::Zero(q, d);
  e.hessian = Mat::Zero(q * d, d);
  enumerate_paths(m, theta, [&](const Path& p, double pr) {
    const est::ScoredTrajectory s = score_path(m, theta, p);
    e.j += pr * s.returns;
    e.jacobian += pr * est::jacobian_sample(s);
    e.hessian += pr * est::hessian_sample(s);
  });
  return e;
}

inline est::TrajectorySampler trajectory_sampler(const TabularMomdp& m, const Vec& theta) {
  return [m, theta](Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&](const Vec& p) {
      const double x = u(rng);
      double c = 0.0;
      for (Index k = 0; k < p.size(); ++k) {
        c += p[k];
        if (x < c) return k;
      }
      return p.size() - 1;
    };
    Path path;
    Index s = draw(m.initial);
    for (Index k = 0; k < m.horizon; ++k) {
      const Index a = draw(policy_probs(m, theta, s));
      path.states.push_back(s);
      path.actions.push_back(a);
      s = draw(m.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]);
    }
    return score_path(m, theta, path);
  };
}

/// Tight per-step bounds for the estimator planner: R_i = max |r_i|,
/// D = max |d log pi / d theta|, G = max |d^2 log pi / d theta^2|.
inline est::EstimatorBounds true_bounds(const TabularMomdp& m, const Vec& theta) {
  est::EstimatorBounds b;
  b.gamma = m.gamma;
  b.horizon = m.horizon;
  b.r_bar.resize(m.objectives());
  for (Index i = 0; i < m.objectives(); ++i) b.r_bar[i] = m.reward[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff();
  for (Index s = 0; s < m.states; ++s) {
    for (Index a = 0; a < m.actions; ++a) {
      b.d_bar = std::max(b.d_bar, log_policy_grad(m, theta, s, a).cwiseAbs().maxCoeff());
    }
    b.g_bar = std::max(b.g_bar, log_policy_hessian(m, theta, s).cwiseAbs().maxCoeff());
  }
  return b;
}

}  // namespace pmga::tabular
