#pragma once

// Likelihood-ratio estimators of the return Jacobian and the stacked return
// Hessian. With g(tau) = sum_k grad log pi(a_k|s_k) and
// H(tau) = sum_k hess log pi(a_k|s_k), one trajectory contributes
//   Jacobian row i:   r_i(tau) g^T
//   Hessian block i:  r_i(tau) (g g^T + H)
// Estimates are sample means. Accumulators hold plain sums so partial
// estimates over disjoint trajectory sets merge exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "pmga/common.hpp"
#include "pmga/parallel.hpp"
#include "pmga/policy.hpp"
#include "pmga/rng.hpp"
#include "pmga/trajectory.hpp"

namespace pmga::est {

/// Sufficient statistics of one trajectory.
struct ScoredTrajectory {
  Vec returns;        // q, discounted
  Vec score;          // d, sum of log-policy gradients
  Mat score_hessian;  // d x d, sum of log-policy Hessians
};

using TrajectorySampler = std::function<ScoredTrajectory(Rng& rng)>;

inline ScoredTrajectory score_trajectory(const Trajectory& tr, const LinearGaussianPolicy& policy,
                                         double gamma) {
  const Index d = policy.param_dim();
  ScoredTrajectory out{tr.discounted_return(gamma), Vec::Zero(d), Mat::Zero(d, d)};
  for (Index k = 0; k < tr.horizon(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out.score += policy.log_grad(tr.states[ku], tr.actions[ku]);
    out.score_hessian += policy.log_hessian(tr.states[ku]);
  }
  return out;
}

/// Per-trajectory Jacobian sample r g^T (q x d).
inline Mat jacobian_sample(const ScoredTrajectory& s) { return s.returns * s.score.transpose(); }

/// Per-trajectory stacked Hessian sample (q*d x d).
inline Mat hessian_sample(const ScoredTrajectory& s) {
  const Index q = s.returns.size();
  const Index d = s.score.size();
  const Mat m = s.score * s.score.transpose() + s.score_hessian;
  Mat out(q * d, d);
  for (Index i = 0; i < q; ++i) out.block(i * d, 0, d, d) = s.returns[i] * m;
  return out;
}

struct EstimatorOptions {
  bool with_hessian = true;
  // Off by default: subtracts the batch-mean return (b_i = mean r_i).
  bool baseline = false;
  // Per-block 0.5 (H + H^T) after averaging.
  bool symmetrize = true;
  // Number of contiguous trajectory batches used for standard errors.
  Index batches = 20;
};

struct DerivativeEstimate {
  Index n = 0;
  Vec j;             // mean returns
  Mat jacobian;      // q x d
  Mat hessian;       // q*d x d (empty without Hessian)
  Mat jacobian_se;   // entrywise standard errors (batch means)
  Mat hessian_se;
};

/// Running sums over trajectories.
class DerivativeAccumulator {
 public:
  DerivativeAccumulator() = default;

  void add(const ScoredTrajectory& s, bool with_hessian = true) {
    const Index q = s.returns.size();
    const Index d = s.score.size();
    if (n_ == 0) init(q, d, with_hessian);
    require_dims(q == q_ && d == d_, "DerivativeAccumulator: inconsistent trajectory shapes");
    ++n_;
    sum_r_ += s.returns;
    sum_g_ += s.score;
    sum_rg_ += jacobian_sample(s);
    if (with_hessian_) {
      const Mat m = s.score * s.score.transpose() + s.score_hessian;
      sum_m_ += m;
      for (Index i = 0; i < q_; ++i) sum_rm_.block(i * d_, 0, d_, d_) += s.returns[i] * m;
    }
  }

  void merge(const DerivativeAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    require_dims(other.q_ == q_ && other.d_ == d_ && other.with_hessian_ == with_hessian_,
                 "DerivativeAccumulator: cannot merge different shapes");
    n_ += other.n_;
    sum_r_ += other.sum_r_;
    sum_g_ += other.sum_g_;
    sum_rg_ += other.sum_rg_;
    if (with_hessian_) {
      sum_m_ += other.sum_m_;
      sum_rm_ += other.sum_rm_;
    }
  }

  Index count() const { return n_; }

  /// Mean estimates (no standard errors).
  DerivativeEstimate result(bool baseline = false, bool symmetrize = true) const {
    if (n_ == 0) throw DomainError("DerivativeAccumulator: no trajectories");
    const double inv = 1.0 / static_cast<double>(n_);
    DerivativeEstimate e;
    e.n = n_;
    e.j = sum_r_ * inv;
    e.jacobian = sum_rg_ * inv;
    if (baseline) e.jacobian -= e.j * (sum_g_ * inv).transpose();
    if (with_hessian_) {
      e.hessian = sum_rm_ * inv;
      if (baseline) {
        const Mat mbar = sum_m_ * inv;
        for (Index i = 0; i < q_; ++i) e.hessian.block(i * d_, 0, d_, d_) -= e.j[i] * mbar;
      }
      if (symmetrize) {
        for (Index i = 0; i < q_; ++i) {
          const Mat b = e.hessian.block(i * d_, 0, d_, d_);
          e.hessian.block(i * d_, 0, d_, d_) = 0.5 * (b + b.transpose());
        }
      }
    }
    return e;
  }

 private:
  void init(Index q, Index d, bool with_hessian) {
    q_ = q;
    d_ = d;
    with_hessian_ = with_hessian;
    sum_r_ = Vec::Zero(q);
    sum_g_ = Vec::Zero(d);
    sum_rg_ = Mat::Zero(q, d);
    if (with_hessian) {
      sum_m_ = Mat::Zero(d, d);
      sum_rm_ = Mat::Zero(q * d, d);
    }
  }

  Index n_ = 0;
  Index q_ = 0;
  Index d_ = 0;
  bool with_hessian_ = true;
  Vec sum_r_, sum_g_;
  Mat sum_rg_, sum_m_, sum_rm_;
};

/// Estimate built from N sampled trajectories, kept as per-batch accumulators
/// so that delete-one-batch jackknife replicates are available.
class BatchedEstimate {
 public:
  BatchedEstimate(std::vector<DerivativeAccumulator> batches, EstimatorOptions opts)
      : batches_(std::move(batches)), opts_(opts) {}

  const std::vector<DerivativeAccumulator>& batches() const { return batches_; }

  DerivativeAccumulator pooled() const {
    DerivativeAccumulator all;
    for (const auto& b : batches_) all.merge(b);
    return all;
  }

  /// Pooled estimate with batch-means standard errors.
  DerivativeEstimate estimate() const {
    DerivativeEstimate e = pooled().result(opts_.baseline, opts_.symmetrize);
    const auto nb = static_cast<double>(batches_.size());
    e.jacobian_se = Mat::Zero(e.jacobian.rows(), e.jacobian.cols());
    if (opts_.with_hessian) e.hessian_se = Mat::Zero(e.hessian.rows(), e.hessian.cols());
    if (batches_.size() < 2) {
      e.jacobian_se.setConstant(std::numeric_limits<double>::infinity());
      if (opts_.with_hessian) e.hessian_se.setConstant(std::numeric_limits<double>::infinity());
      return e;
    }
    for (const auto& b : batches_) {
      const DerivativeEstimate be = b.result(opts_.baseline, opts_.symmetrize);
      e.jacobian_se.array() += (be.jacobian - e.jacobian).array().square();
      if (opts_.with_hessian) e.hessian_se.array() += (be.hessian - e.hessian).array().square();
    }
    const double scale = 1.0 / ((nb - 1.0) * nb);
    e.jacobian_se = (e.jacobian_se * scale).cwiseSqrt();
    if (opts_.with_hessian) e.hessian_se = (e.hessian_se * scale).cwiseSqrt();
    return e;
  }

  /// Leave-one-batch-out estimates (one per batch).
  std::vector<DerivativeEstimate> jackknife() const {
    std::vector<DerivativeEstimate> out;
    for (std::size_t skip = 0; skip < batches_.size(); ++skip) {
      DerivativeAccumulator acc;
      for (std::size_t b = 0; b < batches_.size(); ++b) {
        if (b != skip) acc.merge(batches_[b]);
      }
      out.push_back(acc.result(opts_.baseline, opts_.symmetrize));
    }
    return out;
  }

 private:
  std::vector<DerivativeAccumulator> batches_;
  EstimatorOptions opts_;
};

/// Draws N trajectories (trajectory j uses make_rng(seed, j)) and accumulates
/// them in index order, so the result is independent of the worker count.
inline BatchedEstimate sample_derivatives(const TrajectorySampler& sampler, Index n,
                                          std::uint64_t seed, const EstimatorOptions& opts = {}) {
  if (n < 1) throw DomainError("estimators: need at least one trajectory");
  const Index nb = std::clamp<Index>(opts.batches, 1, n);
  std::vector<DerivativeAccumulator> batches(static_cast<std::size_t>(nb));
  // Generate batch by batch to bound memory.
  parallel_for(batches.size(), [&](std::size_t b) {
    const Index lo = static_cast<Index>(b) * n / nb;
    const Index hi = (static_cast<Index>(b) + 1) * n / nb;
    for (Index j = lo; j < hi; ++j) {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(j));
      batches[b].add(sampler(rng), opts.with_hessian);
    }
  });
  return BatchedEstimate(std::move(batches), opts);
}

inline DerivativeEstimate estimate_derivatives(const TrajectorySampler& sampler, Index n,
                                               std::uint64_t seed,
                                               const EstimatorOptions& opts = {}) {
  return sample_derivatives(sampler, n, seed, opts).estimate();
}

inline Mat estimate_jacobian(const TrajectorySampler& sampler, Index n, std::uint64_t seed,
                             EstimatorOptions opts = {}) {
  opts.with_hessian = false;
  return estimate_derivatives(sampler, n, seed, opts).jacobian;
}

inline Mat estimate_hessian(const TrajectorySampler& sampler, Index n, std::uint64_t seed,
                            const EstimatorOptions& opts = {}) {
  return estimate_derivatives(sampler, n, seed, opts).hessian;
}

// ---------------------------------------------------------------------------
// Sample-size planning
// ---------------------------------------------------------------------------

struct EstimatorBounds {
  Vec r_bar;  // per-objective reward bounds
  double d_bar = 0.0;
  double g_bar = 0.0;
  double gamma = 0.0;
  Index horizon = 1;
};

/// R_i H gamma^H / (1 - gamma) * (H D^2 + G).
inline double lemma4_bound(const EstimatorBounds& b, Index i) {
  if (!(b.gamma > 0.0 && b.gamma < 1.0)) {
    throw DomainError("lemma4_bound: gamma must lie in (0, 1)");
  }
  if (i < 0 || i >= b.r_bar.size()) throw DomainError("lemma4_bound: objective index out of range");
  if (b.horizon < 1 || b.d_bar < 0.0 || b.g_bar < 0.0 || b.r_bar[i] < 0.0) {
    throw DomainError("lemma4_bound: bounds must be nonnegative and H >= 1");
  }
  const double h = static_cast<double>(b.horizon);
  return b.r_bar[i] * h * std::pow(b.gamma, h) / (1.0 - b.gamma) * (h * b.d_bar * b.d_bar + b.g_bar);
}

/// N = ceil(bound^2 log(2/delta) / (2 eps^2)), at least 1.
inline Index theorem5_sample_count(const EstimatorBounds& b, Index i, double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw DomainError("theorem5_sample_count: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("theorem5_sample_count: delta must lie in (0, 1)");
  const double bound = lemma4_bound(b, i);
  const double n = bound * bound * std::log(2.0 / delta) / (2.0 * epsilon * epsilon);
  if (!std::isfinite(n) || n > 9.0e18) throw DomainError("theorem5_sample_count: count overflows");
  return std::max<Index>(1, static_cast<Index>(std::ceil(n)));
}

}  // namespace pmga::est
