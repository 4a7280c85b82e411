#pragma once

// Water reservoir MOMDP. One storage s, stochastic inflow, release decided by
// a Gaussian policy over radial basis features. Objectives: flooding
// (r1 = -max(s'/S - h_bar, 0)) and irrigation deficit (r2 = -max(rho_bar - release, 0)).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pmga/common.hpp"
#include "pmga/estimators.hpp"
#include "pmga/parallel.hpp"
#include "pmga/policy.hpp"
#include "pmga/rng.hpp"
#include "pmga/trajectory.hpp"

namespace pmga::reservoir {

struct InflowModel {
  enum class Kind { deterministic, lognormal, samples };
  Kind kind = Kind::lognormal;
  double value = 40.0;             // deterministic
  double mu = std::log(40.0);      // lognormal
  double sigma = 0.5;
  std::vector<double> samples;     // drawn uniformly at random

  static InflowModel constant(double v) {
    InflowModel m;
    m.kind = Kind::deterministic;
    m.value = v;
    return m;
  }
  static InflowModel lognormal_model(double mu, double sigma) {
    InflowModel m;
    m.kind = Kind::lognormal;
    m.mu = mu;
    m.sigma = sigma;
    return m;
  }
  /// Newline-separated nonnegative numbers.
  static InflowModel from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("reservoir: cannot open inflow file '" + path + "'");
    InflowModel m;
    m.kind = Kind::samples;
    double x = 0.0;
    while (in >> x) {
      if (!(x >= 0.0)) throw ConfigError("reservoir: negative inflow sample in '" + path + "'");
      m.samples.push_back(x);
    }
    if (m.samples.empty()) throw ConfigError("reservoir: inflow file '" + path + "' has no samples");
    return m;
  }

  double draw(Rng& rng) const {
    switch (kind) {
      case Kind::deterministic:
        return value;
      case Kind::lognormal: {
        std::lognormal_distribution<double> d(mu, sigma);
        return d(rng);
      }
      case Kind::samples: {
        std::uniform_int_distribution<std::size_t> d(0, samples.size() - 1);
        return samples[d(rng)];
      }
    }
    return 0.0;
  }
};

struct ReservoirSpec {
  double surface = 1.0;
  double h_bar = 50.0;     // flooding threshold
  double rho_bar = 50.0;   // water demand
  double gamma = 1.0;
  double storage_cap = 160.0;
  Index learn_episodes = 100;
  Index eval_episodes = 1000;
  Index steps = 100;
  InflowModel inflow;
  std::vector<double> initial_states{0.0, 50.0, 120.0, 160.0};
  std::vector<double> centers{0.0, 50.0, 120.0, 160.0};
  std::vector<double> widths{50.0, 20.0, 40.0, 50.0};
  double sigma = 0.1;  // policy standard deviation
  bool squared_features = false;
  bool penalty = false;

  Index param_dim() const { return static_cast<Index>(centers.size()) + 1; }
  Index objectives() const { return 2; }

  void validate() const {
    if (!(surface > 0.0 && h_bar > 0.0 && rho_bar > 0.0)) {
      throw ConfigError("reservoir: surface and thresholds must be positive");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("reservoir: gamma must lie in (0, 1]");
    if (learn_episodes < 1 || eval_episodes < 1 || steps < 1) {
      throw ConfigError("reservoir: episode and step counts must be positive");
    }
    if (centers.size() != widths.size() || centers.empty()) {
      throw ConfigError("reservoir: centers and widths must have the same nonzero length");
    }
    for (double w : widths) {
      if (!(w > 0.0)) throw ConfigError("reservoir: widths must be positive");
    }
    if (initial_states.empty()) throw ConfigError("reservoir: empty initial-state set");
    if (!(sigma > 0.0)) throw ConfigError("reservoir: policy sigma must be positive");
  }
};

/// nu(s) = [exp(-|s - c_k| / w_k)]_k followed by a constant 1.
inline Vec features(const ReservoirSpec& spec, double s) {
  const Index k = static_cast<Index>(spec.centers.size());
  Vec nu(k + 1);
  for (Index i = 0; i < k; ++i) {
    const double dist = std::abs(s - spec.centers[static_cast<std::size_t>(i)]);
    const double w = spec.widths[static_cast<std::size_t>(i)];
    nu[i] = spec.squared_features ? std::exp(-dist * dist / (w * w)) : std::exp(-dist / w);
  }
  nu[k] = 1.0;
  return nu;
}

struct StepResult {
  double next_state = 0.0;
  double release = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
};

inline double min_release(const ReservoirSpec& spec, double s) { return std::max(0.0, s - spec.storage_cap); }
inline double max_release(const ReservoirSpec&, double s) { return s; }

inline StepResult step(const ReservoirSpec& spec, double s, double a, double inflow) {
  const double lo = min_release(spec, s);
  const double hi = max_release(spec, s);
  StepResult out;
  out.release = std::max(lo, std::min(hi, a));
  out.next_state = s - out.release + inflow;
  out.r1 = -std::max(out.next_state / spec.surface - spec.h_bar, 0.0);
  out.r2 = -std::max(spec.rho_bar - out.release, 0.0);
  if (spec.penalty) {
    const double p = -std::max({a - hi, lo - a, 0.0});
    out.r1 += p;
    out.r2 += p;
  }
  return out;
}

inline LinearGaussianPolicy make_policy(const ReservoirSpec& spec, const Vec& theta) {
  require_dims(theta.size() == spec.param_dim(), "reservoir: theta length mismatch");
  auto feat = [spec](const Vec& s) -> Mat { return features(spec, s[0]).transpose(); };
  return LinearGaussianPolicy(feat, theta, Mat::Constant(1, 1, spec.sigma * spec.sigma));
}

inline Trajectory rollout_episode(const ReservoirSpec& spec, const LinearGaussianPolicy& policy,
                                  Index steps, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, spec.initial_states.size() - 1);
  double s = spec.initial_states[pick(rng)];
  Trajectory tr;
  tr.rewards.resize(steps, 2);
  for (Index k = 0; k < steps; ++k) {
    const Vec sv = Vec::Constant(1, s);
    const Vec a = policy.sample(sv, rng);
    const StepResult r = step(spec, s, a[0], spec.inflow.draw(rng));
    tr.states.push_back(sv);
    tr.actions.push_back(a);
    tr.rewards(k, 0) = r.r1;
    tr.rewards(k, 1) = r.r2;
    s = r.next_state;
  }
  return tr;
}

inline std::vector<Trajectory> rollout(const ReservoirSpec& spec, const Vec& theta, Index episodes,
                                       Index steps, std::uint64_t seed) {
  spec.validate();
  const LinearGaussianPolicy policy = make_policy(spec, theta);
  std::vector<Trajectory> out(static_cast<std::size_t>(episodes));
  parallel_for(out.size(), [&](std::size_t e) {
    Rng rng = make_rng(seed, e);
    out[e] = rollout_episode(spec, policy, steps, rng);
  });
  return out;
}

/// Mean per-episode (discounted) reward sums over spec.eval_episodes episodes.
inline Vec evaluate_J(const ReservoirSpec& spec, const Vec& theta, std::uint64_t seed,
                      Index episodes = 0) {
  if (episodes <= 0) episodes = spec.eval_episodes;
  const auto trajs = rollout(spec, theta, episodes, spec.steps, seed);
  Vec j = Vec::Zero(2);
  for (const auto& t : trajs) j += t.discounted_return(spec.gamma);
  return j / static_cast<double>(episodes);
}

inline est::TrajectorySampler trajectory_sampler(const ReservoirSpec& spec, const Vec& theta) {
  spec.validate();
  auto policy = std::make_shared<const LinearGaussianPolicy>(make_policy(spec, theta));
  return [spec, policy](Rng& rng) {
    return est::score_trajectory(rollout_episode(spec, *policy, spec.steps, rng), *policy, spec.gamma);
  };
}

}  // namespace pmga::reservoir
