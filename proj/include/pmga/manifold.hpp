#pragma once

// Parametrized maps phi_rho: T (latent domain, dim b) -> R^d together with the
// derivative objects needed to differentiate a volume integral over the image:
//   D_t phi (d x b), D_rho_i phi (d), D_rho_i (D_t phi) (d x b).

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pmga/common.hpp"

namespace pmga {

// ---------------------------------------------------------------------------
// Latent domains and quadrature
// ---------------------------------------------------------------------------

enum class LatentKind { interval, simplex };

struct LatentDomain {
  LatentKind kind = LatentKind::interval;

  static LatentDomain interval() { return {LatentKind::interval}; }
  static LatentDomain simplex() { return {LatentKind::simplex}; }

  Index dim() const { return kind == LatentKind::interval ? 1 : 2; }

  /// Lebesgue measure of the domain.
  double measure() const { return kind == LatentKind::interval ? 1.0 : 0.5; }

  bool contains(const Vec& t, double slack = 1e-12) const {
    if (t.size() != dim()) return false;
    if (kind == LatentKind::interval) return t[0] >= -slack && t[0] <= 1.0 + slack;
    return t[0] >= -slack && t[1] >= -slack && t[0] + t[1] <= 1.0 + slack;
  }
};

struct LatentSample {
  Vec t;
  double weight = 0.0;
};

enum class QuadratureMode { grid, monte_carlo };

inline bool is_triangular_count(std::size_t n, Index* order = nullptr) {
  for (Index m = 0;; ++m) {
    const auto count = static_cast<std::size_t>((m + 1) * (m + 2) / 2);
    if (count == n) {
      if (order) *order = m;
      return true;
    }
    if (count > n) return false;
  }
}

namespace detail {

// Composite linear (trapezoid) rule on the order-m lattice of the unit simplex.
inline std::vector<LatentSample> simplex_lattice(Index m) {
  std::vector<LatentSample> nodes;
  if (m == 0) {
    nodes.push_back({Vec::Constant(2, 1.0 / 3.0), 0.5});
    return nodes;
  }
  std::map<std::pair<Index, Index>, double> weight;
  const double third = 0.5 / static_cast<double>(m * m) / 3.0;
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; i + j < m; ++j) {
      weight[{i, j}] += third;
      weight[{i + 1, j}] += third;
      weight[{i, j + 1}] += third;
      if (i + j <= m - 2) {
        weight[{i + 1, j}] += third;
        weight[{i, j + 1}] += third;
        weight[{i + 1, j + 1}] += third;
      }
    }
  }
  for (const auto& [ij, w] : weight) {
    Vec t(2);
    t << static_cast<double>(ij.first) / m, static_cast<double>(ij.second) / m;
    nodes.push_back({t, w});
  }
  return nodes;
}

}  // namespace detail

/// Quadrature nodes for the integral over the latent domain.
/// interval/grid: midpoint rule t_k = (k + 1/2)/n. simplex/grid: n must be a
/// triangular number (m+1)(m+2)/2; composite trapezoid rule on the order-m
/// lattice. monte_carlo: i.i.d. uniform points with weight measure/n.
inline std::vector<LatentSample> sample_latent(const LatentDomain& domain, std::size_t n,
                                               QuadratureMode mode, std::uint64_t seed = 0) {
  if (n < 1) throw DomainError("sample_latent: need at least one node");
  std::vector<LatentSample> out;
  out.reserve(n);
  const double w = domain.measure() / static_cast<double>(n);
  if (mode == QuadratureMode::grid) {
    if (domain.kind == LatentKind::interval) {
      for (std::size_t k = 0; k < n; ++k) {
        out.push_back({Vec::Constant(1, (static_cast<double>(k) + 0.5) / static_cast<double>(n)), w});
      }
      return out;
    }
    Index order = 0;
    if (!is_triangular_count(n, &order)) {
      throw DomainError("sample_latent: simplex grid needs a triangular node count, got " +
                        std::to_string(n));
    }
    return detail::simplex_lattice(order);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (domain.kind == LatentKind::interval) {
      out.push_back({Vec::Constant(1, unif(rng)), w});
    } else {
      double u1 = unif(rng);
      double u2 = unif(rng);
      if (u1 + u2 > 1.0) {
        u1 = 1.0 - u1;
        u2 = 1.0 - u2;
      }
      Vec t(2);
      t << u1, u2;
      out.push_back({t, w});
    }
  }
  return out;
}

/// Dense sweep of the latent domain including its boundary, for frontier
/// reports. interval: n equispaced points on [0, 1]; simplex: the lattice with
/// the largest order whose size does not exceed n.
inline std::vector<Vec> latent_sweep(const LatentDomain& domain, std::size_t n) {
  if (n < 1) throw DomainError("latent_sweep: need at least one point");
  std::vector<Vec> out;
  if (domain.kind == LatentKind::interval) {
    for (std::size_t k = 0; k < n; ++k) {
      const double t = n == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(n - 1);
      out.push_back(Vec::Constant(1, t));
    }
    return out;
  }
  Index m = 0;
  while (static_cast<std::size_t>((m + 2) * (m + 3) / 2) <= n) ++m;
  for (Index i = 0; i <= m; ++i) {
    for (Index j = 0; i + j <= m; ++j) {
      Vec t(2);
      if (m == 0) {
        t.setConstant(1.0 / 3.0);
      } else {
        t << static_cast<double>(i) / m, static_cast<double>(j) / m;
      }
      out.push_back(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parametric maps
// ---------------------------------------------------------------------------

class ParametricMap {
 public:
  using PhiFn = std::function<Vec(const Vec& rho, const Vec& t)>;
  using DtFn = std::function<Mat(const Vec& rho, const Vec& t)>;
  using DrhoFn = std::function<Vec(const Vec& rho, const Vec& t, Index i)>;
  using DrhoDtFn = std::function<Mat(const Vec& rho, const Vec& t, Index i)>;

  ParametricMap(std::string id, Index rho_dim, Index theta_dim, LatentDomain domain, PhiFn phi,
                DtFn d_dt, DrhoFn d_drho, DrhoDtFn d2_drho_dt)
      : id_(std::move(id)),
        rho_dim_(rho_dim),
        theta_dim_(theta_dim),
        domain_(domain),
        phi_(std::move(phi)),
        d_dt_(std::move(d_dt)),
        d_drho_(std::move(d_drho)),
        d2_drho_dt_(std::move(d2_drho_dt)) {}

  const std::string& id() const { return id_; }
  Index rho_dim() const { return rho_dim_; }
  Index theta_dim() const { return theta_dim_; }
  Index latent_dim() const { return domain_.dim(); }
  const LatentDomain& domain() const { return domain_; }

  Vec phi(const Vec& rho, const Vec& t) const {
    check(rho, t);
    return phi_(rho, t);
  }
  Mat d_phi_dt(const Vec& rho, const Vec& t) const {
    check(rho, t);
    return d_dt_(rho, t);
  }
  Vec d_phi_drho(const Vec& rho, const Vec& t, Index i) const {
    check(rho, t);
    check_index(i);
    return d_drho_(rho, t, i);
  }
  Mat d2_phi_drho_dt(const Vec& rho, const Vec& t, Index i) const {
    check(rho, t);
    check_index(i);
    return d2_drho_dt_(rho, t, i);
  }

 private:
  void check(const Vec& rho, const Vec& t) const {
    if (rho.size() != rho_dim_) {
      throw DimensionError("map " + id_ + ": expected rho of length " + std::to_string(rho_dim_) +
                           ", got " + std::to_string(rho.size()));
    }
    if (!domain_.contains(t)) throw DomainError("map " + id_ + ": latent point outside domain");
  }
  void check_index(Index i) const {
    if (i < 0 || i >= rho_dim_) {
      throw DomainError("map " + id_ + ": rho index " + std::to_string(i) + " out of range");
    }
  }

  std::string id_;
  Index rho_dim_;
  Index theta_dim_;
  LatentDomain domain_;
  PhiFn phi_;
  DtFn d_dt_;
  DrhoFn d_drho_;
  DrhoDtFn d2_drho_dt_;
};

// ---------------------------------------------------------------------------
// Built-in maps. Every built-in component has the form
//   theta_k = g_k(p_k(rho, t)),  p_k = mu(t)^T (alpha_k + B_k rho)
// with mu(t) = [1, t1, t2, t1^2, t2^2, t1 t2] (t2 terms absent when b = 1) and
// a scalar outer function g_k.
// ---------------------------------------------------------------------------

enum class Outer { identity, negate, reciprocal, logistic_pos, logistic_neg };

namespace detail {

inline constexpr Index kMonomials = 6;

inline Vec monomials(const Vec& t) {
  const double t1 = t[0];
  const double t2 = t.size() > 1 ? t[1] : 0.0;
  Vec mu(kMonomials);
  mu << 1.0, t1, t2, t1 * t1, t2 * t2, t1 * t2;
  return mu;
}

inline Mat monomials_dt(const Vec& t) {
  const double t1 = t[0];
  const double t2 = t.size() > 1 ? t[1] : 0.0;
  Mat d = Mat::Zero(kMonomials, t.size());
  d(1, 0) = 1.0;
  d(3, 0) = 2.0 * t1;
  d(5, 0) = t2;
  if (t.size() > 1) {
    d(2, 1) = 1.0;
    d(4, 1) = 2.0 * t2;
    d(5, 1) = t1;
  }
  return d;
}

// Value and first two derivatives of the outer function.
struct OuterEval {
  double g, g1, g2;
};

inline OuterEval eval_outer(Outer kind, double p) {
  switch (kind) {
    case Outer::identity:
      return {p, 1.0, 0.0};
    case Outer::negate:
      return {-p, -1.0, 0.0};
    case Outer::reciprocal:
      return {1.0 / p, -1.0 / (p * p), 2.0 / (p * p * p)};
    case Outer::logistic_pos:
    case Outer::logistic_neg: {
      // L(x) = 1 / (1 + e^x), L' = -L(1-L), L'' = -L'(1-2L)
      const double s = kind == Outer::logistic_pos ? 1.0 : -1.0;
      const double l = p >= 0.0 ? std::exp(-p) / (1.0 + std::exp(-p)) : 1.0 / (1.0 + std::exp(p));
      const double l1 = -l * (1.0 - l);
      const double l2 = -l1 * (1.0 - 2.0 * l);
      return {s * l, s * l1, s * l2};
    }
  }
  return {0.0, 0.0, 0.0};
}

struct Component {
  Outer outer;
  Vec alpha;  // kMonomials
  Mat beta;   // kMonomials x rho_dim
};

struct ComponentMap {
  std::vector<Component> components;

  // mu^T alpha + (B^T mu)^T rho. Collecting the rho coefficients first makes
  // pinned points exact: where B^T mu vanishes, rho drops out bit for bit.
  static double inner(const Component& c, const Vec& mu, const Vec& rho) {
    return mu.dot(c.alpha) + (c.beta.transpose() * mu).dot(rho);
  }

  Vec phi(const Vec& rho, const Vec& t) const {
    const Vec mu = monomials(t);
    Vec out(static_cast<Index>(components.size()));
    for (std::size_t k = 0; k < components.size(); ++k) {
      const auto& c = components[k];
      out[static_cast<Index>(k)] = eval_outer(c.outer, inner(c, mu, rho)).g;
    }
    return out;
  }

  Mat d_dt(const Vec& rho, const Vec& t) const {
    const Vec mu = monomials(t);
    const Mat dmu = monomials_dt(t);
    Mat out(static_cast<Index>(components.size()), t.size());
    for (std::size_t k = 0; k < components.size(); ++k) {
      const auto& c = components[k];
      const Vec coef = c.alpha + c.beta * rho;
      const OuterEval o = eval_outer(c.outer, inner(c, mu, rho));
      out.row(static_cast<Index>(k)) = o.g1 * (dmu.transpose() * coef).transpose();
    }
    return out;
  }

  Vec d_drho(const Vec& rho, const Vec& t, Index i) const {
    const Vec mu = monomials(t);
    Vec out(static_cast<Index>(components.size()));
    for (std::size_t k = 0; k < components.size(); ++k) {
      const auto& c = components[k];
      const OuterEval o = eval_outer(c.outer, inner(c, mu, rho));
      out[static_cast<Index>(k)] = o.g1 * mu.dot(c.beta.col(i));
    }
    return out;
  }

  Mat d2_drho_dt(const Vec& rho, const Vec& t, Index i) const {
    const Vec mu = monomials(t);
    const Mat dmu = monomials_dt(t);
    Mat out(static_cast<Index>(components.size()), t.size());
    for (std::size_t k = 0; k < components.size(); ++k) {
      const auto& c = components[k];
      const Vec coef = c.alpha + c.beta * rho;
      const OuterEval o = eval_outer(c.outer, inner(c, mu, rho));
      const double p_rho = mu.dot(c.beta.col(i));
      const RowVec p_t = (dmu.transpose() * coef).transpose();
      const RowVec p_rho_t = (dmu.transpose() * c.beta.col(i)).transpose();
      out.row(static_cast<Index>(k)) = o.g2 * p_rho * p_t + o.g1 * p_rho_t;
    }
    return out;
  }
};

inline ParametricMap from_components(std::string id, Index rho_dim, LatentDomain domain,
                                     ComponentMap cm) {
  auto shared = std::make_shared<const ComponentMap>(std::move(cm));
  const auto d = static_cast<Index>(shared->components.size());
  return ParametricMap(
      std::move(id), rho_dim, d, domain,
      [shared](const Vec& rho, const Vec& t) { return shared->phi(rho, t); },
      [shared](const Vec& rho, const Vec& t) { return shared->d_dt(rho, t); },
      [shared](const Vec& rho, const Vec& t, Index i) { return shared->d_drho(rho, t, i); },
      [shared](const Vec& rho, const Vec& t, Index i) { return shared->d2_drho_dt(rho, t, i); });
}

// Monomial slots.
inline constexpr Index kOne = 0, kT1 = 1, kT2 = 2, kT1Sq = 3, kT2Sq = 4, kT1T2 = 5;

inline Component make_component(Outer outer, Index rho_dim) {
  return {outer, Vec::Zero(kMonomials), Mat::Zero(kMonomials, rho_dim)};
}

}  // namespace detail

struct MapOptions {
  // lqg2_free: drop the minus sign (values in [0, 1]).
  // lqg2_pinned: use the reciprocal-quadratic variant.
  bool literal = false;
};

/// 2-objective LQG, free logistic map: theta_i = -(1 + exp(rho_{2i-1} + rho_{2i} t))^{-1}.
inline ParametricMap lqg2_free_map(const MapOptions& opts = {}) {
  using namespace detail;
  const Outer outer = opts.literal ? Outer::logistic_pos : Outer::logistic_neg;
  ComponentMap cm;
  for (Index i = 0; i < 2; ++i) {
    auto c = make_component(outer, 4);
    c.beta(kOne, 2 * i) = 1.0;
    c.beta(kT1, 2 * i + 1) = 1.0;
    cm.components.push_back(c);
  }
  return from_components("lqg2_free", 4, LatentDomain::interval(), std::move(cm));
}

inline constexpr double kLqgGainLow = 0.2403;
inline constexpr double kLqgGainSpan = 0.6588;
inline constexpr double kLqgGainHigh = 0.8991;

/// 2-objective LQG map pinned to the single-objective optimal gains at t = 0
/// and t = 1:
///   theta_1 = -(0.2403 + (0.6588 + rho_1) t - rho_1 t^2)
///   theta_2 = -(0.8991 + (-0.6588 + rho_2) t - rho_2 t^2)
/// With opts.literal the reciprocal form is used instead:
///   theta_1 = (0.2403 - rho_2 t^2 + (0.6588 + rho_1) t)^{-1}
///   theta_2 = (0.8991 - rho_2 t^2 + (-0.6588 + rho_2) t)^{-1}
inline ParametricMap lqg2_pinned_map(const MapOptions& opts = {}) {
  using namespace detail;
  ComponentMap cm;
  if (!opts.literal) {
    auto c1 = make_component(Outer::negate, 2);
    c1.alpha(kOne) = kLqgGainLow;
    c1.alpha(kT1) = kLqgGainSpan;
    c1.beta(kT1, 0) = 1.0;
    c1.beta(kT1Sq, 0) = -1.0;
    auto c2 = make_component(Outer::negate, 2);
    c2.alpha(kOne) = kLqgGainHigh;
    c2.alpha(kT1) = -kLqgGainSpan;
    c2.beta(kT1, 1) = 1.0;
    c2.beta(kT1Sq, 1) = -1.0;
    cm.components = {c1, c2};
  } else {
    auto c1 = make_component(Outer::reciprocal, 2);
    c1.alpha(kOne) = kLqgGainLow;
    c1.alpha(kT1) = kLqgGainSpan;
    c1.beta(kT1, 0) = 1.0;
    c1.beta(kT1Sq, 1) = -1.0;
    auto c2 = make_component(Outer::reciprocal, 2);
    c2.alpha(kOne) = kLqgGainHigh;
    c2.alpha(kT1) = -kLqgGainSpan;
    c2.beta(kT1, 1) = 1.0;
    c2.beta(kT1Sq, 1) = -1.0;
    cm.components = {c1, c2};
  }
  return from_components("lqg2_pinned", 2, LatentDomain::interval(), std::move(cm));
}

inline constexpr double kLqg3A = 1.151035476;
inline constexpr double kLqg3B = 3.338299811;
inline constexpr double kLqg3C = 2.187264336;

/// 3-objective LQG map on the unit simplex, pinned to the three
/// single-objective optima at the corners.
inline ParametricMap lqg3_pinned_map() {
  using namespace detail;
  const double a = kLqg3A, b = kLqg3B, c = kLqg3C;
  auto c1 = make_component(Outer::logistic_neg, 9);
  c1.alpha(kOne) = a;
  c1.alpha(kT2) = -b;
  c1.beta(kT1, 0) = 1.0;
  c1.beta(kT2, 1) = 1.0;
  c1.beta(kT1Sq, 0) = -1.0;
  c1.beta(kT2Sq, 1) = -1.0;
  c1.beta(kT1T2, 2) = -1.0;
  auto c2 = make_component(Outer::logistic_neg, 9);
  c2.alpha(kOne) = a;
  c2.alpha(kT1) = -b;
  c2.beta(kT1, 3) = 1.0;
  c2.beta(kT2, 4) = 1.0;
  c2.beta(kT1Sq, 3) = -1.0;
  c2.beta(kT2Sq, 4) = -1.0;
  c2.beta(kT1T2, 5) = -1.0;
  auto c3 = make_component(Outer::logistic_neg, 9);
  c3.alpha(kOne) = -c;
  c3.alpha(kT1) = b;
  c3.alpha(kT2) = b;
  c3.beta(kT1, 6) = 1.0;
  c3.beta(kT2, 7) = 1.0;
  c3.beta(kT1Sq, 6) = -1.0;
  c3.beta(kT2Sq, 7) = -1.0;
  c3.beta(kT1T2, 8) = -1.0;
  ComponentMap cm;
  cm.components = {c1, c2, c3};
  return from_components("lqg3_pinned", 9, LatentDomain::simplex(), std::move(cm));
}

/// Water-reservoir map: theta_k = c_k + (d_k + rho_k) t - rho_k t^2.
inline ParametricMap reservoir_quadratic_map() {
  using namespace detail;
  static constexpr double kC[5] = {61.4317, -64.1980, 10.6159, -22.8306, 37.8708};
  static constexpr double kD[5] = {-11.4317, 14.1980, -3.6159, 44.8306, 67.1292};
  ComponentMap cm;
  for (Index k = 0; k < 5; ++k) {
    auto comp = make_component(Outer::identity, 5);
    comp.alpha(kOne) = kC[k];
    comp.alpha(kT1) = kD[k];
    comp.beta(kT1, k) = 1.0;
    comp.beta(kT1Sq, k) = -1.0;
    cm.components.push_back(comp);
  }
  return from_components("reservoir_quadratic", 5, LatentDomain::interval(), std::move(cm));
}

/// theta = theta0 + t * direction; independent of rho (rho_dim may be > 0).
inline ParametricMap line_map(Vec theta0, Vec direction, Index rho_dim = 1) {
  require_dims(theta0.size() == direction.size(), "line_map: size mismatch");
  const Index d = theta0.size();
  return ParametricMap(
      "line", rho_dim, d, LatentDomain::interval(),
      [=](const Vec&, const Vec& t) -> Vec { return theta0 + t[0] * direction; },
      [=](const Vec&, const Vec&) -> Mat { return direction; },
      [=](const Vec&, const Vec&, Index) -> Vec { return Vec::Zero(d); },
      [=](const Vec&, const Vec&, Index) -> Mat { return Mat::Zero(d, 1); });
}

/// theta = theta0 everywhere.
inline ParametricMap constant_map(Vec theta0, Index rho_dim = 1,
                                  LatentDomain domain = LatentDomain::interval()) {
  const Index d = theta0.size();
  const Index b = domain.dim();
  return ParametricMap(
      "constant", rho_dim, d, domain, [=](const Vec&, const Vec&) -> Vec { return theta0; },
      [=](const Vec&, const Vec&) -> Mat { return Mat::Zero(d, b); },
      [=](const Vec&, const Vec&, Index) -> Vec { return Vec::Zero(d); },
      [=](const Vec&, const Vec&, Index) -> Mat { return Mat::Zero(d, b); });
}

/// Maps addressable by identifier. Holds the built-ins and any user
/// registrations; user entries shadow built-ins of the same name.
class MapRegistry {
 public:
  using Factory = std::function<ParametricMap(const MapOptions&)>;

  MapRegistry() {
    factories_["lqg2_free"] = [](const MapOptions& o) { return lqg2_free_map(o); };
    factories_["lqg2_pinned"] = [](const MapOptions& o) { return lqg2_pinned_map(o); };
    factories_["lqg3_pinned"] = [](const MapOptions&) { return lqg3_pinned_map(); };
    factories_["reservoir_quadratic"] = [](const MapOptions&) { return reservoir_quadratic_map(); };
  }

  void add(const std::string& id, Factory factory) { factories_[id] = std::move(factory); }

  void add(const ParametricMap& map) {
    factories_[map.id()] = [map](const MapOptions&) { return map; };
  }

  bool contains(const std::string& id) const { return factories_.count(id) > 0; }

  ParametricMap make(const std::string& id, const MapOptions& opts = {}) const {
    const auto it = factories_.find(id);
    if (it == factories_.end()) throw ConfigError("unknown map id '" + id + "'");
    return it->second(opts);
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : factories_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, Factory> factories_;
};

}  // namespace pmga
