#pragma once

// Frontier-quality indicators and frontier statistics.
//
//   I1(J, p) = ||J - p||^2 / ||p||^2      (raw ||J - p||^2 on request)
//   I2(G)    = min_{alpha in simplex} || sum_i alpha_i g_i / n_i ||^2,
//              n_i = sqrt(||g_i||^2 + eps^2 mean_j ||g_j||^2), g_i = row i of D_theta J
//   I3(J, G) = I1(J, p_antiutopia) (1 - lambda I2(G))
//
// I2 is zero exactly at Pareto-stationary points and lies in [0, 1].

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pmga/common.hpp"

namespace pmga::metrics {

enum class IndicatorKind { I1, I2, I3 };
enum class ReferenceKind { utopia, antiutopia };
enum class Direction { maximize, minimize };
enum class NormalizationKind { none, area_power, convex_combo };

struct Normalization {
  NormalizationKind kind = NormalizationKind::none;
  double beta = 0.0;  // area_power: J = A^{-beta} * integral
  double w1 = 1.0;    // convex_combo: J = w1 * integral + w2 * A
  double w2 = 0.0;
};

struct IndicatorSpec {
  IndicatorKind kind = IndicatorKind::I3;
  ReferenceKind reference_kind = ReferenceKind::antiutopia;
  Vec reference;  // utopia or antiutopia point (I1, I3)
  bool raw_distance = false;
  double lambda = 2.5;
  double i2_eps = 0.05;
  std::optional<Direction> direction;  // unset: derived from kind/reference
  Normalization normalization;

  bool needs_jacobian() const { return kind != IndicatorKind::I1; }

  /// Utopia distance and I2 are minimized; antiutopia distance and I3 maximized.
  Direction resolved_direction() const {
    if (direction) return *direction;
    if (kind == IndicatorKind::I2) return Direction::minimize;
    if (kind == IndicatorKind::I1 && reference_kind == ReferenceKind::utopia) return Direction::minimize;
    return Direction::maximize;
  }

  void validate(Index q) const {
    if (kind != IndicatorKind::I2 && reference.size() != q) {
      throw ConfigError("indicator: reference point must have " + std::to_string(q) + " entries");
    }
    if (kind != IndicatorKind::I2 && !raw_distance && reference.squaredNorm() == 0.0) {
      throw DomainError("indicator: zero reference norm");
    }
    if (lambda < 0.0) throw ConfigError("indicator: lambda must be nonnegative");
    if (!(i2_eps >= 0.0)) throw ConfigError("indicator: i2 smoothing must be nonnegative");
    if (normalization.kind == NormalizationKind::convex_combo &&
        std::abs(normalization.w1 + normalization.w2 - 1.0) > 1e-12) {
      throw ConfigError("indicator: convex combination weights must sum to 1");
    }
  }
};

struct IndicatorEval {
  double value = 0.0;
  Vec d_j;  // dI/dJ (q)
  Mat d_g;  // dI/d(D_theta J) (q x d); empty when I does not depend on it
};

// ---------------------------------------------------------------------------
// I1
// ---------------------------------------------------------------------------

inline double i1(const Vec& j, const Vec& p, bool raw = false) {
  require_dims(j.size() == p.size(), "I1: J and reference differ in length");
  const double scale = raw ? 1.0 : p.squaredNorm();
  if (scale == 0.0) throw DomainError("I1: zero reference norm");
  return (j - p).squaredNorm() / scale;
}

inline Vec i1_grad(const Vec& j, const Vec& p, bool raw = false) {
  require_dims(j.size() == p.size(), "I1: J and reference differ in length");
  const double scale = raw ? 1.0 : p.squaredNorm();
  if (scale == 0.0) throw DomainError("I1: zero reference norm");
  return 2.0 * (j - p) / scale;
}

// ---------------------------------------------------------------------------
// I2
// ---------------------------------------------------------------------------

/// min alpha^T M alpha over the probability simplex (q small). Enumerates the
/// supports and keeps the best feasible stationary point.
inline Vec simplex_qp(const Mat& m) {
  const Index q = m.rows();
  require_dims(q >= 1 && q <= 16 && m.cols() == q, "simplex_qp: expected a small square matrix");
  Vec best = Vec::Zero(q);
  best[0] = 1.0;
  double best_val = m(0, 0);
  for (Index i = 1; i < q; ++i) {
    if (m(i, i) < best_val) {
      best_val = m(i, i);
      best.setZero();
      best[i] = 1.0;
    }
  }
  for (unsigned mask = 1; mask < (1u << q); ++mask) {
    std::vector<Index> idx;
    for (Index i = 0; i < q; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const auto k = static_cast<Index>(idx.size());
    if (k < 2) continue;
    // KKT: [M_S 1; 1^T 0] [alpha; mu] = [0; 1]
    Mat kkt = Mat::Zero(k + 1, k + 1);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) kkt(a, b) = m(idx[a], idx[b]);
      kkt(a, k) = 1.0;
      kkt(k, a) = 1.0;
    }
    Vec rhs = Vec::Zero(k + 1);
    rhs[k] = 1.0;
    const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite() || sol.head(k).minCoeff() < -1e-12) continue;
    Vec alpha = Vec::Zero(q);
    for (Index a = 0; a < k; ++a) alpha[idx[a]] = std::max(0.0, sol[a]);
    const double s = alpha.sum();
    if (!(s > 0.0)) continue;
    alpha /= s;
    const double val = alpha.dot(m * alpha);
    if (val < best_val) {
      best_val = val;
      best = alpha;
    }
  }
  return best;
}

struct I2Result {
  double value = 0.0;
  Vec alpha;
  Mat grad;  // dI2/dG, q x d
};

inline I2Result i2(const Mat& g, double eps = 0.05) {
  const Index q = g.rows();
  const Index d = g.cols();
  require_dims(q >= 1 && d >= 1, "I2: empty Jacobian");
  I2Result out;
  out.grad = Mat::Zero(q, d);
  const Vec sq = g.rowwise().squaredNorm();
  const double s2 = sq.mean();
  if (!(s2 > 0.0)) {
    out.alpha = Vec::Constant(q, 1.0 / static_cast<double>(q));
    return out;
  }
  const Vec norms = (sq.array() + eps * eps * s2).sqrt();
  Mat gh(q, d);
  for (Index i = 0; i < q; ++i) gh.row(i) = norms[i] > 0.0 ? Vec(g.row(i).transpose() / norms[i]) : Vec::Zero(d);
  out.alpha = simplex_qp(gh * gh.transpose());
  const Vec v = gh.transpose() * out.alpha;
  out.value = v.squaredNorm();
  // Envelope theorem: differentiate at fixed optimal alpha.
  const double e2q = eps * eps / static_cast<double>(q);
  for (Index i = 0; i < q; ++i) {
    if (out.alpha[i] == 0.0 || norms[i] == 0.0) continue;
    const Vec gi = g.row(i).transpose();
    const double n1 = norms[i];
    const double n3 = n1 * n1 * n1;
    const double giv = gi.dot(v);
    for (Index k = 0; k < q; ++k) {
      Vec term = -(e2q * giv / n3) * g.row(k).transpose();
      if (k == i) term += v / n1 - (giv / n3) * gi;
      out.grad.row(k) += 2.0 * out.alpha[i] * term.transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combined evaluation
// ---------------------------------------------------------------------------

inline IndicatorEval evaluate_indicator(const IndicatorSpec& spec, const Vec& j, const Mat* g = nullptr) {
  IndicatorEval out;
  switch (spec.kind) {
    case IndicatorKind::I1:
      out.value = i1(j, spec.reference, spec.raw_distance);
      out.d_j = i1_grad(j, spec.reference, spec.raw_distance);
      return out;
    case IndicatorKind::I2: {
      if (!g) throw DomainError("indicator I2 needs the return Jacobian");
      require_dims(g->rows() == j.size(), "indicator: Jacobian rows must match J");
      const I2Result r = i2(*g, spec.i2_eps);
      out.value = r.value;
      out.d_j = Vec::Zero(j.size());
      out.d_g = r.grad;
      return out;
    }
    case IndicatorKind::I3: {
      if (!g) throw DomainError("indicator I3 needs the return Jacobian");
      require_dims(g->rows() == j.size(), "indicator: Jacobian rows must match J");
      const double a = i1(j, spec.reference, spec.raw_distance);
      const I2Result r = i2(*g, spec.i2_eps);
      const double w = 1.0 - spec.lambda * r.value;
      out.value = a * w;
      out.d_j = w * i1_grad(j, spec.reference, spec.raw_distance);
      out.d_g = -spec.lambda * a * r.grad;
      return out;
    }
  }
  return out;
}

inline double indicator_value(const IndicatorSpec& spec, const Vec& j, const Mat* g = nullptr) {
  return evaluate_indicator(spec, j, g).value;
}

inline Vec indicator_grad_J(const IndicatorSpec& spec, const Vec& j, const Mat* g = nullptr) {
  return evaluate_indicator(spec, j, g).d_j;
}

// ---------------------------------------------------------------------------
// Frontier statistics (maximization convention)
// ---------------------------------------------------------------------------

/// Quadrature sum of weight * volume.
inline double frontier_area(const std::vector<double>& weights, const std::vector<double>& volumes) {
  require_dims(weights.size() == volumes.size(), "frontier_area: size mismatch");
  double a = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) a += weights[k] * volumes[k];
  return a;
}

/// eps_k = fraction * (max_k - min_k) over the point set.
inline Vec range_epsilon(const std::vector<Vec>& points, double fraction) {
  if (points.empty()) return {};
  Vec lo = points.front();
  Vec hi = points.front();
  for (const Vec& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return fraction * (hi - lo);
}

/// True when p is eps-dominated by q: p_k <= q_k + eps_k for all k and
/// strictly for at least one.
inline bool eps_dominated(const Vec& p, const Vec& q, const Vec& eps) {
  bool strict = false;
  for (Index k = 0; k < p.size(); ++k) {
    const double bound = q[k] + eps[k];
    if (p[k] > bound) return false;
    if (p[k] < bound) strict = true;
  }
  return strict;
}

/// Indices (ascending) of the points kept after removing eps-dominated ones.
/// Points are visited in decreasing lexicographic order and kept unless an
/// already kept point eps-dominates them.
inline std::vector<std::size_t> pareto_filter(const std::vector<Vec>& points, const Vec& eps) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Vec& pa = points[a];
    const Vec& pb = points[b];
    for (Index k = 0; k < pa.size(); ++k) {
      if (pa[k] != pb[k]) return pa[k] > pb[k];
    }
    return false;
  });
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    require_dims(points[idx].size() == eps.size(), "pareto_filter: epsilon length mismatch");
    bool dominated = false;
    for (std::size_t k : kept) {
      if (eps_dominated(points[idx], points[k], eps)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline std::vector<std::size_t> pareto_filter(const std::vector<Vec>& points, double eps = 0.0) {
  if (points.empty()) return {};
  return pareto_filter(points, Vec::Constant(points.front().size(), eps));
}

/// Number of points p for which some q is better by at least eps_k in every
/// objective (and strictly better somewhere).
inline std::size_t dominated_count(const std::vector<Vec>& points, const Vec& eps) {
  std::size_t count = 0;
  for (const Vec& p : points) {
    for (const Vec& q : points) {
      if (((q - p).array() >= eps.array()).all() && ((q - p).array() > 0.0).any()) {
        ++count;
        break;
      }
    }
  }
  return count;
}

namespace detail {

// 2-D hypervolume of points (x, y) w.r.t. (rx, ry); maximization.
inline double hv2(std::vector<std::pair<double, double>> pts, double rx, double ry) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  double hv = 0.0;
  double best_y = ry;
  for (const auto& [x, y] : pts) {
    if (x <= rx || y <= best_y) continue;
    hv += (x - rx) * (y - best_y);
    best_y = y;
  }
  return hv;
}

}  // namespace detail

/// Exact hypervolume of the region dominated by the points and dominating the
/// reference (maximization), q <= 3.
inline double hypervolume(const std::vector<Vec>& points, const Vec& reference) {
  const Index q = reference.size();
  if (q < 1 || q > 3) throw DomainError("hypervolume: supported for 1 to 3 objectives");
  std::vector<Vec> pts;
  for (const Vec& p : points) {
    require_dims(p.size() == q, "hypervolume: point dimension mismatch");
    if ((p.array() > reference.array()).all()) pts.push_back(p);
  }
  if (pts.empty()) return 0.0;
  if (q == 1) {
    double best = reference[0];
    for (const Vec& p : pts) best = std::max(best, p[0]);
    return best - reference[0];
  }
  if (q == 2) {
    std::vector<std::pair<double, double>> xy;
    for (const Vec& p : pts) xy.emplace_back(p[0], p[1]);
    return detail::hv2(std::move(xy), reference[0], reference[1]);
  }
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return a[2] > b[2]; });
  double hv = 0.0;
  std::vector<std::pair<double, double>> active;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    active.emplace_back(pts[k][0], pts[k][1]);
    const double z_hi = pts[k][2];
    const double z_lo = k + 1 < pts.size() ? pts[k + 1][2] : reference[2];
    if (z_hi > z_lo) hv += (z_hi - z_lo) * detail::hv2(active, reference[0], reference[1]);
  }
  return hv;
}

}  // namespace pmga::metrics
