#pragma once

// Central finite differences with optional Richardson extrapolation. Used as
// an independent derivative route (oracle mode of the LQG closed form, the
// gradient checker, and the test suites).

#include <algorithm>
#include <cmath>
#include <functional>

#include "pmga/common.hpp"

namespace pmga::fd {

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;

inline double step_for(double x, double rel_step) {
  return rel_step * std::max(1.0, std::abs(x));
}

/// Central-difference Jacobian of f: R^n -> R^m (m x n).
inline Mat jacobian(const VectorFn& f, const Vec& x, double rel_step = 1e-6) {
  Vec xp = x;
  Mat out;
  for (Index j = 0; j < x.size(); ++j) {
    const double h = step_for(x[j], rel_step);
    xp[j] = x[j] + h;
    const Vec fp = f(xp);
    xp[j] = x[j] - h;
    const Vec fm = f(xp);
    xp[j] = x[j];
    if (j == 0) out.resize(fp.size(), x.size());
    out.col(j) = (fp - fm) / (2.0 * h);
  }
  return out;
}

/// Central-difference Jacobian with one Richardson step (h, h/2): O(h^4).
inline Mat jacobian_richardson(const VectorFn& f, const Vec& x, double rel_step = 1e-3) {
  const Mat coarse = jacobian(f, x, rel_step);
  const Mat fine = jacobian(f, x, rel_step / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

inline Vec gradient(const ScalarFn& f, const Vec& x, double rel_step = 1e-6) {
  const VectorFn wrapped = [&](const Vec& y) { return Vec::Constant(1, f(y)); };
  return jacobian(wrapped, x, rel_step).row(0).transpose();
}

inline Vec gradient_richardson(const ScalarFn& f, const Vec& x, double rel_step = 1e-3) {
  const VectorFn wrapped = [&](const Vec& y) { return Vec::Constant(1, f(y)); };
  return jacobian_richardson(wrapped, x, rel_step).row(0).transpose();
}

namespace detail {

inline Mat hessian_at_step(const ScalarFn& f, const Vec& x, const Vec& h) {
  const Index n = x.size();
  Mat out(n, n);
  const double f0 = f(x);
  Vec y = x;
  for (Index i = 0; i < n; ++i) {
    y[i] = x[i] + h[i];
    const double fp = f(y);
    y[i] = x[i] - h[i];
    const double fm = f(y);
    y[i] = x[i];
    out(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (Index j = 0; j < i; ++j) {
      y[i] = x[i] + h[i];
      y[j] = x[j] + h[j];
      const double fpp = f(y);
      y[j] = x[j] - h[j];
      const double fpm = f(y);
      y[i] = x[i] - h[i];
      const double fmm = f(y);
      y[j] = x[j] + h[j];
      const double fmp = f(y);
      y[i] = x[i];
      y[j] = x[j];
      out(i, j) = out(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return out;
}

}  // namespace detail

/// Central-difference Hessian with one Richardson step, O(h^4).
inline Mat hessian_richardson(const ScalarFn& f, const Vec& x, double rel_step = 1e-3) {
  Vec h(x.size());
  for (Index i = 0; i < x.size(); ++i) h[i] = step_for(x[i], rel_step);
  const Mat coarse = detail::hessian_at_step(f, x, h);
  const Mat fine = detail::hessian_at_step(f, x, h / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

/// Relative agreement ||a - b||_inf / max(||b||_inf, floor).
inline double relative_error(const Mat& a, const Mat& b, double floor = 1e-12) {
  require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "relative_error: shape mismatch");
  if (a.size() == 0) return 0.0;
  const double scale = std::max(b.cwiseAbs().maxCoeff(), floor);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace pmga::fd
