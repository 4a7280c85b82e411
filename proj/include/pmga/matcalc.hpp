#pragma once

// Matrix differential calculus helpers: vec, Kronecker products, commutation
// and symmetrizer matrices, and the Gram-volume derivative used when
// differentiating a volume integral over a parametrized manifold.
//
// vec() is column-major throughout; every identity below depends on it.

#include <cmath>
#include <string>

#include "pmga/common.hpp"

namespace pmga::matcalc {

inline constexpr double kDefaultRankTolerance = 1e-12;

inline Vec vec(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unvec(const Vec& v, Index rows, Index cols) {
  require_dims(v.size() == rows * cols, "unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// K_{mn}: the (mn x mn) permutation with K_{mn} vec(A) = vec(A^T) for every
/// m x n matrix A.
inline Mat commutation_matrix(Index m, Index n) {
  require_dims(m >= 1 && n >= 1, "commutation_matrix: dimensions must be positive");
  Mat k = Mat::Zero(m * n, m * n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      k(j + n * i, i + m * j) = 1.0;
    }
  }
  return k;
}

/// N_b = (I_{b^2} + K_{bb}) / 2, the symmetric idempotent projector onto
/// vec of symmetric b x b matrices.
inline Mat symmetrizer(Index b) {
  require_dims(b >= 1, "symmetrizer: dimension must be positive");
  return 0.5 * (Mat::Identity(b * b, b * b) + commutation_matrix(b, b));
}

struct GramVolume {
  double volume = 0.0;   // sqrt(det(T^T T)), clamped at 0
  double det = 0.0;      // det(T^T T), clamped at 0
  bool degenerate = false;  // volume below the rank tolerance
};

/// Volume element sqrt(det(T^T T)) of the tangent matrix T (q x b, q >= b).
inline GramVolume gram_volume(const Mat& t, double rank_tol = kDefaultRankTolerance) {
  require_dims(t.rows() >= t.cols() && t.cols() >= 1,
               "gram_volume: tangent matrix must have rows >= cols >= 1");
  const Mat gram = t.transpose() * t;
  double det = gram.determinant();
  if (!(det > 0.0)) det = 0.0;
  GramVolume out;
  out.det = det;
  out.volume = std::sqrt(det);
  out.degenerate = out.volume < rank_tol;
  return out;
}

/// Row derivative d det(T^T T) / d vec(T)^T, a 1 x (q*b) row:
///   det(T^T T) vec((T^T T)^{-1})^T * 2 N_b (I_b (x) T^T).
/// Multiplying by 1 / (2 vol(T)) gives d vol / d vec(T)^T.
inline RowVec gram_det_row_derivative(const Mat& t, double rank_tol = kDefaultRankTolerance) {
  const Index b = t.cols();
  const GramVolume gv = gram_volume(t, rank_tol);
  if (gv.degenerate) {
    throw SingularGramError("gram_det_row_derivative: T^T T is numerically singular");
  }
  const Mat gram = t.transpose() * t;
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw SingularGramError("gram_det_row_derivative: Cholesky factorization failed");
  }
  const Mat gram_inv = llt.solve(Mat::Identity(b, b));
  const RowVec lead = gv.det * vec(gram_inv.transpose()).transpose();
  return lead * (2.0 * symmetrizer(b)) * kron(Mat::Identity(b, b), t.transpose());
}

/// Rearranges the stacked Hessian [H J_1; ...; H J_q] (each block d x d) into
/// D_theta(vec D_theta J), the (q*d x d) derivative of the column-major
/// vectorized Jacobian. Entry (i + q*m, n) of the output equals entry (m, n)
/// of block i (0-based).
inline Mat hessian_stack_to_jacobian_derivative(const Mat& stacked, Index q, Index d) {
  require_dims(q >= 1 && d >= 1, "hessian_stack_to_jacobian_derivative: q, d must be positive");
  require_dims(stacked.rows() == q * d && stacked.cols() == d,
               "hessian_stack_to_jacobian_derivative: expected a (q*d x d) stack");
  Mat out(q * d, d);
  for (Index i = 0; i < q; ++i) {
    for (Index m = 0; m < d; ++m) {
      out.row(i + q * m) = stacked.row(i * d + m);
    }
  }
  return out;
}

/// Inverse of hessian_stack_to_jacobian_derivative.
inline Mat jacobian_derivative_to_hessian_stack(const Mat& djac, Index q, Index d) {
  require_dims(q >= 1 && d >= 1, "jacobian_derivative_to_hessian_stack: q, d must be positive");
  require_dims(djac.rows() == q * d && djac.cols() == d,
               "jacobian_derivative_to_hessian_stack: expected a (q*d x d) matrix");
  Mat out(q * d, d);
  for (Index i = 0; i < q; ++i) {
    for (Index m = 0; m < d; ++m) {
      out.row(i * d + m) = djac.row(i + q * m);
    }
  }
  return out;
}

}  // namespace pmga::matcalc
