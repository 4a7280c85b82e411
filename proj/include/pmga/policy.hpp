#pragma once

// Gaussian policies whose mean is linear in the parameters:
//   a ~ N(Phi(s) theta, Sigma)
// log-gradient  Phi^T Sigma^{-1} (a - Phi theta)
// log-Hessian  -Phi^T Sigma^{-1} Phi   (independent of a)

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <utility>

#include "pmga/common.hpp"
#include "pmga/rng.hpp"

namespace pmga {

class LinearGaussianPolicy {
 public:
  using FeatureFn = std::function<Mat(const Vec& s)>;  // action_dim x d

  LinearGaussianPolicy(FeatureFn features, Vec theta, Mat sigma)
      : features_(std::move(features)), theta_(std::move(theta)), sigma_(std::move(sigma)) {
    require_dims(sigma_.rows() == sigma_.cols(), "LinearGaussianPolicy: covariance must be square");
    llt_.compute(sigma_);
    if (llt_.info() != Eigen::Success) {
      throw DomainError("LinearGaussianPolicy: covariance is not positive definite");
    }
    sigma_inv_ = llt_.solve(Mat::Identity(sigma_.rows(), sigma_.cols()));
    chol_ = llt_.matrixL();
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
  }

  const Vec& theta() const { return theta_; }
  const Mat& sigma() const { return sigma_; }
  Index param_dim() const { return theta_.size(); }
  Index action_dim() const { return sigma_.rows(); }

  Mat features(const Vec& s) const {
    Mat phi = features_(s);
    require_dims(phi.rows() == action_dim() && phi.cols() == param_dim(),
                 "LinearGaussianPolicy: feature matrix has the wrong shape");
    return phi;
  }

  Vec mean(const Vec& s) const { return features(s) * theta_; }

  Vec sample(const Vec& s, Rng& rng) const {
    std::normal_distribution<double> n01(0.0, 1.0);
    Vec z(action_dim());
    for (Index k = 0; k < z.size(); ++k) z[k] = n01(rng);
    return mean(s) + chol_ * z;
  }

  double log_prob(const Vec& s, const Vec& a) const {
    const Vec r = a - mean(s);
    const double k = static_cast<double>(action_dim());
    return -0.5 * (r.dot(sigma_inv_ * r) + log_det_ + k * std::log(2.0 * std::numbers::pi));
  }

  Vec log_grad(const Vec& s, const Vec& a) const {
    const Mat phi = features(s);
    return phi.transpose() * (sigma_inv_ * (a - phi * theta_));
  }

  Mat log_hessian(const Vec& s) const {
    const Mat phi = features(s);
    return -phi.transpose() * sigma_inv_ * phi;
  }

 private:
  FeatureFn features_;
  Vec theta_;
  Mat sigma_;
  Mat sigma_inv_;
  Mat chol_;
  Eigen::LLT<Mat> llt_;
  double log_det_ = 0.0;
};

}  // namespace pmga
