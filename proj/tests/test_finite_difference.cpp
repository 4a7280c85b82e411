#include <gtest/gtest.h>

#include <cmath>

#include "pmga/finite_difference.hpp"

using namespace pmga;

namespace {

double rosen(const Vec& x) {
  double s = 0.0;
  for (Index i = 0; i + 1 < x.size(); ++i) {
    s += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
  }
  return s;
}

Vec rosen_grad(const Vec& x) {
  Vec g = Vec::Zero(x.size());
  for (Index i = 0; i + 1 < x.size(); ++i) {
    g[i] += -400.0 * x[i] * (x[i + 1] - x[i] * x[i]) - 2.0 * (1.0 - x[i]);
    g[i + 1] += 200.0 * (x[i + 1] - x[i] * x[i]);
  }
  return g;
}

}  // namespace

TEST(FiniteDifference, GradientOfRosenbrock) {
  const Vec x = (Vec(3) << -1.2, 1.0, 0.5).finished();
  EXPECT_LT(fd::relative_error(fd::gradient(rosen, x), rosen_grad(x)), 1e-7);
  EXPECT_LT(fd::relative_error(fd::gradient_richardson(rosen, x), rosen_grad(x)), 1e-9);
}

TEST(FiniteDifference, RichardsonBeatsPlainAtSameStep) {
  const fd::ScalarFn f = [](const Vec& x) { return std::exp(2.0 * x[0]) * std::sin(x[1]); };
  const Vec x = (Vec(2) << 0.3, 0.7).finished();
  const Vec exact = (Vec(2) << 2.0 * std::exp(0.6) * std::sin(0.7), std::exp(0.6) * std::cos(0.7)).finished();
  const double plain = fd::relative_error(fd::gradient(f, x, 1e-2), exact);
  const double rich = fd::relative_error(fd::gradient_richardson(f, x, 1e-2), exact);
  EXPECT_LT(rich, plain / 100.0);
}

TEST(FiniteDifference, JacobianOfLinearMapIsExact) {
  Mat a(2, 3);
  a << 1, -2, 3, 0.5, 4, -1;
  const fd::VectorFn f = [&](const Vec& x) { return Vec(a * x); };
  EXPECT_LT(fd::relative_error(fd::jacobian(f, Vec::Ones(3)), a), 1e-9);
  EXPECT_LT(fd::relative_error(fd::jacobian_richardson(f, Vec::Ones(3)), a), 1e-9);
}

TEST(FiniteDifference, HessianOfCubic) {
  const fd::ScalarFn f = [](const Vec& x) { return x[0] * x[0] * x[1] + std::pow(x[1], 3); };
  const Vec x = (Vec(2) << 1.5, -0.5).finished();
  Mat exact(2, 2);
  exact << 2 * x[1], 2 * x[0], 2 * x[0], 6 * x[1];
  EXPECT_LT(fd::relative_error(fd::hessian_richardson(f, x), exact), 1e-8);
}

TEST(FiniteDifference, RelativeErrorContract) {
  EXPECT_EQ(fd::relative_error(Mat(), Mat()), 0.0);
  EXPECT_THROW(fd::relative_error(Mat::Zero(2, 1), Mat::Zero(1, 2)), DimensionError);
  EXPECT_DOUBLE_EQ(fd::relative_error(Vec::Constant(1, 2.0), Vec::Constant(1, 4.0)), 0.5);
  // floor keeps a zero reference from dividing by zero
  EXPECT_DOUBLE_EQ(fd::relative_error(Vec::Constant(1, 1e-13), Vec::Zero(1)), 0.1);
}
