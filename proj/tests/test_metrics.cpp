#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pmga/finite_difference.hpp"
#include "pmga/matcalc.hpp"
#include "pmga/metrics.hpp"

using namespace pmga;
using namespace pmga::metrics;

namespace {

Vec rvec(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

Mat rmat(std::mt19937_64& rng, Index r, Index c) {
  const Vec v = rvec(rng, r * c);
  return Eigen::Map<const Mat>(v.data(), r, c);
}

IndicatorSpec i1_spec(const Vec& p) {
  IndicatorSpec s;
  s.kind = IndicatorKind::I1;
  s.reference = p;
  return s;
}

// Grid-count oracle for the dominated region, maximization.
double hv_grid(const std::vector<Vec>& pts, const Vec& ref, const Vec& hi, int n) {
  const Index q = ref.size();
  const Vec h = (hi - ref) / n;
  long hits = 0, total = 0;
  std::vector<int> idx(static_cast<std::size_t>(q), 0);
  for (;;) {
    Vec c(q);
    for (Index k = 0; k < q; ++k) c[k] = ref[k] + (idx[static_cast<std::size_t>(k)] + 0.5) * h[k];
    ++total;
    for (const Vec& p : pts) {
      if ((p.array() >= c.array()).all()) {
        ++hits;
        break;
      }
    }
    Index k = 0;
    while (k < q && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == q) break;
  }
  return static_cast<double>(hits) / static_cast<double>(total) * h.prod() * std::pow(n, q);
}

}  // namespace

TEST(I1, ZeroAtReferenceAndPositiveElsewhere) {
  const Vec p = (Vec(2) << -3, 4).finished();
  EXPECT_EQ(i1(p, p), 0.0);
  EXPECT_EQ(i1_grad(p, p), Vec::Zero(2));
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vec j = rvec(rng, 2, 5.0);
    EXPECT_GT(i1(j, p), 0.0);
    EXPECT_NEAR(i1(j, p), (j - p).squaredNorm() / 25.0, 1e-14);
    EXPECT_NEAR(i1(j, p, true), (j - p).squaredNorm(), 1e-12);
  }
  EXPECT_THROW(i1(p, Vec::Zero(2)), DomainError);
  EXPECT_THROW(i1(Vec::Zero(3), p), DimensionError);
}

TEST(I1, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Vec p = rvec(rng, 3, 10.0), j = rvec(rng, 3, 10.0);
    const IndicatorSpec s = i1_spec(p);
    const fd::ScalarFn f = [&](const Vec& x) { return indicator_value(s, x); };
    EXPECT_LT(fd::relative_error(indicator_grad_J(s, j), fd::gradient(f, j)), 1e-5);
  }
}

TEST(I2, ZeroAtSingleObjectiveOptimum) {
  Mat g(2, 3);
  g << 0, 0, 0, 1, -2, 0.5;
  const I2Result r = i2(g);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_DOUBLE_EQ(r.alpha[0], 1.0);
}

TEST(I2, ZeroForOpposedGradientsPositiveForSharedAscent) {
  Mat opposed(2, 2);
  opposed << 1, 0, -3, 0;
  EXPECT_LT(i2(opposed).value, 1e-15);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    // rows in a common open half-space: every convex combination is nonzero
    const Vec dir = rvec(rng, 4).normalized();
    Mat g(3, 4);
    for (Index i = 0; i < 3; ++i) {
      Vec row = rvec(rng, 4);
      row -= row.dot(dir) * dir;
      g.row(i) = (row + (0.5 + std::abs(rvec(rng, 1)[0])) * dir).transpose();
    }
    const I2Result r = i2(g);
    EXPECT_GT(r.value, 1e-8);
    EXPECT_LE(r.value, 1.0);
  }
}

TEST(I2, ScaleInvariant) {
  std::mt19937_64 rng(4);
  const Mat g = rmat(rng, 3, 5);
  EXPECT_NEAR(i2(g).value, i2(1000.0 * g).value, 1e-12);
}

TEST(I2, QpSolutionIsOptimalOverSimplex) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const Mat a = rmat(rng, 3, 4);
    const Mat m = a * a.transpose();
    const Vec alpha = simplex_qp(m);
    EXPECT_NEAR(alpha.sum(), 1.0, 1e-12);
    EXPECT_GE(alpha.minCoeff(), -1e-15);
    const double best = alpha.dot(m * alpha);
    for (int s = 0; s < 2000; ++s) {
      Vec w(3);
      w << -std::log(u(rng)), -std::log(u(rng)), -std::log(u(rng));
      w /= w.sum();
      EXPECT_GE(w.dot(m * w), best - 1e-12);
    }
  }
}

TEST(I2, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    const Mat g = rmat(rng, 2 + k % 2, 4);
    const I2Result r = i2(g);
    // skip points where the active support is about to change
    if ((r.alpha.array() > 0.0 && r.alpha.array() < 1e-3).any()) continue;
    const fd::ScalarFn f = [&](const Vec& x) { return i2(matcalc::unvec(x, g.rows(), g.cols())).value; };
    const Vec num = fd::gradient(f, matcalc::vec(g), 1e-7);
    EXPECT_LT(fd::relative_error(matcalc::vec(r.grad), num, 1e-8), 1e-5);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(I3, LambdaZeroIsI1) {
  std::mt19937_64 rng(7);
  IndicatorSpec s;
  s.kind = IndicatorKind::I3;
  s.reference = (Vec(2) << -300, -300).finished();
  s.lambda = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vec j = rvec(rng, 2, 100.0);
    const Mat g = rmat(rng, 2, 2);
    const IndicatorEval e = evaluate_indicator(s, j, &g);
    EXPECT_EQ(e.value, i1(j, s.reference));
    EXPECT_EQ(e.d_j, i1_grad(j, s.reference));
    EXPECT_TRUE(e.d_g.isZero());
  }
  EXPECT_THROW(evaluate_indicator(s, Vec::Zero(2)), DomainError);
}

TEST(I3, MonotoneInDistanceAndResidual) {
  IndicatorSpec s;
  s.kind = IndicatorKind::I3;
  s.reference = (Vec(2) << -300, -300).finished();
  s.lambda = 0.5;
  Mat stationary(2, 2), mild(2, 2), strong(2, 2);
  stationary << 1, 0, -1, 0;
  mild << 1, 0.3, -1, 0.3;
  strong << 1, 1, 0.2, 1;
  const Vec dir = Vec::Ones(2).normalized();
  double prev = -1.0;
  for (double r = 10.0; r <= 200.0; r += 10.0) {
    const double v = indicator_value(s, s.reference + r * dir, &mild);
    EXPECT_GT(v, prev);
    prev = v;
  }
  const Vec j = s.reference + 50.0 * dir;
  const double a = indicator_value(s, j, &stationary);
  const double b = indicator_value(s, j, &mild);
  const double c = indicator_value(s, j, &strong);
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
}

TEST(I3, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  IndicatorSpec s;
  s.kind = IndicatorKind::I3;
  s.reference = (Vec(2) << -300, -310).finished();
  s.lambda = 2.5;
  int checked = 0;
  for (int k = 0; k < 30; ++k) {
    const Vec j = rvec(rng, 2, 100.0);
    const Mat g = rmat(rng, 2, 3);
    const IndicatorEval e = evaluate_indicator(s, j, &g);
    const fd::ScalarFn fj = [&](const Vec& x) { return indicator_value(s, x, &g); };
    EXPECT_LT(fd::relative_error(e.d_j, fd::gradient(fj, j)), 1e-5);
    const I2Result r = i2(g);
    if ((r.alpha.array() > 0.0 && r.alpha.array() < 1e-3).any()) continue;
    const fd::ScalarFn fg = [&](const Vec& x) {
      const Mat gx = matcalc::unvec(x, 2, 3);
      return indicator_value(s, j, &gx);
    };
    EXPECT_LT(fd::relative_error(matcalc::vec(e.d_g), fd::gradient(fg, matcalc::vec(g), 1e-7), 1e-8), 1e-5);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(IndicatorSpecValidation, Errors) {
  IndicatorSpec s = i1_spec(Vec::Zero(2));
  EXPECT_THROW(s.validate(2), DomainError);
  s = i1_spec(Vec::Ones(2));
  s.lambda = -1.0;
  EXPECT_THROW(s.validate(2), ConfigError);
  s = i1_spec(Vec::Ones(2));
  s.normalization.kind = NormalizationKind::convex_combo;
  s.normalization.w1 = 0.5;
  s.normalization.w2 = 0.6;
  EXPECT_THROW(s.validate(2), ConfigError);
  s = i1_spec(Vec::Ones(2));
  EXPECT_EQ(s.resolved_direction(), Direction::maximize);
  s.reference_kind = ReferenceKind::utopia;
  EXPECT_EQ(s.resolved_direction(), Direction::minimize);
}

TEST(FrontierArea, StraightLine) {
  // J(t) = (t, 1 - t): every node has |dJ/dt| = sqrt(2)
  std::vector<double> w(100, 0.01), vol(100, std::sqrt(2.0));
  EXPECT_NEAR(frontier_area(w, vol), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(frontier_area({1.0}, {0.0}), 0.0);
  EXPECT_THROW(frontier_area({1.0}, {}), DimensionError);
}

TEST(ParetoFilter, Examples) {
  const std::vector<Vec> both{(Vec(2) << 1, 2).finished(), (Vec(2) << 2, 1).finished()};
  EXPECT_EQ(pareto_filter(both).size(), 2u);
  const std::vector<Vec> one{(Vec(2) << 1, 2).finished(), (Vec(2) << 2, 2).finished()};
  EXPECT_EQ(pareto_filter(one), std::vector<std::size_t>{1});
  // huge epsilon: the lexicographically largest point survives
  EXPECT_EQ(pareto_filter(both, 10.0), std::vector<std::size_t>{1});
}

TEST(ParetoFilter, KeptSetIsMutuallyNonDominated) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    std::vector<Vec> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(rvec(rng, 2 + k % 2));
    const auto kept = pareto_filter(pts);
    const Vec zero = Vec::Zero(pts.front().size());
    for (std::size_t a : kept) {
      for (std::size_t b : kept) {
        if (a != b) {
          EXPECT_FALSE(eps_dominated(pts[a], pts[b], zero));
        }
      }
    }
    // every removed point is dominated by a kept one
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::find(kept.begin(), kept.end(), i) != kept.end()) continue;
      bool covered = false;
      for (std::size_t b : kept) covered = covered || eps_dominated(pts[i], pts[b], zero);
      EXPECT_TRUE(covered);
    }
  }
}

TEST(DominatedCount, RobustMargin) {
  const std::vector<Vec> pts{(Vec(2) << 0, 0).finished(), (Vec(2) << 1, 1).finished(),
                             (Vec(2) << 1.05, 0.99).finished()};
  EXPECT_EQ(dominated_count(pts, Vec::Zero(2)), 1u);
  // (1, 1) vs (1.05, 0.99) is within the margin; (0, 0) stays dominated
  EXPECT_EQ(dominated_count(pts, Vec::Constant(2, 0.5)), 1u);
  EXPECT_EQ(dominated_count(pts, Vec::Constant(2, 2.0)), 0u);
  const Vec eps = range_epsilon(pts, 0.1);
  EXPECT_NEAR(eps[0], 0.105, 1e-15);
  EXPECT_NEAR(eps[1], 0.1, 1e-15);
}

TEST(Hypervolume, Fixture) {
  const std::vector<Vec> pts{(Vec(2) << 0, 1).finished(), (Vec(2) << 1, 0).finished(),
                             (Vec(2) << 0.5, 0.5).finished()};
  EXPECT_NEAR(hypervolume(pts, Vec::Zero(2)), 0.25, 1e-15);
  EXPECT_NEAR(hypervolume(pts, Vec::Constant(2, -1.0)), 3.25, 1e-15);
  EXPECT_EQ(hypervolume({}, Vec::Zero(2)), 0.0);
  EXPECT_THROW(hypervolume(pts, Vec::Zero(4)), DomainError);
}

TEST(Hypervolume, MatchesGridOracle) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index q : {2, 3}) {
    for (int k = 0; k < 5; ++k) {
      std::vector<Vec> pts;
      for (int i = 0; i < 8; ++i) {
        // snap to the grid so the oracle is exact
        Vec p(q);
        for (Index c = 0; c < q; ++c) p[c] = std::floor(u(rng) * 20.0) / 20.0;
        pts.push_back(p);
      }
      const double exact = hypervolume(pts, Vec::Zero(q));
      EXPECT_NEAR(exact, hv_grid(pts, Vec::Zero(q), Vec::Ones(q), q == 2 ? 200 : 60), 1e-9);
    }
  }
}

TEST(Hypervolume, MonotoneUnderAddingPoints) {
  std::mt19937_64 rng(11);
  std::vector<Vec> pts;
  double prev = 0.0;
  for (int i = 0; i < 40; ++i) {
    pts.push_back(rvec(rng, 3).cwiseAbs());
    const double hv = hypervolume(pts, Vec::Zero(3));
    EXPECT_GE(hv, prev - 1e-12);
    prev = hv;
  }
}
