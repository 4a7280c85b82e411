#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "pmga/finite_difference.hpp"
#include "pmga/manifold.hpp"

using namespace pmga;

namespace {

struct Point {
  Vec rho;
  Vec t;
};

// Random (rho, t) with t strictly inside the domain so that central
// differences in t stay admissible.
Point random_point(std::mt19937_64& rng, const ParametricMap& map, double rho_scale) {
  std::normal_distribution<double> n(0.0, rho_scale);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Point p{Vec(map.rho_dim()), Vec(map.latent_dim())};
  for (Index i = 0; i < p.rho.size(); ++i) p.rho[i] = n(rng);
  if (map.domain().kind == LatentKind::interval) {
    p.t[0] = u(rng);
  } else {
    do {
      p.t << u(rng), u(rng);
    } while (p.t.sum() > 0.9);
  }
  return p;
}

double rho_scale_for(const std::string& id) { return id == "reservoir_quadratic" ? 20.0 : 0.5; }

std::vector<ParametricMap> builtin_maps() {
  MapRegistry reg;
  std::vector<ParametricMap> maps;
  for (const auto& id : reg.ids()) maps.push_back(reg.make(id));
  MapOptions lit;
  lit.literal = true;
  maps.push_back(lqg2_free_map(lit));
  return maps;
}

// Relative error with an absolute floor scaled to the magnitude of phi.
double rel(const Mat& a, const Mat& b, double floor) { return fd::relative_error(a, b, floor); }

}  // namespace

TEST(LatentDomain, Basics) {
  EXPECT_EQ(LatentDomain::interval().dim(), 1);
  EXPECT_EQ(LatentDomain::simplex().dim(), 2);
  EXPECT_DOUBLE_EQ(LatentDomain::simplex().measure(), 0.5);
  EXPECT_TRUE(LatentDomain::simplex().contains((Vec(2) << 0.5, 0.5).finished()));
  EXPECT_FALSE(LatentDomain::simplex().contains((Vec(2) << 0.6, 0.5).finished()));
  EXPECT_FALSE(LatentDomain::interval().contains(Vec::Constant(1, 1.1)));
  EXPECT_FALSE(LatentDomain::interval().contains(Vec::Constant(2, 0.5)));
}

TEST(SampleLatent, IntervalSingleGridNode) {
  const auto s = sample_latent(LatentDomain::interval(), 1, QuadratureMode::grid);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].t[0], 0.5);
  EXPECT_DOUBLE_EQ(s[0].weight, 1.0);
  EXPECT_THROW(sample_latent(LatentDomain::interval(), 0, QuadratureMode::grid), DomainError);
}

TEST(SampleLatent, GridRulesIntegratePolynomials) {
  // midpoint rule: exact for linear, O(n^-2) for t^2
  const auto s = sample_latent(LatentDomain::interval(), 100, QuadratureMode::grid);
  double w = 0, m1 = 0, m2 = 0;
  for (const auto& x : s) {
    w += x.weight;
    m1 += x.weight * x.t[0];
    m2 += x.weight * x.t[0] * x.t[0];
  }
  EXPECT_NEAR(w, 1.0, 1e-14);
  EXPECT_NEAR(m1, 0.5, 1e-14);
  EXPECT_NEAR(m2, 1.0 / 3.0, 1e-4);
  // trapezoid lattice on the simplex: exact for affine integrands
  const auto tri = sample_latent(LatentDomain::simplex(), 105, QuadratureMode::grid);
  EXPECT_EQ(tri.size(), 105u);
  double a = 0, i1 = 0, i2 = 0;
  for (const auto& x : tri) {
    EXPECT_TRUE(LatentDomain::simplex().contains(x.t));
    a += x.weight;
    i1 += x.weight * x.t[0];
    i2 += x.weight * x.t[1];
  }
  EXPECT_NEAR(a, 0.5, 1e-14);
  EXPECT_NEAR(i1, 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(i2, 1.0 / 6.0, 1e-14);
}

TEST(SampleLatent, SimplexGridNeedsTriangularCount) {
  EXPECT_THROW(sample_latent(LatentDomain::simplex(), 100, QuadratureMode::grid), DomainError);
  const auto one = sample_latent(LatentDomain::simplex(), 1, QuadratureMode::grid);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one[0].t[0], 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(one[0].weight, 0.5);
}

TEST(SampleLatent, MonteCarloSimplexStaysInside) {
  const auto s = sample_latent(LatentDomain::simplex(), 20000, QuadratureMode::monte_carlo, 11);
  double m = 0;
  for (const auto& x : s) {
    EXPECT_GE(x.t.minCoeff(), 0.0);
    EXPECT_LE(x.t.sum(), 1.0);
    EXPECT_DOUBLE_EQ(x.weight, 0.5 / 20000.0);
    m += x.t[0];
  }
  // uniform on the simplex: E[t1] = 1/3, sd = sqrt(1/18)
  EXPECT_NEAR(m / 20000.0, 1.0 / 3.0, 4.0 * std::sqrt(1.0 / 18.0 / 20000.0));
}

TEST(SampleLatent, MonteCarloIntervalMean) {
  const std::size_t n = 1000000;
  const auto s = sample_latent(LatentDomain::interval(), n, QuadratureMode::monte_carlo, 5);
  double m = 0;
  for (const auto& x : s) m += x.t[0];
  m /= static_cast<double>(n);
  EXPECT_NEAR(m, 0.5, 3.0 * 0.2887 / 1e3);
}

TEST(SampleLatent, DeterministicGivenSeed) {
  const auto a = sample_latent(LatentDomain::simplex(), 50, QuadratureMode::monte_carlo, 9);
  const auto b = sample_latent(LatentDomain::simplex(), 50, QuadratureMode::monte_carlo, 9);
  const auto c = sample_latent(LatentDomain::simplex(), 50, QuadratureMode::monte_carlo, 10);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].t, b[k].t);
    differs = differs || a[k].t != c[k].t;
  }
  EXPECT_TRUE(differs);
}

TEST(LatentSweep, CoversBoundary) {
  const auto s = latent_sweep(LatentDomain::interval(), 5);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s.front()[0], 0.0);
  EXPECT_EQ(s.back()[0], 1.0);
  const auto tri = latent_sweep(LatentDomain::simplex(), 100);
  EXPECT_EQ(tri.size(), 91u);  // order 12 lattice; order 13 has 105 points
  int corners = 0;
  for (const auto& t : tri) {
    EXPECT_TRUE(LatentDomain::simplex().contains(t));
    if ((t[0] == 1.0 && t[1] == 0.0) || (t[0] == 0.0 && t[1] == 1.0) || t.isZero()) ++corners;
  }
  EXPECT_EQ(corners, 3);
}

TEST(BuiltinMaps, FreeMapAtZero) {
  const ParametricMap m = lqg2_free_map();
  const Vec th = m.phi(Vec::Zero(4), Vec::Constant(1, 0.5));
  EXPECT_DOUBLE_EQ(th[0], -0.5);
  EXPECT_DOUBLE_EQ(th[1], -0.5);
  MapOptions lit;
  lit.literal = true;
  EXPECT_DOUBLE_EQ(lqg2_free_map(lit).phi(Vec::Zero(4), Vec::Constant(1, 0.5))[0], 0.5);
}

TEST(BuiltinMaps, FreeMapStaysInUnitInterval) {
  const ParametricMap m = lqg2_free_map();
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Point p = random_point(rng, m, 3.0);
    const Vec th = m.phi(p.rho, p.t);
    EXPECT_LT(th.maxCoeff(), 0.0);
    EXPECT_GT(th.minCoeff(), -1.0);
  }
}

TEST(BuiltinMaps, PinnedLiteralValuesAndSlope) {
  MapOptions lit;
  lit.literal = true;
  const ParametricMap m = lqg2_pinned_map(lit);
  const Vec th = m.phi(Vec::Zero(2), Vec::Zero(1));
  EXPECT_NEAR(th[0], 1.0 / 0.2403, 1e-12);
  EXPECT_NEAR(th[1], 1.0 / 0.8991, 1e-12);
  const Mat dt = m.d_phi_dt(Vec::Zero(2), Vec::Zero(1));
  EXPECT_NEAR(dt(0, 0), -0.6588 / (0.2403 * 0.2403), 1e-10);
  // one-sided difference at the boundary confirms the hand-derived slope
  const double h = 1e-7;
  const double fwd = (m.phi(Vec::Zero(2), Vec::Constant(1, h))[0] - th[0]) / h;
  EXPECT_NEAR(fwd, dt(0, 0), 1e-4 * std::abs(dt(0, 0)));
}

TEST(BuiltinMaps, PinnedDefaultHitsOptimalGains) {
  const ParametricMap m = lqg2_pinned_map();
  const Vec a = m.phi(Vec::Zero(2), Vec::Zero(1));
  const Vec b = m.phi(Vec::Zero(2), Vec::Ones(1));
  EXPECT_NEAR(a[0], -0.2403, 1e-15);
  EXPECT_NEAR(a[1], -0.8991, 1e-15);
  EXPECT_NEAR(b[0], -0.8991, 1e-15);
  EXPECT_NEAR(b[1], -0.2403, 1e-15);
}

TEST(BuiltinMaps, ReservoirAtZero) {
  const Vec th = reservoir_quadratic_map().phi(Vec::Zero(5), Vec::Zero(1));
  const Vec want = (Vec(5) << 61.4317, -64.1980, 10.6159, -22.8306, 37.8708).finished();
  EXPECT_LT((th - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuiltinMaps, Lqg3CornersAreRhoIndependent) {
  const ParametricMap m = lqg3_pinned_map();
  std::mt19937_64 rng(2);
  const std::vector<Vec> corners{(Vec(2) << 0, 0).finished(), (Vec(2) << 1, 0).finished(),
                                 (Vec(2) << 0, 1).finished()};
  for (const Vec& c : corners) {
    const Vec base = m.phi(Vec::Zero(9), c);
    for (int k = 0; k < 10; ++k) {
      const Vec rho = random_point(rng, m, 2.0).rho;
      EXPECT_LT((m.phi(rho, c) - base).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(BuiltinMaps, PinningHoldsForAllRho) {
  std::mt19937_64 rng(3);
  MapOptions lit;
  lit.literal = true;
  // the literal reciprocal display carries rho_2 in theta_1 and only pins t = 0
  const std::vector<std::pair<ParametricMap, std::vector<double>>> cases{
      {lqg2_pinned_map(), {0.0, 1.0}}, {reservoir_quadratic_map(), {0.0, 1.0}}, {lqg2_pinned_map(lit), {0.0}}};
  for (const auto& [m, ts] : cases) {
    for (double t : ts) {
      const Vec tt = Vec::Constant(1, t);
      const Vec base = m.phi(Vec::Zero(m.rho_dim()), tt);
      for (int k = 0; k < 20; ++k) {
        const Vec rho = random_point(rng, m, 5.0).rho;
        EXPECT_EQ((m.phi(rho, tt) - base).cwiseAbs().maxCoeff(), 0.0) << m.id() << " t=" << t;
      }
    }
  }
}

TEST(BuiltinMaps, DerivativeConsistency) {
  for (const ParametricMap& m : builtin_maps()) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 25; ++k) {
      const Point p = random_point(rng, m, rho_scale_for(m.id()));
      const double floor = 1e-6 * std::max(1.0, m.phi(p.rho, p.t).cwiseAbs().maxCoeff());
      const fd::VectorFn in_t = [&](const Vec& t) { return m.phi(p.rho, t); };
      EXPECT_LT(rel(m.d_phi_dt(p.rho, p.t), fd::jacobian(in_t, p.t), floor), 1e-5) << m.id();
      const fd::VectorFn in_rho = [&](const Vec& r) { return m.phi(r, p.t); };
      const Mat drho = fd::jacobian(in_rho, p.rho);
      for (Index i = 0; i < m.rho_dim(); ++i) {
        EXPECT_LT(rel(m.d_phi_drho(p.rho, p.t, i), drho.col(i), floor), 1e-5) << m.id() << " i=" << i;
        // mixed derivative two ways: d/drho_i of D_t phi, and d/dt of D_rho_i phi
        const fd::VectorFn dt_in_rho = [&](const Vec& r) {
          const Mat d = m.d_phi_dt(r, p.t);
          return Vec(Eigen::Map<const Vec>(d.data(), d.size()));
        };
        const Mat mixed = m.d2_phi_drho_dt(p.rho, p.t, i);
        const Vec via_rho = fd::jacobian(dt_in_rho, p.rho).col(i);
        EXPECT_LT(rel(Eigen::Map<const Vec>(mixed.data(), mixed.size()), via_rho, floor), 1e-4) << m.id();
        const fd::VectorFn drho_in_t = [&](const Vec& t) { return m.d_phi_drho(p.rho, t, i); };
        EXPECT_LT(rel(mixed, fd::jacobian(drho_in_t, p.t), floor), 1e-4) << m.id();
      }
    }
  }
}

TEST(BuiltinMaps, ConstantAndLineMapsHaveZeroRhoDerivatives) {
  const ParametricMap c = constant_map((Vec(3) << 1, 2, 3).finished(), 2, LatentDomain::simplex());
  const Vec t = (Vec(2) << 0.2, 0.3).finished();
  EXPECT_TRUE(c.d_phi_dt(Vec::Zero(2), t).isZero());
  EXPECT_TRUE(c.d_phi_drho(Vec::Zero(2), t, 1).isZero());
  EXPECT_TRUE(c.d2_phi_drho_dt(Vec::Zero(2), t, 0).isZero());
  const ParametricMap l = line_map(Vec::Zero(2), Vec::Ones(2));
  EXPECT_EQ(l.phi(Vec::Zero(1), Vec::Constant(1, 0.25)), Vec::Constant(2, 0.25));
  EXPECT_TRUE(l.d_phi_drho(Vec::Zero(1), Vec::Constant(1, 0.25), 0).isZero());
}

TEST(ParametricMapChecks, Errors) {
  const ParametricMap m = lqg2_free_map();
  EXPECT_THROW(m.phi(Vec::Zero(4), Vec::Constant(1, 1.5)), DomainError);
  EXPECT_THROW(m.phi(Vec::Zero(3), Vec::Constant(1, 0.5)), DimensionError);
  EXPECT_THROW(m.d_phi_drho(Vec::Zero(4), Vec::Constant(1, 0.5), 4), DomainError);
  EXPECT_THROW(m.d2_phi_drho_dt(Vec::Zero(4), Vec::Constant(1, 0.5), -1), DomainError);
  EXPECT_THROW(lqg3_pinned_map().phi(Vec::Zero(9), (Vec(2) << 0.7, 0.7).finished()), DomainError);
}

TEST(Registry, LookupAndUserMaps) {
  MapRegistry reg;
  for (const char* id : {"lqg2_free", "lqg2_pinned", "lqg3_pinned", "reservoir_quadratic"}) {
    EXPECT_TRUE(reg.contains(id));
    EXPECT_EQ(reg.make(id).id(), id);
  }
  EXPECT_THROW(reg.make("nope"), ConfigError);
  reg.add(constant_map(Vec::Ones(2)));
  EXPECT_TRUE(reg.contains("constant"));
  EXPECT_EQ(reg.make("constant").theta_dim(), 2);
}
