#include "gausstrace/domains.hpp"
#include "gausstrace/gauss_core.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gausstrace;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double empirical_mass(const LevelSetDomain& d, const GaussianSpace& space, std::size_t n) {
  const SampleSet s(space, {42, 9}, n);
  return integrate(s, 1, [&](const Vector& x, std::span<double> out) { out[0] = d.contains(x) ? 1.0 : 0.0; })[0]
      .mean;
}

}  // namespace

TEST(Halfspace, OneDimensional) {
  const GaussianSpace space = GaussianSpace::isotropic(1);
  const LevelSetDomain d = make_halfspace(space, vec({1.0}));
  EXPECT_TRUE(d.contains(vec({0.5})));
  EXPECT_FALSE(d.contains(vec({-0.5})));
  EXPECT_DOUBLE_EQ(h_gradient(space, d.G, vec({0.3})).norm(), 1.0);
}

TEST(Halfspace, NormalizedDirection) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const LevelSetDomain d = make_halfspace(space, vec({1.0, 1.0}));
  EXPECT_NEAR(h_gradient(space, d.G, vec({0.1, 2.0})).norm(), 1.0, 1e-15);
  EXPECT_NEAR(empirical_mass(d, space, 1'000'000), 0.5, 0.002);
}

TEST(Ball, MassAndGradient) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const LevelSetDomain d = make_ball(space, 1.0);
  EXPECT_NEAR(oracle::chi2_cdf(2, 1.0), 1.0 - std::exp(-0.5), 1e-14);
  EXPECT_NEAR(empirical_mass(d, space, 1'000'000), oracle::chi2_cdf(2, 1.0), 0.002);
  EXPECT_DOUBLE_EQ(h_gradient(space, d.G, vec({1, 0})).norm(), 2.0);
  const GaussianSpace aniso = GaussianSpace::diagonal(vec({4.0, 1.0}));
  EXPECT_DOUBLE_EQ(h_gradient(aniso, make_ball(aniso, 1.0).G, vec({1, 0})).norm(), 4.0);
}

TEST(Ellipsoid, UnitWeightsEqualBall) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const LevelSetDomain e = make_ellipsoid(space, {vec({1.0, 1.0}), 1.0});
  const LevelSetDomain b = make_ball(space, 1.0);
  CounterRng rng({1, 0}, 0);
  for (int i = 0; i < 50; ++i) {
    const Vector x = vec({2 * rng.normal(), 2 * rng.normal()});
    EXPECT_NEAR(e.G(x), b.G(x), 1e-14);
  }
  EXPECT_DOUBLE_EQ(make_ellipsoid(space, {vec({2.0, 3.0}), 1.5}).G(vec({0, 0})), -2.25);
}

TEST(Ellipsoid, DirichletTruncationSum) {
  const std::size_t n = 4;
  const GaussianSpace space = dirichlet_laplacian_space(DirichletCovariance::half_inverse, n);
  const EllipsoidSpec spec = dirichlet_ball_spec(n, 0.125, 1.0);
  double ref = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double kk = double(k);
    EXPECT_NEAR(space.eigenvalue(k - 1), 1.0 / (2.0 * oracle::pi * oracle::pi * kk * kk), 1e-16);
    ref += std::sqrt(oracle::pi * kk) / (2.0 * oracle::pi * oracle::pi * kk * kk);
  }
  EXPECT_NEAR(trace_weighted_alpha_sum(space, spec), ref, 1e-14);
}

TEST(Ellipsoid, InvalidWeightsRejected) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  EXPECT_THROW((void)make_ellipsoid(space, {vec({1.0, -1.0}), 1.0}), std::invalid_argument);
  EXPECT_THROW((void)make_ellipsoid(space, {vec({1.0}), 1.0}), std::invalid_argument);
}

TEST(GraphRegion, ZeroGraphIsHalfspace) {
  const GaussianSpace space = GaussianSpace::diagonal(vec({2.0, 0.5}));
  const LevelSetDomain g = make_graph_region(space, 0, fields::constant(1, 0.0));
  // O = {v^_1 < 0}: the halfspace with h = -v_1.
  const LevelSetDomain h = make_halfspace(space, vec({-1.0, 0.0}));
  CounterRng rng({2, 0}, 0);
  for (int i = 0; i < 50; ++i) {
    const Vector x = vec({rng.normal(), rng.normal()});
    EXPECT_NEAR(g.G(x), h.G(x), 1e-14);
  }
}

TEST(GraphRegion, ConstantGraphMass) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const LevelSetDomain g = make_graph_region(space, 0, fields::constant(1, 0.4));
  EXPECT_NEAR(empirical_mass(g, space, 1'000'000), oracle::normal_cdf(0.4), 0.002);
}

TEST(SampleDomain, AcceptanceRates) {
  const GaussianSpace one = GaussianSpace::isotropic(1);
  const DomainSamples hs = sample_domain(make_halfspace(one, vec({1.0})), one, {42, 0}, 500'000);
  EXPECT_NEAR(hs.acceptance_rate, 0.5, 0.002);
  EXPECT_TRUE((hs.points.array() > 0.0).all());

  const GaussianSpace two = GaussianSpace::isotropic(2);
  const LevelSetDomain ball = make_ball(two, 1.0);
  const DomainSamples bs = sample_domain(ball, two, {42, 0}, 400'000);
  EXPECT_NEAR(bs.acceptance_rate, 1.0 - std::exp(-0.5), 0.002);
  for (Eigen::Index i = 0; i < bs.points.cols(); ++i) ASSERT_TRUE(ball.contains(bs.points.col(i)));
}

TEST(SampleDomain, Deterministic) {
  const GaussianSpace two = GaussianSpace::isotropic(2);
  const LevelSetDomain ball = make_ball(two, 1.0);
  const DomainSamples a = sample_domain(ball, two, {3, 1}, 1000);
  const DomainSamples b = sample_domain(ball, two, {3, 1}, 1000);
  EXPECT_TRUE((a.points.array() == b.points.array()).all());
}

TEST(SampleDomain, StarvationReported) {
  const GaussianSpace two = GaussianSpace::isotropic(2);
  const LevelSetDomain tiny = make_ball(two, 1e-4);
  EXPECT_THROW((void)sample_domain(tiny, two, {42, 0}, 1000, 100'000), AcceptanceStarvation);
}

TEST(MassIdentity, Examples) {
  const GaussianSpace iso = GaussianSpace::isotropic(2);
  const MassIdentity a = ellipsoid_mass_identity(iso, {vec({1.0, 1.0}), 1.0}, {42, 0}, 1'000'000);
  EXPECT_NEAR(a.lhs.mean, 1.0 - std::exp(-0.5), 3.0 * a.lhs.std_error + 1e-12);
  EXPECT_NEAR(a.rhs.mean, 1.0 - std::exp(-0.5), 3.0 * a.rhs.std_error + 1e-12);
  EXPECT_TRUE(a.agrees());

  const GaussianSpace aniso = GaussianSpace::diagonal(vec({4.0, 1.0}));
  EXPECT_TRUE(ellipsoid_mass_identity(aniso, {vec({1.0, 4.0}), 1.0}, {42, 1}, 1'000'000).agrees());

  const MassIdentity big = ellipsoid_mass_identity(iso, {vec({1.0, 1.0}), 100.0}, {42, 2}, 100'000);
  EXPECT_DOUBLE_EQ(big.lhs.mean, 1.0);
  EXPECT_DOUBLE_EQ(big.rhs.mean, 1.0);
}

TEST(Nondegeneracy, StandardDomains) {
  const GaussianSpace two = GaussianSpace::isotropic(2);
  EXPECT_TRUE(check_nondegeneracy(make_ball(two, 1.0), two, {42, 0}, 200'000).ok());
  EXPECT_TRUE(check_nondegeneracy(make_halfspace(two, vec({1.0, 0.0})), two, {42, 0}, 200'000).ok());
}

TEST(Coordinates, DropInsertRoundTrip) {
  const Vector x = vec({1.0, 2.0, 3.0});
  const Vector y = drop_coordinate(x, 1);
  EXPECT_EQ(y, vec({1.0, 3.0}));
  EXPECT_EQ(insert_coordinate(y, 1, 2.0), x);
}
