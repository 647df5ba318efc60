#include "gausstrace/csv.hpp"
#include "gausstrace/trace_identities.hpp"
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

const double kPointWeight = 1.0 / std::sqrt(2.0 * oracle::pi);
const double kSphereMass = std::exp(-0.5);

struct OneDim {
  GaussianSpace space = GaussianSpace::isotropic(1);
  LevelSetDomain domain = make_halfspace(space, vec({1.0}));
  SampleSet samples{space, {42, 0}, 400'000};
};

struct Sphere {
  GaussianSpace space = GaussianSpace::isotropic(2);
  LevelSetDomain domain = make_ball(space, 1.0);
  SampleSet samples{space, {42, 1}, 400'000};
};

void expect_close(double value, double expected, double err) { EXPECT_NEAR(value, expected, 3.0 * err + 1e-12); }

}  // namespace

TEST(Parti, HalfspaceConstant) {
  OneDim c;
  const IdentityReport r = verify_parti(c.space, c.domain, fields::constant(1, 1.0), 0, c.samples);
  EXPECT_EQ(r.lhs, 0.0);
  expect_close(r.rhs, 0.0, r.rhs_err);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.consistent());
}

TEST(Parti, HalfspaceLinear) {
  OneDim c;
  const IdentityReport r = verify_parti(c.space, c.domain, fields::coordinate(1, 0), 0, c.samples);
  expect_close(r.lhs, 0.5, r.lhs_err);
  expect_close(r.rhs, 0.5, r.rhs_err);
  EXPECT_TRUE(r.pass);
}

TEST(Parti, SphereOddFunction) {
  Sphere c;
  const IdentityReport r = verify_parti(c.space, c.domain, fields::coordinate(2, 1), 0, c.samples);
  expect_close(r.lhs, 0.0, r.lhs_err);
  expect_close(r.rhs, 0.0, r.rhs_err);
  EXPECT_TRUE(r.pass);
}

TEST(Parti, ScalingCovariance) {
  Sphere c;
  const ScalarField phi = fields::gaussian_bump(vec({0.0, 0.0}), 4.0);
  const IdentityReport a = verify_parti(c.space, c.domain, phi, 1, c.samples);
  const IdentityReport b = verify_parti(c.space, c.domain, fields::scaled(phi, -2.5), 1, c.samples);
  EXPECT_NEAR(b.lhs, -2.5 * a.lhs, 1e-12 * std::max(1.0, std::abs(a.lhs)));
  EXPECT_NEAR(b.rhs, -2.5 * a.rhs, 1e-12 * std::max(1.0, std::abs(a.rhs)));
}

TEST(Parti, ConvenienceOverloadDrawsSamples) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const IdentityReport r =
      verify_parti(space, make_ball(space, 1.0), fields::coordinate_square(2, 0), 0, {42, 2}, 200'000, 64);
  EXPECT_TRUE(r.pass);
}

TEST(PowerIdentity, SphereSurfaceMass) {
  Sphere c;
  const IdentityReport r =
      verify_power_identity(c.space, c.domain, fields::constant(2, 1.0), 2.0, PowerVariant::partitraccia2, c.samples);
  EXPECT_NEAR(r.lhs, kSphereMass, 1e-9);
  expect_close(r.rhs, kSphereMass, r.rhs_err);
  EXPECT_TRUE(r.pass);
}

TEST(PowerIdentity, HalfspaceFirstPower) {
  OneDim c;
  const IdentityReport r =
      verify_power_identity(c.space, c.domain, fields::constant(1, 1.0), 1.0, PowerVariant::partitraccia, c.samples);
  EXPECT_NEAR(r.lhs, kPointWeight, 1e-12);
  expect_close(r.rhs, kPointWeight, r.rhs_err);
  EXPECT_TRUE(r.pass);
}

TEST(PowerIdentity, SphereCoordinateSquared) {
  Sphere c;
  const IdentityReport r =
      verify_power_identity(c.space, c.domain, fields::coordinate(2, 0), 2.0, PowerVariant::partitraccia2, c.samples);
  // int cos^2 over the circle with constant weight: half the total mass.
  EXPECT_NEAR(r.lhs, 0.5 * kSphereMass, 1e-9);
  EXPECT_TRUE(r.pass);
}

TEST(Divergence, UnitNormalField) {
  Sphere c;
  const IdentityReport r =
      verify_divergence_theorem(c.space, c.domain, vector_fields::unit_normal(c.space, c.domain.G), c.samples);
  EXPECT_NEAR(r.rhs, kSphereMass, 1e-9);
  expect_close(r.lhs, kSphereMass, r.lhs_err);
  EXPECT_TRUE(r.pass);
}

TEST(Divergence, TangentialField) {
  Sphere c;
  const IdentityReport r = verify_divergence_theorem(c.space, c.domain, rotation_field(c.space, c.domain), c.samples);
  EXPECT_NEAR(r.rhs, 0.0, 1e-12);
  expect_close(r.lhs, 0.0, r.lhs_err);
  EXPECT_TRUE(r.pass);
}

TEST(Divergence, SingleComponentMatchesParti) {
  Sphere c;
  const ScalarField phi = fields::coordinate_square(2, 1);
  const IdentityReport d = verify_divergence_theorem(c.space, c.domain, vector_fields::single(2, 1, phi), c.samples);
  const IdentityReport p = verify_parti(c.space, c.domain, phi, 1, c.samples);
  // div(phi v_k) = D_k phi - v^_k phi: the same terms rearranged.
  EXPECT_NEAR(d.lhs, p.lhs - (p.rhs - d.rhs), 1e-9);
}

TEST(ProductRule, ConstantPsiCollapsesToParti) {
  Sphere c;
  const ScalarField phi = fields::gaussian_bump(vec({0.3, 0.0}), 2.0);
  const IdentityReport prod = verify_product_rule(c.space, c.domain, phi, fields::constant(2, 1.0), 0, c.samples);
  const IdentityReport parti = verify_parti(c.space, c.domain, phi, 0, c.samples);
  EXPECT_NEAR(prod.lhs, parti.lhs, 1e-12);
  EXPECT_NEAR(prod.rhs, parti.rhs, 1e-9);
}

TEST(ProductRule, HalfspaceMoments) {
  OneDim c;
  const ScalarField x = fields::coordinate(1, 0);
  const IdentityReport r = verify_product_rule(c.space, c.domain, x, x, 0, c.samples);
  // LHS E[x 1_{x>0}] = pdf(0); RHS -pdf(0) + E[x^3 1_{x>0}] = -pdf(0) + 2 pdf(0).
  const double m1 = oracle::integrate([](double t) { return t * oracle::normal_pdf(t); }, 0.0, 40.0);
  expect_close(r.lhs, m1, r.lhs_err);
  expect_close(r.rhs, m1, r.rhs_err);
  EXPECT_TRUE(r.pass);
}

TEST(PartialH, ObliqueHalfspace) {
  const GaussianSpace space = GaussianSpace::diagonal(vec({2.0, 0.5}));
  const LevelSetDomain d = make_halfspace(space, vec({1.0, 2.0}));
  const SampleSet s(space, {42, 3}, 400'000);
  const IdentityReport r =
      verify_partial_h(space, d, fields::coordinate_square(2, 1), vec({0.6, -0.8}), s);
  EXPECT_TRUE(r.pass) << r.lhs << " vs " << r.rhs;
}

TEST(SphereFormula, AllTermsAgree) {
  Sphere c;
  const IdentityReport r = verify_sphere_formula(c.space, c.domain, fields::coordinate(2, 0), 2.0, c.samples);
  EXPECT_TRUE(r.pass);
}

TEST(ZeroTrace, CutoffProbe) {
  Sphere c;
  const ZeroTraceReport z =
      zero_trace_probe(c.space, c.domain, fields::constant(2, 1.0), 0.1, {0.4, 0.2, 0.1, 0.05}, 0, c.samples);
  EXPECT_LE(z.boundary_integral, 1e-12);
  for (const IdentityReport& r : z.parti) EXPECT_TRUE(r.pass);
  EXPECT_TRUE(z.cut_mass_monotone);
  EXPECT_TRUE(z.bulk_converges);
}

TEST(Hardy, ConstantOnUnitDisc) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const HardyReport h =
      hardy_probe(space, make_ball(space, 1.0), 2.0, {fields::constant(2, 1.0)}, {42, 0}, 1'000'000);
  ASSERT_EQ(h.rows.size(), 1u);
  // Polar coordinates: int_B |x|^{-1} dmu = int_0^1 s^{-1} e^{-s^2/2} s ds.
  const double num = oracle::integrate([](double s) { return std::exp(-0.5 * s * s); }, 0.0, 1.0);
  EXPECT_NEAR(num, 0.85562, 1e-5);
  EXPECT_NEAR(h.rows[0].numerator.mean, num, 3.0 * h.rows[0].numerator.std_error);
  EXPECT_NEAR(h.rows[0].ratio, num / (1.0 - std::exp(-0.5)), 3.0 * h.rows[0].ratio_err + 1e-3);
}

TEST(Hardy, CoordinateFunction) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const HardyReport h =
      hardy_probe(space, make_ball(space, 1.0), 2.0, {fields::coordinate(2, 0)}, {42, 1}, 1'000'000);
  // int_B x_1^2 / |x| dmu = (1/2) int_0^1 s^2 e^{-s^2/2} ds.
  const double ref = 0.5 * oracle::integrate([](double s) { return s * s * std::exp(-0.5 * s * s); }, 0.0, 1.0);
  EXPECT_NEAR(h.rows[0].numerator.mean, ref, 3.0 * h.rows[0].numerator.std_error);
}

TEST(TraceBound, HoldsForSmoothFunctions) {
  Sphere c;
  for (double q : {1.0, 2.0}) {
    const TraceBoundCheck t = trace_bound_check(c.space, c.domain, fields::coordinate_square(2, 0), q, 4.0, c.samples);
    EXPECT_TRUE(t.holds) << "q = " << q << ": " << t.lhs << " > " << t.bound;
  }
}

TEST(Boundedness, HalfspaceDiagnostics) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const SampleSet s(space, {42, 4}, 100'000);
  const BoundednessCheck b = boundedness_check(space, make_halfspace(space, vec({1.0, 0.0})), s);
  EXPECT_NEAR(b.sup_h_gradient, 1.0, 1e-12);
  EXPECT_TRUE(b.gradient_bounded());
  EXPECT_TRUE(b.boundary_nondegenerate());
  // LG = h^ grows with the sample size on an unbounded halfspace.
  EXPECT_GE(b.sup_generator, b.sup_generator_half);
}

TEST(Suite, SmallRunPassesAndIsReproducible) {
  SuiteConfig cfg;
  cfg.samples = 100'000;
  const auto a = run_identity_suite(cfg);
  const auto b = run_identity_suite(cfg);
  ASSERT_GT(a.size(), 300u);
  std::size_t failed = 0;
  for (const IdentityReport& r : a) {
    EXPECT_TRUE(r.consistent());
    EXPECT_GE(r.lhs_err, 0.0);
    EXPECT_GE(r.rhs_err, 0.0);
    if (!r.pass) ++failed;
  }
  // 3-sigma rule over a few hundred correlated checks: allow a stray miss at
  // this reduced sample size; the acceptance test runs the full size.
  EXPECT_LE(failed, 2u);
  EXPECT_EQ(identity_table(a).str(), identity_table(b).str());
}
