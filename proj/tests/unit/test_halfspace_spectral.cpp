#include "gausstrace/halfspace_spectral.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace gausstrace;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SplitSpace plane() { return split(GaussianSpace::isotropic(2), 0); }

HermiteExpansion h(int k) { return HermiteExpansion::mode(1, 0, k); }

}  // namespace

TEST(Split, Examples) {
  const SplitSpace s = plane();
  EXPECT_EQ(s.y_dim(), 1u);
  EXPECT_DOUBLE_EQ(s.Y.eigenvalue(0), 1.0);

  const SplitSpace t = split(GaussianSpace::diagonal(vec({1.0, 4.0, 9.0})), 1);
  ASSERT_EQ(t.y_dim(), 2u);
  EXPECT_DOUBLE_EQ(t.Y.eigenvalue(0), 1.0);
  EXPECT_DOUBLE_EQ(t.Y.eigenvalue(1), 9.0);
}

TEST(Split, RoundTrip) {
  const SplitSpace s = split(GaussianSpace::diagonal(vec({1.0, 4.0, 9.0})), 1);
  const Vector x = vec({0.3, -1.7, 2.2});
  const auto [t, y] = s.to_split(x);
  EXPECT_NEAR(t, -1.7 / 2.0, 1e-15);
  EXPECT_LE((s.from_split(t, y) - x).norm(), 1e-14);
}

TEST(Split, BadArguments) {
  EXPECT_THROW((void)split(GaussianSpace::isotropic(2), 2), std::out_of_range);
  EXPECT_THROW((void)split(GaussianSpace::isotropic(1), 0), std::invalid_argument);
}

TEST(Split, BlockDiagonalCovariance) {
  const SplitSpace s = split(GaussianSpace::diagonal(vec({2.0, 0.5, 1.0})), 2);
  const SplitCovarianceCheck c = split_covariance_check(s, {42, 0}, 200'000);
  EXPECT_NEAR(c.t_variance, 1.0, 0.02);
  EXPECT_TRUE(c.block_diagonal());
}

TEST(TraceSeminorm, ConstantsVanish) {
  const SplitSpace s = plane();
  for (TraceMode m : {TraceMode::interp1, TraceMode::interp2, TraceMode::interp3})
    EXPECT_EQ(tp_seminorm(s, h(0), 2.0, m), 0.0) << to_string(m);
}

TEST(TraceSeminorm, FirstHermiteSemigroupForm) {
  const SplitSpace s = plane();
  // Closed form: int_0^inf t^{-3/2}(1 - e^{-t})^2 dt = 2 sqrt(pi) (2 - sqrt 2).
  const double closed = 2.0 * std::sqrt(oracle::pi) * (2.0 - std::sqrt(2.0));
  EXPECT_NEAR(oracle::semigroup_kernel_integral(2.0, 1.0), closed, 1e-9);
  EXPECT_NEAR(tp_seminorm(s, h(1), 2.0, TraceMode::interp1), std::sqrt(closed), 1e-6);
  EXPECT_NEAR(std::sqrt(closed), 1.441027, 1e-6);
}

TEST(TraceSeminorm, HigherModesAgainstQuadrature) {
  const SplitSpace s = plane();
  for (int k : {2, 5, 9}) {
    const double ref = std::sqrt(oracle::semigroup_kernel_integral(2.0, k));
    EXPECT_NEAR(tp_seminorm(s, h(k), 2.0, TraceMode::interp1), ref, 1e-6 * ref) << k;
  }
}

TEST(TraceSeminorm, GeneratorToSemigroupRatioConstant) {
  const SplitSpace s = plane();
  const double r1 = tp_seminorm(s, h(1), 2.0, TraceMode::interp2) / tp_seminorm(s, h(1), 2.0, TraceMode::interp1);
  for (int k = 2; k <= 12; ++k) {
    const double rk =
        tp_seminorm(s, h(k), 2.0, TraceMode::interp2) / tp_seminorm(s, h(k), 2.0, TraceMode::interp1);
    EXPECT_NEAR(rk, r1, 1e-6 * r1) << k;
  }
}

TEST(TraceSeminorm, SqrtDegreeScaling) {
  const SplitSpace s = plane();
  for (TraceMode m : {TraceMode::interp1, TraceMode::interp2, TraceMode::interp3}) {
    const double a = tp_seminorm(s, h(1), 2.0, m);
    const double b = tp_seminorm(s, h(9), 2.0, m);
    EXPECT_NEAR(b / a, std::sqrt(3.0), 1e-6) << to_string(m);
  }
}

TEST(TraceSeminorm, NonQuadraticExponent) {
  const SplitSpace s = plane();
  // p = 3: (E|h_1|^3 int t^{-2}(1 - e^{-t})^3 dt)^{1/3}.
  const double ref = std::cbrt(oracle::abs_moment(3.0) * oracle::semigroup_kernel_integral(3.0, 1.0));
  EXPECT_NEAR(tp_seminorm(s, h(1), 3.0, TraceMode::interp1), ref, 1e-5 * ref);
}

TEST(TraceSeminorm, Homogeneous) {
  const SplitSpace s = plane();
  const HermiteExpansion f = h(2) + h(5).scaled(0.3);
  for (TraceMode m : {TraceMode::interp1, TraceMode::interp2, TraceMode::interp3}) {
    const double a = tp_seminorm(s, f, 2.0, m);
    EXPECT_NEAR(tp_seminorm(s, f.scaled(-3.0), 2.0, m), 3.0 * a, 1e-10 * a);
  }
}

TEST(TraceSeminorm, NearCriticalExponentReportedAsInfinity) {
  // p = 1 is excluded. Just above it the integrand decays like t^{-(p+1)/2},
  // inside the margin around -1 where the tail is treated as divergent.
  const SplitSpace s = plane();
  EXPECT_THROW((void)tp_seminorm(s, h(1), 1.0, TraceMode::interp1), std::invalid_argument);
  EXPECT_EQ(tp_seminorm(s, h(1), 1.0 + 1e-3, TraceMode::interp1), std::numeric_limits<double>::infinity());
}

TEST(TraceSeminorm, FieldRouteMatchesSpectral) {
  const SplitSpace s = plane();
  const HermiteExpansion f = h(1) + h(3).scaled(0.5);
  const ScalarField field = f.as_field(s.Y);
  const TimeGrid grid = default_time_grid(TraceMode::interp1);
  for (TraceMode m : {TraceMode::interp1, TraceMode::interp2}) {
    const double a = tp_seminorm(s, f, 2.0, m, grid);
    EXPECT_NEAR(tp_seminorm(s, field, 2.0, m, grid), a, 1e-6 * a) << to_string(m);
  }
  EXPECT_THROW((void)tp_seminorm(s, field, 2.0, TraceMode::interp3, grid), std::invalid_argument);
}

TEST(SpectralNorm, Examples) {
  const SplitSpace s = plane();
  EXPECT_NEAR(t2_norm_spectral(s, h(3)), std::sqrt(1.0 + std::sqrt(3.0)), 1e-12);
  EXPECT_NEAR(t2_norm_spectral(s, h(0)), 1.0, 1e-15);
  EXPECT_NEAR(t2_norm_spectral(s, h(1) + h(4)), std::sqrt(5.0), 1e-12);
}

TEST(NormReport, RatiosBoundedWithoutTrend) {
  const SplitSpace s = plane();
  std::vector<TraceNormReport> reports;
  for (const auto& [label, f] : hermite_family(s, 12)) reports.push_back(trace_norm_report(s, f, 2.0, label));
  ASSERT_EQ(reports.size(), 13u);
  for (const TraceNormReport& r : reports) {
    EXPECT_LE(r.ratio_max, 50.0) << r.f_label;
    EXPECT_GE(r.ratio_max, 1.0);
  }
  EXPECT_LE(std::abs(ratio_degree_trend(reports)), 0.1);
}

TEST(NormReport, InterpFourUndefinedOffTwo) {
  const SplitSpace s = plane();
  const TraceNormReport r = trace_norm_report(s, h(2), 3.0, "h_2");
  EXPECT_TRUE(std::isnan(r.norms[3]));
  EXPECT_TRUE(std::isfinite(r.ratio_max));
}

TEST(Families, Labels) {
  const SplitSpace s = plane();
  const auto fam = hermite_family(s, 3);
  ASSERT_EQ(fam.size(), 4u);
  EXPECT_EQ(fam[2].first, "h_2");
  const auto mix = random_combinations(s, 8, 5, 3, {42, 0});
  ASSERT_EQ(mix.size(), 3u);
  EXPECT_EQ(mix[0].first, "mix_0");
  EXPECT_EQ(mix[0].second.coefficients().size(), 5u);
}

TEST(Extension, Examples) {
  const SplitSpace s = plane();
  const Vector y = vec({0.8});
  EXPECT_NEAR(extension_apply(s, h(3), 0.0, y), oracle::hermite_normalized(3, 0.8), 1e-14);
  for (int k : {1, 4, 7}) {
    for (double t : {0.2, 1.1}) {
      EXPECT_NEAR(extension_apply(s, h(k), t, y), std::exp(-k * t * t) * oracle::hermite_normalized(k, 0.8), 1e-13);
    }
  }
  EXPECT_NEAR(extension_apply(s, h(0), 2.0, y), 1.0, 1e-15);
  EXPECT_THROW((void)extension_apply(s, h(1), -0.1, y), std::invalid_argument);
}

TEST(Extension, FieldRouteMatchesExpansion) {
  const SplitSpace s = plane();
  const HermiteExpansion f = h(2) + h(6).scaled(-0.4);
  const ScalarField field = f.as_field(s.Y);
  for (double t : {0.0, 0.3, 1.5}) {
    const Vector y = vec({-1.1});
    EXPECT_NEAR(extension_apply(s, field, t, y, 40), extension_apply(s, f, t, y), 1e-10);
  }
}

TEST(Extension, BoundTableAgainstClosedForm) {
  const SplitSpace s = plane();
  const ExtensionBoundReport rep = verify_extension_bound(s, hermite_family(s, 12), {42, 0}, 20'000);
  ASSERT_EQ(rep.rows.size(), 13u);
  EXPECT_NEAR(rep.rows[0].ratio, std::sqrt(0.5), 1e-10);
  for (const ExtensionBoundRow& r : rep.rows) {
    const double k = r.degree;
    EXPECT_NEAR(r.l2_norm * r.l2_norm, oracle::extension_l2_squared(k), 1e-9) << r.label;
    EXPECT_NEAR(r.grad_norm * r.grad_norm, oracle::extension_grad_squared(k), 1e-9) << r.label;
    EXPECT_NEAR(oracle::extension_l2_squared_quadrature(k), oracle::extension_l2_squared(k), 1e-10);
    EXPECT_NEAR(oracle::extension_grad_squared_quadrature(k), oracle::extension_grad_squared(k), 1e-10);
    EXPECT_NEAR(r.t2_norm, std::sqrt(1.0 + std::sqrt(k)), 1e-12);
  }
  EXPECT_TRUE(rep.bounded());
  // Low degrees have modest MC variance; the cross-check column agrees there.
  EXPECT_NEAR(rep.rows[1].mc_w12.mean, rep.rows[1].w12_norm, 4.0 * rep.rows[1].mc_w12.std_error);
}

TEST(Projection, ExtensionIsAnnihilated) {
  const SplitSpace s = plane();
  const ScalarField Ef = extension_field(s, h(3));
  for (double t : {0.0, 0.4, 1.3}) {
    const Vector x = s.from_split(t, vec({0.7}));
    EXPECT_NEAR(projection_apply(s, Ef, x), 0.0, 1e-10);
  }
}

TEST(Projection, ZeroTraceFixed) {
  const SplitSpace s = plane();
  const ScalarField u = fields::from_value(
      [&](const Vector& x) {
        const auto [t, y] = s.to_split(x);
        return t * std::cos(y(0)) + t * t;
      },
      "t cos y + t^2");
  for (double t : {0.0, 0.5, 2.0}) {
    const Vector x = s.from_split(t, vec({-0.6}));
    EXPECT_NEAR(projection_apply(s, u, x), u(x), 1e-12);
  }
}

TEST(Projection, IdempotentWithZeroTrace) {
  const SplitSpace s = plane();
  const ScalarField u = fields::from_value(
      [&](const Vector& x) {
        const auto [t, y] = s.to_split(x);
        return std::exp(-t) * (y(0) * y(0) - 1.0) + std::sin(y(0)) + t;
      },
      "u");
  const ScalarField Pu = projection_field(s, u);
  const ScalarField PPu = projection_field(s, Pu);
  const ScalarField tr = trace_of(s, Pu);
  for (double yv : {-1.5, 0.2, 0.9}) {
    EXPECT_NEAR(tr(vec({yv})), 0.0, 1e-10);
    for (double t : {0.1, 0.8}) {
      const Vector x = s.from_split(t, vec({yv}));
      EXPECT_NEAR(PPu(x), Pu(x), 1e-10);
    }
  }
}
