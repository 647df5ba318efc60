#include "gausstrace/monte_carlo.hpp"
#include "gausstrace/quadrature.hpp"
#include "gausstrace/rng.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace gausstrace;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const PhiloxCounter out =
      philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const PhiloxCounter out =
      philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, RandomAccessMatchesSequence) {
  const SamplerState s{42, 0};
  CounterRng a(s, 17);
  CounterRng b(s, 17);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  CounterRng c(s, 18);
  CounterRng d(s, 17);
  EXPECT_NE(c.uniform(), d.uniform());
}

TEST(CounterRng, UniformOpenInterval) {
  CounterRng rng({7, 3}, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(SamplerState, SubstreamsDistinct) {
  const SamplerState root{42, 0};
  std::set<std::pair<std::uint64_t, std::uint32_t>> seen;
  for (std::uint32_t i = 0; i < 256; ++i) {
    const SamplerState s = root.substream(i);
    seen.insert({s.seed, s.stream_id});
    EXPECT_EQ(s, root.substream(i));
  }
  EXPECT_EQ(seen.size(), 256u);
}

TEST(Sampling, StandardNormalVariance) {
  const Matrix x = sample_gaussian(GaussianSpace::isotropic(1), {42, 0}, 1'000'000);
  const double mean = x.row(0).mean();
  const double var = (x.row(0).array() - mean).square().mean();
  EXPECT_NEAR(var, 1.0, 0.005);
}

TEST(Sampling, DeclaredSpectrum) {
  const std::size_t n = 1'000'000;
  Vector lambda(2);
  lambda << 4.0, 1.0;
  const Matrix x = sample_gaussian(GaussianSpace::diagonal(lambda), {42, 0}, n);
  const double c00 = x.row(0).squaredNorm() / n;
  const double c11 = x.row(1).squaredNorm() / n;
  const double c01 = x.row(0).dot(x.row(1)) / n;
  // SE of a sample second moment of N(0, s^2) is s^2 sqrt(2 / n).
  EXPECT_NEAR(c00, 4.0, 3.0 * 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(c11, 1.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(c01, 0.0, 3.0 * 2.0 / std::sqrt(double(n)));
}

TEST(Sampling, BitwiseReproducible) {
  const GaussianSpace space = GaussianSpace::isotropic(3);
  const Matrix a = sample_gaussian(space, {42, 0}, 20000);
  const Matrix b = sample_gaussian(space, {42, 0}, 20000);
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(Sampling, WorkerCountDoesNotChangeDraws) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const Matrix a = sample_gaussian(space, {5, 1}, 50000, 1);
  const Matrix b = sample_gaussian(space, {5, 1}, 50000, 4);
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(Integrate, MeanAndErrorOfKnownIntegrand) {
  const SampleSet s(GaussianSpace::isotropic(1), {42, 0}, 400000);
  const auto est = integrate(s, 1, [](const Vector& x, std::span<double> out) { out[0] = x(0) * x(0); });
  EXPECT_NEAR(est[0].std_error, std::sqrt(2.0 / 400000), 2e-4);
  EXPECT_NEAR(est[0].mean, 1.0, 3.0 * est[0].std_error);
}

TEST(GaussHermite, WeightsAndMomentsExact) {
  for (std::size_t order : {1u, 2u, 5u, 12u, 30u}) {
    const QuadratureRule& r = gauss_hermite(order);
    ASSERT_EQ(r.nodes.size(), order);
    for (std::size_t m = 0; m < 2 * order; ++m) {
      double q = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < order; ++i) {
        q += r.weights[i] * std::pow(r.nodes[i], double(m));
        scale += r.weights[i] * std::pow(std::abs(r.nodes[i]), double(m));
      }
      // E Z^m = (m-1)!! for even m, 0 for odd m.
      double exact = 0.0;
      if (m % 2 == 0) {
        exact = 1.0;
        for (std::size_t j = m; j > 1; j -= 2) exact *= double(j - 1);
      }
      // Odd moments cancel; round-off scales with the sum of |terms|.
      EXPECT_NEAR(q, exact, 1e-12 * std::max(1.0, scale)) << "order " << order << " moment " << m;
    }
  }
}

TEST(GaussHermite, NonPolynomialAgainstBoost) {
  const double q = gaussian_expectation(GaussianSpace::isotropic(1), 40,
                                        [](const Vector& x) { return std::cos(x(0)); });
  EXPECT_NEAR(q, std::exp(-0.5), 1e-12);
  const double o = oracle::normal_expectation([](double z) { return std::cos(z); });
  EXPECT_NEAR(q, o, 1e-12);
}

TEST(GaussLegendre, PolynomialExactness) {
  const QuadratureRule& r = gauss_legendre(8);
  for (int m = 0; m < 16; ++m) {
    double q = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) q += r.weights[i] * std::pow(r.nodes[i], m);
    const double exact = (m % 2 == 0) ? 2.0 / (m + 1) : 0.0;
    EXPECT_NEAR(q, exact, 1e-13);
  }
}

TEST(TensorQuadrature, AnisotropicSecondMoments) {
  Vector lambda(3);
  lambda << 4.0, 1.0, 0.25;
  const GaussianSpace space = GaussianSpace::diagonal(lambda);
  const double q = gaussian_expectation(space, 6, [](const Vector& x) { return x.squaredNorm(); });
  EXPECT_NEAR(q, 5.25, 1e-12);
}

TEST(TensorQuadrature, BudgetExceededThrows) {
  EXPECT_THROW((void)gaussian_expectation(GaussianSpace::isotropic(8), 20, [](const Vector&) { return 1.0; }),
               QuadratureBudgetExceeded);
}
