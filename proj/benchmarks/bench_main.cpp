#include "gausstrace/gauss_core.hpp"
#include "gausstrace/halfspace_spectral.hpp"
#include "gausstrace/surface_measure.hpp"

#include <benchmark/benchmark.h>

using namespace gausstrace;

namespace {

void BM_SampleGaussian(benchmark::State& state) {
  const GaussianSpace space = GaussianSpace::isotropic(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sample_gaussian(space, {42, 0}, 100'000));
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_SampleGaussian)->Arg(1)->Arg(4)->Arg(16);

void BM_MehlerApply(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t order = static_cast<std::size_t>(state.range(1));
  const GaussianSpace space = GaussianSpace::isotropic(n);
  const ScalarField f = fields::gaussian_bump(Vector::Zero(static_cast<Eigen::Index>(n)), 2.0);
  const Vector x = Vector::Constant(static_cast<Eigen::Index>(n), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(mehler_apply(space, f, 0.3, x, order));
}
BENCHMARK(BM_MehlerApply)->Args({1, 20})->Args({2, 20})->Args({3, 12});

void BM_SurfaceIntegralSphere(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const GaussianSpace space = GaussianSpace::isotropic(n);
  const LevelSetDomain ball = make_ball(space, 1.0);
  const ScalarField one = fields::constant(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(surface_integral(space, ball, one, 0.0, 64));
}
BENCHMARK(BM_SurfaceIntegralSphere)->Arg(2)->Arg(3);

void BM_QphiKde(benchmark::State& state) {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const LevelSetDomain ball = make_ball(space, 1.0);
  const SampleSet samples(space, {42, 0}, static_cast<std::size_t>(state.range(0)));
  const ScalarField phi = fields::coordinate_square(2, 0);
  const double b = silverman_bandwidth(ball, samples);
  const auto grid = band_grid(ball.band_delta, 41);
  for (auto _ : state) benchmark::DoNotOptimize(qphi_estimate(ball, phi, samples, grid, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QphiKde)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_TraceSeminorm(benchmark::State& state) {
  const SplitSpace s = split(GaussianSpace::isotropic(2), 0);
  const HermiteExpansion f = HermiteExpansion::mode(1, 0, 6);
  for (auto _ : state) benchmark::DoNotOptimize(tp_seminorm(s, f, 2.0, TraceMode::interp3));
}
BENCHMARK(BM_TraceSeminorm);

}  // namespace

BENCHMARK_MAIN();
