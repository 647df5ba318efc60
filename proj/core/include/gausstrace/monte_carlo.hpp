#pragma once

#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/rng.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gausstrace {

/// Mean and standard error of a Monte Carlo estimate.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct McConfig {
  SamplerState state;
  std::size_t count = 1'000'000;
  unsigned workers = 1;
};

/// Samples are reduced in chunks of this size; chunk results are merged in
/// chunk order so the outcome does not depend on the worker count.
inline constexpr std::size_t kMonteCarloChunk = 8192;

/// Runs body(begin, end, chunk) over [0, count) split into fixed chunks,
/// distributing chunks over `workers` threads.
void parallel_chunks(std::size_t count, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// i.i.d. draws from N(0, Q) in eigen coordinates, one column per sample.
/// Column i depends only on (state, i).
class SampleSet {
 public:
  SampleSet(const GaussianSpace& space, const SamplerState& state, std::size_t count, unsigned workers = 1);

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  [[nodiscard]] const Matrix& points() const noexcept { return points_; }
  [[nodiscard]] const SamplerState& state() const noexcept { return state_; }
  [[nodiscard]] unsigned workers() const noexcept { return workers_; }
  /// First `count` samples as a new set (same stream, same draws).
  [[nodiscard]] SampleSet prefix(std::size_t count) const;

 private:
  SampleSet() = default;
  Matrix points_;
  SamplerState state_;
  unsigned workers_ = 1;
};

/// Per-sample integrand writing `outputs` values into `out`.
using Integrand = std::function<void(const Vector& x, std::span<double> out)>;

/// Sample mean and standard error for each output of `f` over the set.
[[nodiscard]] std::vector<Estimate> integrate(const SampleSet& samples, std::size_t outputs, const Integrand& f);

/// Same reduction for integrands that draw their own randomness: `f` gets the
/// sample index and a generator positioned at that index.
using IndexedIntegrand = std::function<void(std::size_t index, CounterRng& rng, std::span<double> out)>;
[[nodiscard]] std::vector<Estimate> integrate_indexed(const SamplerState& state, std::size_t count, unsigned workers,
                                                      std::size_t outputs, const IndexedIntegrand& f);

/// Matrix of i.i.d. N(0, Q) draws, dim x count, eigen coordinates.
[[nodiscard]] Matrix sample_gaussian(const GaussianSpace& space, const SamplerState& state, std::size_t count,
                                     unsigned workers = 1);

}  // namespace gausstrace
