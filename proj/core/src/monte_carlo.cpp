#include "gausstrace/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gausstrace {

void parallel_chunks(std::size_t count, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = (count + kMonteCarloChunk - 1) / kMonteCarloChunk;
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kMonteCarloChunk;
    body(begin, std::min(count, begin + kMonteCarloChunk), c);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

SampleSet::SampleSet(const GaussianSpace& space, const SamplerState& state, std::size_t count, unsigned workers)
    : points_(sample_gaussian(space, state, count, workers)), state_(state), workers_(workers) {}

SampleSet SampleSet::prefix(std::size_t count) const {
  if (count > size()) throw std::out_of_range("SampleSet::prefix: count exceeds set size");
  SampleSet out;
  out.points_ = points_.leftCols(static_cast<Eigen::Index>(count));
  out.state_ = state_;
  out.workers_ = workers_;
  return out;
}

Matrix sample_gaussian(const GaussianSpace& space, const SamplerState& state, std::size_t count, unsigned workers) {
  if (count == 0) throw std::invalid_argument("sample_gaussian: count must be >= 1");
  const auto n = static_cast<Eigen::Index>(space.dim());
  Matrix points(n, static_cast<Eigen::Index>(count));
  const Vector& scale = space.sqrt_eigenvalues();
  parallel_chunks(count, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(state, i);
      for (Eigen::Index k = 0; k < n; ++k) points(k, static_cast<Eigen::Index>(i)) = scale(k) * rng.normal();
    }
  });
  return points;
}

namespace {

// Welford accumulator per output; merged with Chan's pairwise update.
struct Moments {
  double count = 0.0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Moments(std::size_t outputs) : mean(outputs, 0.0), m2(outputs, 0.0) {}

  void push(std::span<const double> values) {
    count += 1.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double delta = values[j] - mean[j];
      mean[j] += delta / count;
      m2[j] += delta * (values[j] - mean[j]);
    }
  }

  void merge(const Moments& other) {
    if (other.count == 0.0) return;
    const double total = count + other.count;
    for (std::size_t j = 0; j < mean.size(); ++j) {
      const double delta = other.mean[j] - mean[j];
      mean[j] += delta * other.count / total;
      m2[j] += other.m2[j] + delta * delta * count * other.count / total;
    }
    count = total;
  }

  [[nodiscard]] std::vector<Estimate> finish() const {
    std::vector<Estimate> out(mean.size());
    for (std::size_t j = 0; j < mean.size(); ++j) {
      out[j].mean = mean[j];
      out[j].std_error = count > 1.0 ? std::sqrt(m2[j] / (count - 1.0) / count) : 0.0;
    }
    return out;
  }
};

std::vector<Estimate> reduce(std::size_t count, unsigned workers, std::size_t outputs,
                             const std::function<void(std::size_t, std::span<double>)>& sample) {
  if (count == 0) throw std::invalid_argument("Monte Carlo reduction needs at least one sample");
  const std::size_t chunks = (count + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<Moments> partial(chunks, Moments(outputs));
  parallel_chunks(count, workers, [&](std::size_t begin, std::size_t end, std::size_t c) {
    std::vector<double> buffer(outputs);
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(buffer.begin(), buffer.end(), 0.0);
      sample(i, buffer);
      partial[c].push(buffer);
    }
  });
  Moments total(outputs);
  for (const Moments& m : partial) total.merge(m);
  return total.finish();
}

}  // namespace

std::vector<Estimate> integrate(const SampleSet& samples, std::size_t outputs, const Integrand& f) {
  const Matrix& points = samples.points();
  return reduce(samples.size(), samples.workers(), outputs, [&](std::size_t i, std::span<double> out) {
    const Vector x = points.col(static_cast<Eigen::Index>(i));
    f(x, out);
  });
}

std::vector<Estimate> integrate_indexed(const SamplerState& state, std::size_t count, unsigned workers,
                                        std::size_t outputs, const IndexedIntegrand& f) {
  return reduce(count, workers, outputs, [&](std::size_t i, std::span<double> out) {
    CounterRng rng(state, i);
    f(i, rng, out);
  });
}

}  // namespace gausstrace
