#include "gausstrace/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace gausstrace {

namespace {

// Normalized probabilists' Hermite h_0..h_n at x; h_n = He_n / sqrt(n!).
void normalized_hermite_pair(std::size_t n, double x, double& hn, double& hn1) {
  double prev = 0.0, cur = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  hn = cur;
  hn1 = prev;
}

QuadratureRule build_gauss_hermite(std::size_t order) {
  const auto n = static_cast<Eigen::Index>(order);
  Matrix jacobi = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    double x = solver.eigenvalues()(static_cast<Eigen::Index>(i));
    // h_n'(x) = sqrt(n) h_{n-1}(x)
    for (int it = 0; it < 5; ++it) {
      double hn, hn1;
      normalized_hermite_pair(order, x, hn, hn1);
      const double deriv = std::sqrt(static_cast<double>(order)) * hn1;
      if (deriv == 0.0) break;
      const double step = hn / deriv;
      x -= step;
      if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
    }
    double hn, hn1;
    normalized_hermite_pair(order, x, hn, hn1);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (static_cast<double>(order) * hn1 * hn1);
  }
  // Symmetrize to remove O(eps) asymmetry from the eigen solver.
  for (std::size_t i = 0; i < order / 2; ++i) {
    const std::size_t j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

QuadratureRule build_gauss_legendre(std::size_t order) {
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
    double deriv = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
                          static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) {
        p1 = x;
        p0 = 1.0;
      }
      deriv = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / deriv;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[order - 1 - i] = x;
    rule.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * deriv * deriv);
  }
  return rule;
}

template <typename Builder>
const QuadratureRule& cached_rule(std::map<std::size_t, QuadratureRule>& cache, std::mutex& mutex, std::size_t order,
                                  Builder build) {
  if (order == 0) throw std::invalid_argument("quadrature order must be >= 1");
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build(order)).first;
  return it->second;
}

}  // namespace

const QuadratureRule& gauss_hermite(std::size_t order) {
  static std::map<std::size_t, QuadratureRule> cache;
  static std::mutex mutex;
  return cached_rule(cache, mutex, order, build_gauss_hermite);
}

const QuadratureRule& gauss_legendre(std::size_t order) {
  static std::map<std::size_t, QuadratureRule> cache;
  static std::mutex mutex;
  return cached_rule(cache, mutex, order, build_gauss_legendre);
}

void for_each_tensor_node(const GaussianSpace& space, std::size_t order,
                          const std::function<void(const Vector&, double)>& visit) {
  const std::size_t n = space.dim();
  double nodes = 1.0;
  for (std::size_t k = 0; k < n; ++k) nodes *= static_cast<double>(order);
  if (nodes > static_cast<double>(kTensorNodeBudget)) {
    std::ostringstream msg;
    msg << "tensor quadrature with " << order << " nodes per axis in dimension " << n
        << " exceeds the node budget of " << kTensorNodeBudget << "; use the Monte Carlo mode or restrict dimension";
    throw QuadratureBudgetExceeded(msg.str());
  }
  const QuadratureRule& rule = gauss_hermite(order);
  const Vector& scale = space.sqrt_eigenvalues();
  std::vector<std::size_t> index(n, 0);
  Vector x(static_cast<Eigen::Index>(n));
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      x(static_cast<Eigen::Index>(k)) = scale(static_cast<Eigen::Index>(k)) * rule.nodes[index[k]];
      w *= rule.weights[index[k]];
    }
    visit(x, w);
    std::size_t k = 0;
    while (k < n && ++index[k] == order) index[k++] = 0;
    if (k == n) break;
  }
}

double gaussian_expectation(const GaussianSpace& space, std::size_t order,
                            const std::function<double(const Vector&)>& f) {
  double total = 0.0;
  for_each_tensor_node(space, order, [&](const Vector& x, double w) { total += w * f(x); });
  return total;
}

}  // namespace gausstrace
