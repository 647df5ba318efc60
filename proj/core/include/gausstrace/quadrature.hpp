#pragma once

#include "gausstrace/gaussian_space.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace gausstrace {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal N(0,1): weights sum to one and
/// the rule integrates polynomials of degree < 2 * order exactly.
/// Golub-Welsch for the nodes, Newton polish on the normalized recurrence.
[[nodiscard]] const QuadratureRule& gauss_hermite(std::size_t order);

/// Gauss-Legendre rule on [-1, 1].
[[nodiscard]] const QuadratureRule& gauss_legendre(std::size_t order);

/// Raised when a tensor-product rule would exceed the node budget; callers
/// fall back to Monte Carlo or restrict the dimension.
class QuadratureBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node budget for tensor Gauss-Hermite rules (order^dim).
inline constexpr std::size_t kTensorNodeBudget = 4'000'000;
/// Largest dimension integrated by tensor quadrature by default.
inline constexpr std::size_t kTensorMaxDim = 6;

/// Integral of f against N(0, Q) by a tensor Gauss-Hermite rule of `order`
/// nodes per axis. Throws QuadratureBudgetExceeded when order^n exceeds the
/// budget.
[[nodiscard]] double gaussian_expectation(const GaussianSpace& space, std::size_t order,
                                          const std::function<double(const Vector&)>& f);

/// Visits every node of the tensor rule for N(0, Q): (point, weight).
void for_each_tensor_node(const GaussianSpace& space, std::size_t order,
                          const std::function<void(const Vector&, double)>& visit);

}  // namespace gausstrace
