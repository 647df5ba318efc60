#pragma once

#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/rng.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace gausstrace {

enum class Smoothness { smooth, lipschitz };
enum class DerivativeSource { analytic, finite_difference };

/// Scalar function on R^n (eigen coordinates) with its Euclidean gradient and
/// Hessian. `hessian` may be empty for fields that only need first order.
struct ScalarField {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  Smoothness smoothness = Smoothness::smooth;
  DerivativeSource derivatives = DerivativeSource::analytic;
  std::string label;

  double operator()(const Vector& x) const { return value(x); }
  [[nodiscard]] bool has_hessian() const noexcept { return static_cast<bool>(hessian); }
};

/// H-valued field Phi = sum_k phi_k v_k, stored by its Cameron-Martin
/// coefficients.
struct VectorFieldH {
  std::vector<ScalarField> components;
  std::string label;
};

/// Central-difference step used by every validator and fallback.
[[nodiscard]] inline double fd_step(const Vector& x) { return 1e-5 * (1.0 + x.norm()); }

[[nodiscard]] Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x);
[[nodiscard]] Matrix fd_jacobian(const std::function<Vector(const Vector&)>& g, const Vector& x);

struct DerivativeCheck {
  double max_gradient_error = 0.0;  ///< relative, max over probes
  double max_hessian_error = 0.0;
  std::size_t probes = 0;
};

/// Compares analytic derivatives against central differences at `probes`
/// Gaussian-distributed points. Relative error uses max(1, |reference|) as
/// the scale so that near-zero derivatives are compared absolutely.
[[nodiscard]] DerivativeCheck check_derivatives(const ScalarField& f, const GaussianSpace& space,
                                                const SamplerState& state, std::size_t probes = 100);

namespace fields {

[[nodiscard]] ScalarField constant(std::size_t dim, double c);
/// f(x) = <a, x>.
[[nodiscard]] ScalarField linear(const Vector& a);
/// f(x) = x_j (0-based j).
[[nodiscard]] ScalarField coordinate(std::size_t dim, std::size_t j);
/// f(x) = x_j^2.
[[nodiscard]] ScalarField coordinate_square(std::size_t dim, std::size_t j);
/// f(x) = sum_k a_k x_k^2 + c.
[[nodiscard]] ScalarField diagonal_quadratic(const Vector& a, double c);
/// f(x) = exp(-|x - center|^2 / width).
[[nodiscard]] ScalarField gaussian_bump(const Vector& center, double width);
/// f(x) = u(x) * eta(G(x)); eta smooth, 0 on [-eps, inf), 1 on (-inf, -2 eps].
[[nodiscard]] ScalarField boundary_cutoff(const ScalarField& u, const ScalarField& G, double eps);
/// f(x) = |u(x)|^q, derivatives taken away from the zero set of u.
[[nodiscard]] ScalarField abs_power(const ScalarField& u, double q);

[[nodiscard]] ScalarField sum(const ScalarField& a, const ScalarField& b);
[[nodiscard]] ScalarField product(const ScalarField& a, const ScalarField& b);
[[nodiscard]] ScalarField scaled(const ScalarField& a, double c);
/// Wraps a bare value callback; gradient and Hessian by central differences.
[[nodiscard]] ScalarField from_value(std::function<double(const Vector&)> value, std::string label);

}  // namespace fields

namespace vector_fields {

/// Phi = phi v_k (single nonzero Cameron-Martin component).
[[nodiscard]] VectorFieldH single(std::size_t dim, std::size_t k, const ScalarField& phi);
/// Phi = D_H G / |D_H G|_H.
[[nodiscard]] VectorFieldH unit_normal(const GaussianSpace& space, const ScalarField& G);

}  // namespace vector_fields

}  // namespace gausstrace
