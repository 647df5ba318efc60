#pragma once

// Cameron-Martin calculus on a finite-dimensional Gaussian space.

#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/hermite.hpp"
#include "gausstrace/monte_carlo.hpp"
#include "gausstrace/quadrature.hpp"
#include "gausstrace/rng.hpp"
#include "gausstrace/scalar_field.hpp"

#include <cstddef>

namespace gausstrace {

/// Coordinates D_k f(x) = <D_H f(x), v_k>_H = sqrt(lambda_k) d_k f(x).
/// Their Euclidean norm is |D_H f(x)|_H.
[[nodiscard]] Vector h_gradient(const GaussianSpace& space, const ScalarField& f, const Vector& x);
[[nodiscard]] Vector h_gradient_of(const GaussianSpace& space, const Vector& euclidean_gradient);
[[nodiscard]] double h_gradient_norm(const GaussianSpace& space, const Vector& euclidean_gradient);

/// D^2_H f(x) in the v_k basis: sqrt(lambda_j lambda_k) d_jk f(x).
[[nodiscard]] Matrix h_hessian(const GaussianSpace& space, const ScalarField& f, const Vector& x);

/// v^_k(x) = <x, e_k> / sqrt(lambda_k), k 0-based.
[[nodiscard]] double vhat_eval(const GaussianSpace& space, std::size_t k, const Vector& x);

/// Ornstein-Uhlenbeck generator L f(x) = trace(Q D^2 f(x)) - <x, D f(x)>.
[[nodiscard]] double ou_apply(const GaussianSpace& space, const ScalarField& f, const Vector& x);

/// Mehler formula T(t) f(x) = E f(e^{-t} x + sqrt(1 - e^{-2t}) Y), Y ~ mu, by
/// tensor Gauss-Hermite quadrature (exact for polynomials of degree
/// < 2 quad_order). Throws QuadratureBudgetExceeded if the rule is too large
/// or the dimension exceeds kTensorMaxDim.
[[nodiscard]] double mehler_apply(const GaussianSpace& space, const ScalarField& f, double t, const Vector& x,
                                  std::size_t quad_order);
/// Monte Carlo variant of the Mehler average for large dimensions.
[[nodiscard]] Estimate mehler_apply_mc(const GaussianSpace& space, const ScalarField& f, double t, const Vector& x,
                                       const SamplerState& state, std::size_t samples = 100'000);

/// Default dispatch: tensor quadrature (std_error 0) when dim <= kTensorMaxDim
/// and the node budget allows, otherwise Monte Carlo with `mc_samples` draws.
[[nodiscard]] Estimate mehler_apply_default(const GaussianSpace& space, const ScalarField& f, double t,
                                            const Vector& x, std::size_t quad_order, const SamplerState& state,
                                            std::size_t mc_samples = 100'000);

/// T(t) f as a ScalarField (value only evaluated by quadrature; derivatives
/// pushed through the Mehler integral, D T(t) f = e^{-t} T(t) D f).
[[nodiscard]] ScalarField mehler_field(const GaussianSpace& space, const ScalarField& f, double t,
                                       std::size_t quad_order);

/// Gaussian divergence div Phi(x) = sum_k (D_k phi_k - phi_k v^_k).
[[nodiscard]] double gaussian_divergence(const GaussianSpace& space, const VectorFieldH& Phi, const Vector& x);

/// div(D_H G / |D_H G|_H) = L G / |D_H G| - <D^2_H G D_H G, D_H G> / |D_H G|^3.
[[nodiscard]] double unit_normal_divergence(const GaussianSpace& space, const ScalarField& G, const Vector& x);

/// Coefficients <f, H_alpha>_{L^2(mu)} for |alpha| <= max_degree by tensor
/// quadrature. Requires quad_order > max_degree.
[[nodiscard]] HermiteExpansion hermite_transform(const GaussianSpace& space, const ScalarField& f, int max_degree,
                                                 std::size_t quad_order);

}  // namespace gausstrace
