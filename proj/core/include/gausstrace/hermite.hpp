#pragma once

#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/scalar_field.hpp"

#include <cstddef>
#include <map>
#include <vector>

namespace gausstrace {

/// Normalized probabilists' Hermite polynomials h_k = He_k / sqrt(k!),
/// orthonormal in L^2(N(0,1)). Returns h_0..h_degree at u.
[[nodiscard]] std::vector<double> normalized_hermite_values(std::size_t degree, double u);
[[nodiscard]] double normalized_hermite(std::size_t degree, double u);

using MultiIndex = std::vector<int>;

/// All multi-indices of length `dim` with |alpha| <= max_degree, ordered by
/// total degree and then lexicographically.
[[nodiscard]] std::vector<MultiIndex> multi_indices_up_to(std::size_t dim, int max_degree);

/// Truncated Wiener-Hermite chaos expansion on a GaussianSpace:
///   f = sum_alpha c_alpha H_alpha,  H_alpha(x) = prod_k h_{alpha_k}(x_k / sqrt(lambda_k)).
/// The H_alpha are orthonormal in L^2(mu), so Parseval holds coefficientwise,
/// and L H_alpha = -|alpha| H_alpha.
class HermiteExpansion {
 public:
  HermiteExpansion(std::size_t dim, int max_degree);

  /// Single normalized mode h_degree along `axis`.
  static HermiteExpansion mode(std::size_t dim, std::size_t axis, int degree, double coefficient = 1.0);

  void set(const MultiIndex& alpha, double coefficient);
  void add(const MultiIndex& alpha, double coefficient);
  [[nodiscard]] double coefficient(const MultiIndex& alpha) const;
  [[nodiscard]] const std::map<MultiIndex, double>& coefficients() const noexcept { return coeffs_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] int max_degree() const noexcept { return max_degree_; }

  [[nodiscard]] double evaluate(const GaussianSpace& space, const Vector& x) const;
  [[nodiscard]] Vector gradient(const GaussianSpace& space, const Vector& x) const;
  [[nodiscard]] Matrix hessian(const GaussianSpace& space, const Vector& x) const;

  /// Sum of squared coefficients = ||f||^2_{L^2(mu)}.
  [[nodiscard]] double l2_norm_squared() const;
  /// ||I_k f||^2: squared norm of the degree-k chaos component.
  [[nodiscard]] double chaos_norm_squared(int degree) const;
  /// e^{tL} f: coefficients scaled by e^{-|alpha| t}.
  [[nodiscard]] HermiteExpansion ou_semigroup(double t) const;
  /// L f: coefficients scaled by -|alpha|.
  [[nodiscard]] HermiteExpansion ou_generator() const;
  /// L (lambda - L)^{-1} f: coefficients scaled by -|alpha| / (lambda + |alpha|).
  [[nodiscard]] HermiteExpansion ou_resolvent_generator(double lambda) const;
  [[nodiscard]] HermiteExpansion scaled(double c) const;
  [[nodiscard]] HermiteExpansion operator+(const HermiteExpansion& other) const;

  [[nodiscard]] ScalarField as_field(const GaussianSpace& space, std::string label = "hermite") const;

 private:
  std::size_t dim_;
  int max_degree_;
  std::map<MultiIndex, double> coeffs_;
};

[[nodiscard]] int total_degree(const MultiIndex& alpha);

}  // namespace gausstrace
