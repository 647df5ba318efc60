#pragma once

// Halfspace program: X = span h (+) Y with mu = N(0,1) x mu_Y, the trace-space
// seminorms in semigroup, generator and resolvent form, the spectral T_2 norm,
// the Mehler extension E and the projection P u = u - E(Tr u).

#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/hermite.hpp"
#include "gausstrace/monte_carlo.hpp"
#include "gausstrace/rng.hpp"
#include "gausstrace/scalar_field.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace gausstrace {

/// Split coordinates for the normal direction h = v_{h_index} (0-based).
/// t = x_h / sqrt(lambda_h) is standard normal; y collects the other eigen
/// coordinates and has law mu_Y.
struct SplitSpace {
  GaussianSpace parent;
  std::size_t h_index = 0;
  GaussianSpace Y;

  [[nodiscard]] std::pair<double, Vector> to_split(const Vector& x) const;
  [[nodiscard]] Vector from_split(double t, const Vector& y) const;
  [[nodiscard]] std::size_t y_dim() const noexcept { return Y.dim(); }
};

/// Throws std::out_of_range for a bad index and std::invalid_argument for n < 2.
[[nodiscard]] SplitSpace split(const GaussianSpace& space, std::size_t h_index);

struct SplitCovarianceCheck {
  double t_variance = 0.0;
  double max_cross_covariance = 0.0;  ///< max |cov(t, y_j / sqrt(lambda_j))|
  double tolerance = 0.0;             ///< 4 / sqrt(N)
  [[nodiscard]] bool block_diagonal() const { return max_cross_covariance <= tolerance; }
};

/// Empirical check that mapped samples have block-diagonal covariance.
[[nodiscard]] SplitCovarianceCheck split_covariance_check(const SplitSpace& split, const SamplerState& state,
                                                          std::size_t count);

enum class TraceMode { interp1, interp2, interp3 };

[[nodiscard]] const char* to_string(TraceMode mode) noexcept;

/// Log-spaced grid for the time (or resolvent) integral. Mass below `lower`
/// and above `upper` is added from the local power law of the integrand.
struct TimeGrid {
  double lower = 1e-6;
  double upper = 50.0;
  std::size_t points_per_decade = 64;
};

/// [1e-6, 50] for the semigroup forms, [1e-6, 1e6] for the resolvent form.
[[nodiscard]] TimeGrid default_time_grid(TraceMode mode);

/// p-th root of the trace-space integral of f on Y. Exact per-mode integrand
/// for p = 2; otherwise L^p(mu_Y) norms by tensor Gauss-Hermite quadrature.
/// Returns +infinity when the local exponent near zero (or in the tail) makes
/// the integral diverge. Requires p > 1.
[[nodiscard]] double tp_seminorm(const SplitSpace& split, const HermiteExpansion& f, double p, TraceMode mode,
                                 const TimeGrid& grid);
[[nodiscard]] double tp_seminorm(const SplitSpace& split, const HermiteExpansion& f, double p, TraceMode mode);

/// Field version through Mehler quadrature. The semigroup and generator
/// forms are supported; the generator form needs the Hessian of f. The
/// resolvent form throws std::invalid_argument.
[[nodiscard]] double tp_seminorm(const SplitSpace& split, const ScalarField& f, double p, TraceMode mode,
                                 const TimeGrid& grid, std::size_t quad_order = 40);

/// ||f||_{L^p(mu_Y)} + tp_seminorm.
[[nodiscard]] double tp_norm(const SplitSpace& split, const HermiteExpansion& f, double p, TraceMode mode);

/// L^p(mu_Y) norm of an expansion by tensor Gauss-Hermite quadrature (exact
/// Parseval sum at p = 2).
[[nodiscard]] double lp_norm(const SplitSpace& split, const HermiteExpansion& f, double p);

/// (||f||^2 + sum_k k^{1/2} ||I_k f||^2)^{1/2}.
[[nodiscard]] double t2_norm_spectral(const SplitSpace& split, const HermiteExpansion& f);

struct TraceNormReport {
  std::string f_label;
  int degree = 0;  ///< highest chaos with a nonzero coefficient
  double p = 2.0;
  /// interp1, interp2, interp3 as full norms, then the spectral norm (NaN
  /// unless p = 2).
  std::array<double, 4> norms{};
  /// norms[i] / norms[j] for i < j, in the order (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
  std::array<double, 6> ratios{};
  /// Largest norm over smallest, over the finite entries.
  double ratio_max = 0.0;
};

[[nodiscard]] TraceNormReport trace_norm_report(const SplitSpace& split, const HermiteExpansion& f, double p,
                                                std::string label);

/// Largest |slope| of log(norms[i] / norms[j]) against log degree, over all
/// finite pairs and the reports of degree >= 1. Zero with fewer than two
/// distinct degrees.
[[nodiscard]] double ratio_degree_trend(const std::vector<TraceNormReport>& reports);

/// h_k along the first Y axis for k = 0..max_degree, with labels "h_k".
[[nodiscard]] std::vector<std::pair<std::string, HermiteExpansion>> hermite_family(const SplitSpace& split,
                                                                                    int max_degree);
/// `count` combinations of `modes` distinct normalized Hermite modes of
/// degree 1..max_degree with N(0,1) coefficients, labels "mix_i".
[[nodiscard]] std::vector<std::pair<std::string, HermiteExpansion>> random_combinations(
    const SplitSpace& split, int max_degree, std::size_t modes, std::size_t count, const SamplerState& state);

/// (E f)(t h + y) = (e^{t^2 L_Y} f)(y), t >= 0.
[[nodiscard]] double extension_apply(const SplitSpace& split, const HermiteExpansion& f, double t, const Vector& y);
[[nodiscard]] double extension_apply(const SplitSpace& split, const ScalarField& f, double t, const Vector& y,
                                     std::size_t quad_order);

/// E f as a field on the parent space (eigen coordinates), value and
/// gradient; the formula is even in t, so it is defined on all of X.
[[nodiscard]] ScalarField extension_field(const SplitSpace& split, const HermiteExpansion& f);

struct ExtensionBoundRow {
  std::string label;
  int degree = 0;
  double l2_norm = 0.0;    ///< |E f|_{L^2(O)}
  double grad_norm = 0.0;  ///< | |D_H E f|_H |_{L^2(O)}
  double w12_norm = 0.0;
  double t2_norm = 0.0;
  double ratio = 0.0;
  /// Plain Monte Carlo estimate of w12_norm over the same O; its variance
  /// grows quickly with the degree, so it is a cross-check only.
  Estimate mc_w12;
};

struct ExtensionBoundReport {
  std::vector<ExtensionBoundRow> rows;
  double max_ratio = 0.0;
  /// Least-squares slope of log ratio against log degree over degree >= 1.
  double slope = 0.0;
  [[nodiscard]] bool bounded(double max_slope = 0.1) const { return slope <= max_slope; }
};

/// W^{1,2}(O, mu) norm of E f over O = {t > 0} divided by the spectral T_2
/// norm. The norm is integrated by Gauss-Legendre in t and tensor
/// Gauss-Hermite in y (exact in y for polynomials); `mc_count` > 0 adds a
/// Monte Carlo estimate on shared samples.
[[nodiscard]] ExtensionBoundReport verify_extension_bound(
    const SplitSpace& split, const std::vector<std::pair<std::string, HermiteExpansion>>& family,
    const SamplerState& state, std::size_t mc_count, unsigned workers = 1);

/// Tr u(y) = u(0 h + y) as a field on Y (value only).
[[nodiscard]] ScalarField trace_of(const SplitSpace& split, const ScalarField& u);

/// P u(x) = u(x) - E(Tr u)(x), x in parent eigen coordinates with t(x) >= 0.
[[nodiscard]] double projection_apply(const SplitSpace& split, const ScalarField& u, const Vector& x,
                                      std::size_t quad_order = 40);
/// P u as a field (value only).
[[nodiscard]] ScalarField projection_field(const SplitSpace& split, const ScalarField& u,
                                           std::size_t quad_order = 40);

}  // namespace gausstrace
