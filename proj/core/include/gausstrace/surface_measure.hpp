#pragma once

// Hausdorff-Gauss surface measure rho on level sets G^{-1}(xi): weighted
// surface quadrature and the coarea (kernel density) route.

#include "gausstrace/domains.hpp"
#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/monte_carlo.hpp"
#include "gausstrace/scalar_field.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gausstrace {

using PointFunction = std::function<double(const Vector&)>;

enum class SurfaceMethod { parametrized, mc_band };

/// Nodes on G^{-1}(level) with rho-weights: sum_i weights[i] g(points[i])
/// approximates the integral of g d rho.
struct SurfaceQuadrature {
  std::vector<Vector> points;
  std::vector<double> weights;
  double level = 0.0;
  SurfaceMethod method = SurfaceMethod::parametrized;

  [[nodiscard]] double apply(const PointFunction& g) const;
  [[nodiscard]] double total_weight() const;
};

struct SurfaceIntegral {
  double value = 0.0;
  double error_estimate = 0.0;  ///< |I_2m - I_m|
};

/// The surface route has no parametrization for this domain and dimension.
class SurfaceRouteUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density of rho against Euclidean surface measure at a level-set point:
/// gaussian density times |Q^{1/2} DG| / |DG|.
[[nodiscard]] double surface_weight(const GaussianSpace& space, const LevelSetDomain& domain, const Vector& x);

/// Parametrized rho-quadrature of G^{-1}(level). Uses the domain's closed-form
/// surface, or marching squares with Newton projection for n = 2.
[[nodiscard]] SurfaceQuadrature surface_quadrature(const GaussianSpace& space, const LevelSetDomain& domain,
                                                   double level, std::size_t resolution);

/// Integral of g d rho over G^{-1}(level) at resolutions m and 2m; reports the
/// finer value and their difference.
[[nodiscard]] SurfaceIntegral surface_integral(const GaussianSpace& space, const LevelSetDomain& domain,
                                               const PointFunction& g, double level, std::size_t resolution);
[[nodiscard]] SurfaceIntegral surface_integral(const GaussianSpace& space, const LevelSetDomain& domain,
                                               const ScalarField& phi, double level, std::size_t resolution);

/// Coarea band quadrature from Gaussian samples: points with |G - level| < eps,
/// weights |D_H G| / (2 eps N).
[[nodiscard]] SurfaceQuadrature band_quadrature(const GaussianSpace& space, const LevelSetDomain& domain,
                                                const SampleSet& samples, double level, double eps);

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> std_errors;
  std::string phi_label;
};

/// Evenly spaced points strictly inside (-delta, delta).
[[nodiscard]] std::vector<double> band_grid(double delta, std::size_t points);

/// 1.06 * sd(G) * N^{-1/5} over the sample set.
[[nodiscard]] double silverman_bandwidth(const LevelSetDomain& domain, const SampleSet& samples);

inline constexpr std::size_t kMinKdeSamples = 10'000;

/// Gaussian-kernel estimate of the density of phi mu o G^{-1} on `grid`,
/// computed as the difference of the phi+ and phi- estimates. Per-point
/// standard errors come from the per-sample kernel terms.
[[nodiscard]] DensityCurve qphi_estimate(const LevelSetDomain& domain, const ScalarField& phi,
                                         const SampleSet& samples, const std::vector<double>& grid,
                                         double bandwidth);
/// Convenience form drawing `count` samples from `state`, 41 grid points.
[[nodiscard]] DensityCurve qphi_estimate(const GaussianSpace& space, const LevelSetDomain& domain,
                                         const ScalarField& phi, const SamplerState& state, std::size_t count,
                                         double bandwidth);

inline constexpr double kMinHGradient = 1e-12;

/// phi_1 = div(phi D_H G / |D_H G|^2): value in closed form, gradient and
/// Hessian by central differences (flagged as such).
[[nodiscard]] ScalarField phi1_field(const GaussianSpace& space, const LevelSetDomain& domain,
                                     const ScalarField& phi);
[[nodiscard]] double phi1_value(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                const Vector& x);

struct DerivativeCheckRow {
  double xi = 0.0;
  double fd_derivative = 0.0;  ///< central difference of the phi curve
  double phi1_value = 0.0;     ///< estimate of q_{phi_1}
  double std_error = 0.0;      ///< SE of the per-sample difference
};

struct QphiDerivativeReport {
  std::vector<DerivativeCheckRow> rows;  ///< interior grid points
  DensityCurve phi_curve;
  DensityCurve phi1_curve;
  double max_abs_difference = 0.0;
  double max_standardized = 0.0;  ///< max |difference| / std_error
  double fundamental_lhs = 0.0;   ///< trapezoid integral of q_{phi_1}
  double fundamental_rhs = 0.0;   ///< q_phi(last) - q_phi(first)
  double fundamental_error = 0.0;
};

/// Compares the finite-difference derivative of the phi curve with the phi_1
/// curve computed from the same samples and bandwidth.
[[nodiscard]] QphiDerivativeReport qphi_derivative_check(const GaussianSpace& space, const LevelSetDomain& domain,
                                                         const ScalarField& phi, const SampleSet& samples,
                                                         const std::vector<double>& grid, double bandwidth);

/// Monte Carlo estimate of rho(G^{-1}(0)) as the integral over O of
/// div(D_H G / |D_H G|).
[[nodiscard]] Estimate rho_total_via_identity(const GaussianSpace& space, const LevelSetDomain& domain,
                                              const SampleSet& samples);
[[nodiscard]] Estimate rho_total_via_identity(const GaussianSpace& space, const LevelSetDomain& domain,
                                              const SamplerState& state, std::size_t count, unsigned workers = 1);

/// Monte Carlo estimate of the integral of |phi| over the band O_delta; the
/// L^1 bound for the density curves compares against it.
[[nodiscard]] Estimate band_abs_mass(const LevelSetDomain& domain, const ScalarField& phi, const SampleSet& samples);

/// Trapezoid integral of |values| over the grid.
[[nodiscard]] double trapezoid_abs(const DensityCurve& curve);

}  // namespace gausstrace
