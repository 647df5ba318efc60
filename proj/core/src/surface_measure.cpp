#include "gausstrace/surface_measure.hpp"

#include "gausstrace/gauss_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gausstrace {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gaussian_kernel(double u, double b) {
  const double z = u / b;
  return kInvSqrt2Pi / b * std::exp(-0.5 * z * z);
}

// Box half-width for the implicit fallback: mu puts mass < 1e-10 outside.
double marching_extent(const GaussianSpace& space) { return 7.0 * std::sqrt(space.max_eigenvalue()); }

Vector newton_project(const ScalarField& G, Vector x, double level) {
  for (int it = 0; it < 4; ++it) {
    const Vector g = G.gradient(x);
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0)) break;
    x -= (G.value(x) - level) / g2 * g;
  }
  return x;
}

// Marching squares on a cells x cells grid over [-L, L]^2; midpoint rule on
// each segment after projecting the midpoint onto the level set.
SurfacePatch marching_squares(const GaussianSpace& space, const ScalarField& G, double level, std::size_t cells) {
  const double L = marching_extent(space);
  const double h = 2.0 * L / static_cast<double>(cells);
  const std::size_t m = cells + 1;
  std::vector<double> values(m * m);
  Vector x(2);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      x << -L + h * static_cast<double>(i), -L + h * static_cast<double>(j);
      values[j * m + i] = G.value(x) - level;
    }
  SurfacePatch patch;
  auto corner = [&](std::size_t i, std::size_t j) {
    return Vector{{-L + h * static_cast<double>(i), -L + h * static_cast<double>(j)}};
  };
  for (std::size_t j = 0; j < cells; ++j) {
    for (std::size_t i = 0; i < cells; ++i) {
      const std::array<Vector, 4> p{corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)};
      const std::array<double, 4> v{values[j * m + i], values[j * m + i + 1], values[(j + 1) * m + i + 1],
                                    values[(j + 1) * m + i]};
      std::array<Vector, 4> cross;
      std::array<bool, 4> hit{};
      int hits = 0;
      for (int e = 0; e < 4; ++e) {
        const double a = v[e], b = v[(e + 1) % 4];
        if ((a < 0.0) != (b < 0.0)) {
          const double t = a / (a - b);
          cross[e] = p[e] + t * (p[(e + 1) % 4] - p[e]);
          hit[e] = true;
          ++hits;
        }
      }
      if (hits == 0) continue;
      auto emit = [&](int e1, int e2) {
        const double len = (cross[e1] - cross[e2]).norm();
        if (len == 0.0) return;
        patch.points.push_back(newton_project(G, 0.5 * (cross[e1] + cross[e2]), level));
        patch.area_weights.push_back(len);
      };
      if (hits == 2) {
        std::array<int, 2> e{};
        int k = 0;
        for (int q = 0; q < 4; ++q)
          if (hit[q]) e[k++] = q;
        emit(e[0], e[1]);
      } else {
        const double center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        if ((center < 0.0) == (v[0] < 0.0)) {
          emit(0, 1);
          emit(2, 3);
        } else {
          emit(3, 0);
          emit(1, 2);
        }
      }
    }
  }
  return patch;
}

constexpr std::size_t kMarchingCellsPerResolution = 8;

}  // namespace

double SurfaceQuadrature::apply(const PointFunction& g) const {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += weights[i] * g(points[i]);
  return total;
}

double SurfaceQuadrature::total_weight() const {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

double surface_weight(const GaussianSpace& space, const LevelSetDomain& domain, const Vector& x) {
  const Vector grad = domain.G.gradient(x);
  const double norm = grad.norm();
  if (!(norm > 0.0)) {
    std::ostringstream msg;
    msg << "surface_weight: vanishing gradient of G at a surface point of " << domain.label;
    throw std::domain_error(msg.str());
  }
  return space.density(x) * h_gradient_norm(space, grad) / norm;
}

SurfaceQuadrature surface_quadrature(const GaussianSpace& space, const LevelSetDomain& domain, double level,
                                     std::size_t resolution) {
  if (resolution == 0) throw std::invalid_argument("surface_quadrature: resolution must be >= 1");
  SurfacePatch patch;
  if (domain.has_closed_form_surface()) {
    patch = domain.closed_form_surface(level, resolution);
  } else if (space.dim() == 2) {
    patch = marching_squares(space, domain.G, level, kMarchingCellsPerResolution * resolution);
  } else {
    std::ostringstream msg;
    msg << "surface_quadrature: no parametrization of " << domain.label << " in dimension " << space.dim()
        << "; use the coarea route";
    throw SurfaceRouteUnavailable(msg.str());
  }
  SurfaceQuadrature out;
  out.level = level;
  out.method = SurfaceMethod::parametrized;
  out.points = std::move(patch.points);
  out.weights.resize(out.points.size());
  for (std::size_t i = 0; i < out.points.size(); ++i)
    out.weights[i] = patch.area_weights[i] * surface_weight(space, domain, out.points[i]);
  return out;
}

SurfaceIntegral surface_integral(const GaussianSpace& space, const LevelSetDomain& domain, const PointFunction& g,
                                 double level, std::size_t resolution) {
  const double coarse = surface_quadrature(space, domain, level, resolution).apply(g);
  if (space.dim() == 1) return SurfaceIntegral{coarse, 0.0};
  const double fine = surface_quadrature(space, domain, level, 2 * resolution).apply(g);
  return SurfaceIntegral{fine, std::abs(fine - coarse)};
}

SurfaceIntegral surface_integral(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                 double level, std::size_t resolution) {
  return surface_integral(space, domain, PointFunction(phi.value), level, resolution);
}

SurfaceQuadrature band_quadrature(const GaussianSpace& space, const LevelSetDomain& domain, const SampleSet& samples,
                                  double level, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("band_quadrature: eps must be > 0");
  SurfaceQuadrature out;
  out.level = level;
  out.method = SurfaceMethod::mc_band;
  const double scale = 1.0 / (2.0 * eps * static_cast<double>(samples.size()));
  for (Eigen::Index i = 0; i < samples.points().cols(); ++i) {
    const Vector x = samples.points().col(i);
    if (std::abs(domain.G.value(x) - level) >= eps) continue;
    out.points.push_back(x);
    out.weights.push_back(scale * h_gradient_norm(space, domain.G.gradient(x)));
  }
  return out;
}

std::vector<double> band_grid(double delta, std::size_t points) {
  if (!(delta > 0.0)) throw std::invalid_argument("band_grid: delta must be > 0");
  if (points < 3) throw std::invalid_argument("band_grid: need at least 3 points");
  std::vector<double> grid(points);
  const double step = 2.0 * delta / static_cast<double>(points + 1);
  for (std::size_t j = 0; j < points; ++j) grid[j] = -delta + step * static_cast<double>(j + 1);
  return grid;
}

double silverman_bandwidth(const LevelSetDomain& domain, const SampleSet& samples) {
  double mean = 0.0, m2 = 0.0;
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = domain.G.value(samples.points().col(static_cast<Eigen::Index>(i)));
    const double d = g - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (g - mean);
  }
  const double sd = std::sqrt(m2 / static_cast<double>(n - 1));
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

namespace {

struct BandValues {
  std::vector<double> g;
  std::vector<double> phi;
  std::vector<Eigen::Index> index;  ///< column in the sample set
};

// Samples whose kernel reaches the grid, with G and phi evaluated once.
BandValues collect_band(const LevelSetDomain& domain, const ScalarField& phi, const SampleSet& samples, double lo,
                        double hi) {
  BandValues band;
  for (Eigen::Index i = 0; i < samples.points().cols(); ++i) {
    const Vector x = samples.points().col(i);
    const double g = domain.G.value(x);
    if (g < lo || g > hi) continue;
    band.g.push_back(g);
    band.phi.push_back(phi.value(x));
    band.index.push_back(i);
  }
  return band;
}

void validate_kde(const SampleSet& samples, const std::vector<double>& grid, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("qphi_estimate: bandwidth must be > 0");
  if (samples.size() < kMinKdeSamples) {
    std::ostringstream msg;
    msg << "qphi_estimate: needs at least " << kMinKdeSamples << " samples, got " << samples.size();
    throw std::invalid_argument(msg.str());
  }
  if (grid.size() < 3 || !std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw std::invalid_argument("qphi_estimate: grid must be strictly increasing with >= 3 points");
}

constexpr double kKernelReach = 9.0;

double standard_error(double sum, double sum_sq, double n) {
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1.0));
  return std::sqrt(var / n);
}

}  // namespace

DensityCurve qphi_estimate(const LevelSetDomain& domain, const ScalarField& phi, const SampleSet& samples,
                           const std::vector<double>& grid, double bandwidth) {
  validate_kde(samples, grid, bandwidth);
  const double reach = kKernelReach * bandwidth;
  const BandValues band = collect_band(domain, phi, samples, grid.front() - reach, grid.back() + reach);
  const std::size_t m = grid.size();
  std::vector<double> plus(m, 0.0), minus(m, 0.0), sq(m, 0.0);
  for (std::size_t i = 0; i < band.g.size(); ++i) {
    const double f = band.phi[i];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const double u = grid[j] - band.g[i];
      if (std::abs(u) > reach) continue;
      const double k = gaussian_kernel(u, bandwidth);
      (f > 0.0 ? plus[j] : minus[j]) += std::abs(f) * k;
      sq[j] += f * f * k * k;
    }
  }
  const double n = static_cast<double>(samples.size());
  DensityCurve curve;
  curve.grid = grid;
  curve.phi_label = phi.label;
  curve.values.resize(m);
  curve.std_errors.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    curve.values[j] = plus[j] / n - minus[j] / n;
    curve.std_errors[j] = standard_error(plus[j] - minus[j], sq[j], n);
  }
  return curve;
}

DensityCurve qphi_estimate(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                           const SamplerState& state, std::size_t count, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("qphi_estimate: bandwidth must be > 0");
  const SampleSet samples(space, state, count);
  return qphi_estimate(domain, phi, samples, band_grid(domain.band_delta, 41), bandwidth);
}

double phi1_value(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi, const Vector& x) {
  const Vector grad = domain.G.gradient(x);
  const Vector& lambda = space.eigenvalues();
  const Vector lg = lambda.cwiseProduct(grad);  // Q DG: D_H G pushed back once more
  const double norm2 = grad.dot(lg);
  if (!(std::sqrt(norm2) >= kMinHGradient)) {
    std::ostringstream msg;
    msg << "phi1: |D_H G| below " << kMinHGradient << " for " << domain.label;
    throw std::domain_error(msg.str());
  }
  const Matrix hess = domain.G.hessian(x);
  const double LG = lambda.dot(hess.diagonal()) - x.dot(grad);
  const double curvature = lg.dot(hess * lg);  // <D^2_H G D_H G, D_H G>
  const double inner = lg.dot(phi.gradient(x));  // <D_H G, D_H phi>
  return (LG / norm2 - 2.0 * curvature / (norm2 * norm2)) * phi.value(x) + inner / norm2;
}

ScalarField phi1_field(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi) {
  if (!domain.G.has_hessian()) throw std::invalid_argument("phi1_field: G needs a Hessian");
  ScalarField out;
  out.value = [space, domain, phi](const Vector& x) { return phi1_value(space, domain, phi, x); };
  const auto value = out.value;
  out.gradient = [value](const Vector& x) { return fd_gradient(value, x); };
  const auto gradient = out.gradient;
  out.hessian = [gradient](const Vector& x) { return fd_jacobian(gradient, x); };
  out.derivatives = DerivativeSource::finite_difference;
  out.label = "phi1[" + phi.label + "]";
  return out;
}

QphiDerivativeReport qphi_derivative_check(const GaussianSpace& space, const LevelSetDomain& domain,
                                           const ScalarField& phi, const SampleSet& samples,
                                           const std::vector<double>& grid, double bandwidth) {
  validate_kde(samples, grid, bandwidth);
  const ScalarField phi1 = phi1_field(space, domain, phi);
  QphiDerivativeReport report;
  report.phi_curve = qphi_estimate(domain, phi, samples, grid, bandwidth);
  report.phi1_curve = qphi_estimate(domain, phi1, samples, grid, bandwidth);

  const double reach = kKernelReach * bandwidth;
  const BandValues band = collect_band(domain, phi, samples, grid.front() - reach, grid.back() + reach);
  const std::size_t m = grid.size();
  std::vector<double> sum(m, 0.0), sq(m, 0.0);
  std::vector<double> trap(m, 0.0);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double w = 0.5 * (grid[j + 1] - grid[j]);
    trap[j] += w;
    trap[j + 1] += w;
  }
  double ft_sum = 0.0, ft_sq = 0.0;
  for (std::size_t i = 0; i < band.g.size(); ++i) {
    const Vector x = samples.points().col(band.index[i]);
    const double f = band.phi[i];
    const double f1 = phi1_value(space, domain, phi, x);
    std::vector<double> k(m);
    for (std::size_t j = 0; j < m; ++j) k[j] = gaussian_kernel(grid[j] - band.g[i], bandwidth);
    for (std::size_t j = 1; j + 1 < m; ++j) {
      const double t = f * (k[j + 1] - k[j - 1]) / (grid[j + 1] - grid[j - 1]) - f1 * k[j];
      sum[j] += t;
      sq[j] += t * t;
    }
    double u = -f * (k[m - 1] - k[0]);
    for (std::size_t j = 0; j < m; ++j) u += trap[j] * f1 * k[j];
    ft_sum += u;
    ft_sq += u * u;
  }
  const double n = static_cast<double>(samples.size());
  for (std::size_t j = 1; j + 1 < m; ++j) {
    DerivativeCheckRow row;
    row.xi = grid[j];
    row.fd_derivative =
        (report.phi_curve.values[j + 1] - report.phi_curve.values[j - 1]) / (grid[j + 1] - grid[j - 1]);
    row.phi1_value = report.phi1_curve.values[j];
    row.std_error = standard_error(sum[j], sq[j], n);
    const double diff = std::abs(row.fd_derivative - row.phi1_value);
    report.max_abs_difference = std::max(report.max_abs_difference, diff);
    if (row.std_error > 0.0) report.max_standardized = std::max(report.max_standardized, diff / row.std_error);
    report.rows.push_back(row);
  }
  for (std::size_t j = 0; j < m; ++j) report.fundamental_lhs += trap[j] * report.phi1_curve.values[j];
  report.fundamental_rhs = report.phi_curve.values[m - 1] - report.phi_curve.values[0];
  report.fundamental_error = standard_error(ft_sum, ft_sq, n);
  return report;
}

Estimate rho_total_via_identity(const GaussianSpace& space, const LevelSetDomain& domain, const SampleSet& samples) {
  if (!domain.G.has_hessian()) throw std::invalid_argument("rho_total_via_identity: G needs a Hessian");
  return integrate(samples, 1, [&](const Vector& x, std::span<double> out) {
    if (domain.contains(x)) out[0] = unit_normal_divergence(space, domain.G, x);
  })[0];
}

Estimate rho_total_via_identity(const GaussianSpace& space, const LevelSetDomain& domain, const SamplerState& state,
                                std::size_t count, unsigned workers) {
  const SampleSet samples(space, state, count, workers);
  return rho_total_via_identity(space, domain, samples);
}

double trapezoid_abs(const DensityCurve& curve) {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < curve.grid.size(); ++j)
    total += 0.5 * (curve.grid[j + 1] - curve.grid[j]) * (std::abs(curve.values[j]) + std::abs(curve.values[j + 1]));
  return total;
}

Estimate band_abs_mass(const LevelSetDomain& domain, const ScalarField& phi, const SampleSet& samples) {
  return integrate(samples, 1, [&](const Vector& x, std::span<double> out) {
    out[0] = domain.in_band(x) ? std::abs(phi.value(x)) : 0.0;
  })[0];
}

}  // namespace gausstrace
