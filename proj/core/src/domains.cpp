#include "gausstrace/domains.hpp"

#include "gausstrace/gauss_core.hpp"
#include "gausstrace/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gausstrace {

const char* to_string(DomainKind kind) noexcept {
  switch (kind) {
    case DomainKind::halfspace: return "halfspace";
    case DomainKind::graph_region: return "graph_region";
    case DomainKind::ball: return "ball";
    case DomainKind::ellipsoid: return "ellipsoid";
    case DomainKind::custom: return "custom";
  }
  return "unknown";
}

namespace {

// Points x = x0 + B s on an affine hyperplane {a.x = c}, with s distributed
// by Gauss-Hermite nodes of the Gaussian that mu induces on the plane. The
// area weight is w_i / p(s_i), so the Gaussian factor cancels against the
// density applied later and polynomial integrands are integrated exactly.
SurfacePatch hyperplane_patch(const GaussianSpace& space, const Vector& a, double c, std::size_t order) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  const double a2 = a.squaredNorm();
  const Vector x0 = (c / a2) * a;
  SurfacePatch patch;
  if (n == 1) {
    patch.points.push_back(x0);
    patch.area_weights.push_back(1.0);
    return patch;
  }
  // Orthonormal basis of a^perp: trailing columns of the Householder Q of a.
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix B = full.rightCols(n - 1);
  const Vector inv_lambda = space.eigenvalues().cwiseInverse();
  const Matrix M = B.transpose() * inv_lambda.asDiagonal() * B;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  const Vector mean = -M.ldlt().solve(B.transpose() * inv_lambda.asDiagonal() * x0);
  // s = mean + U diag(1/sqrt(m)) z with z standard normal.
  const Matrix U = eig.eigenvectors();
  const Vector scale = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  const double log_det_cov = -eig.eigenvalues().array().log().sum();
  const QuadratureRule& rule = gauss_hermite(order);
  const std::size_t m = static_cast<std::size_t>(n - 1);
  std::vector<std::size_t> idx(m, 0);
  Vector z(static_cast<Eigen::Index>(m));
  const double log_norm = 0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi) + 0.5 * log_det_cov;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      z(static_cast<Eigen::Index>(k)) = rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    const Vector s = mean + U * scale.cwiseProduct(z);
    const double log_pdf = -0.5 * z.squaredNorm() - log_norm;
    patch.points.push_back(x0 + B * s);
    patch.area_weights.push_back(w * std::exp(-log_pdf));
    std::size_t k = 0;
    while (k < m && ++idx[k] == order) idx[k++] = 0;
    if (k == m) break;
  }
  return patch;
}

// Image of the unit sphere under x = center + diag(radii) u. Euclidean area
// element dS_x = |det A| |A^{-1} u| dS_u for diagonal A.
SurfacePatch ellipse_patch(const Vector& center, const Vector& radii, std::size_t resolution) {
  const auto n = center.size();
  SurfacePatch patch;
  const double det = radii.prod();
  auto push = [&](const Vector& u, double w) {
    patch.points.push_back(center + radii.cwiseProduct(u));
    patch.area_weights.push_back(w * det * u.cwiseQuotient(radii).norm());
  };
  if (n == 1) {
    push(Vector::Constant(1, 1.0), 1.0);
    push(Vector::Constant(1, -1.0), 1.0);
  } else if (n == 2) {
    const double h = 2.0 * std::numbers::pi / static_cast<double>(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
      const double th = h * static_cast<double>(i);
      push(Vector{{std::cos(th), std::sin(th)}}, h);
    }
  } else if (n == 3) {
    // Gauss-Legendre in z = cos(theta), trapezoid in the azimuth.
    const QuadratureRule& gl = gauss_legendre(resolution);
    const std::size_t azimuths = 2 * resolution;
    const double h = 2.0 * std::numbers::pi / static_cast<double>(azimuths);
    for (std::size_t i = 0; i < resolution; ++i) {
      const double zc = gl.nodes[i];
      const double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      for (std::size_t j = 0; j < azimuths; ++j) {
        const double ph = h * static_cast<double>(j);
        push(Vector{{rho * std::cos(ph), rho * std::sin(ph), zc}}, gl.weights[i] * h);
      }
    }
  } else {
    throw std::invalid_argument("closed-form sphere parametrization is available for n <= 3 only");
  }
  return patch;
}

std::size_t checked_resolution(std::size_t resolution) {
  if (resolution == 0) throw std::invalid_argument("surface resolution must be >= 1");
  return resolution;
}

// Tensor surface rules keep at most this many nodes; in high dimension the
// per-axis order drops and the m/2m rules may coincide.
constexpr double kSurfaceNodeBudget = 250'000.0;

std::size_t tensor_order(std::size_t resolution, std::size_t axes) {
  if (axes == 0) return resolution;
  const auto cap = static_cast<std::size_t>(std::floor(std::pow(kSurfaceNodeBudget, 1.0 / static_cast<double>(axes)) + 1e-9));
  return std::max<std::size_t>(1, std::min(resolution, cap));
}

}  // namespace

Vector drop_coordinate(const Vector& x, std::size_t index) {
  const auto n = x.size();
  const auto i = static_cast<Eigen::Index>(index);
  if (i >= n) throw std::out_of_range("drop_coordinate: index out of range");
  Vector y(n - 1);
  y.head(i) = x.head(i);
  y.tail(n - 1 - i) = x.tail(n - 1 - i);
  return y;
}

Vector insert_coordinate(const Vector& y, std::size_t index, double value) {
  const auto m = y.size();
  const auto i = static_cast<Eigen::Index>(index);
  if (i > m) throw std::out_of_range("insert_coordinate: index out of range");
  Vector x(m + 1);
  x.head(i) = y.head(i);
  x(i) = value;
  x.tail(m - i) = y.tail(m - i);
  return x;
}

LevelSetDomain make_halfspace(const GaussianSpace& space, const Vector& hhat) {
  if (static_cast<std::size_t>(hhat.size()) != space.dim())
    throw std::invalid_argument("make_halfspace: hhat has the wrong dimension");
  const double norm = hhat.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::invalid_argument("make_halfspace: hhat must be a nonzero vector");
  const Vector c = hhat / norm;
  // h^(x) = sum_k c_k x_k / sqrt(lambda_k); G = -h^.
  const Vector a = -c.cwiseQuotient(space.sqrt_eigenvalues());
  LevelSetDomain d;
  d.G = fields::linear(a);
  d.G.label = "-hhat";
  d.kind = DomainKind::halfspace;
  d.band_delta = 0.5;
  d.metadata = HalfspaceParams{c};
  d.closed_form_surface = [space, a](double level, std::size_t resolution) {
    return hyperplane_patch(space, a, level, tensor_order(checked_resolution(resolution), space.dim() - 1));
  };
  std::ostringstream label;
  label << "halfspace(n=" << space.dim() << ")";
  d.label = label.str();
  return d;
}

LevelSetDomain make_ball(const GaussianSpace& space, double radius) {
  return make_ball(space, radius, Vector::Zero(static_cast<Eigen::Index>(space.dim())));
}

LevelSetDomain make_ball(const GaussianSpace& space, double radius, const Vector& center) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("make_ball: radius must be > 0");
  if (static_cast<std::size_t>(center.size()) != space.dim())
    throw std::invalid_argument("make_ball: center has the wrong dimension");
  const auto n = static_cast<Eigen::Index>(space.dim());
  LevelSetDomain d;
  const double r2 = radius * radius;
  d.G.value = [center, r2](const Vector& x) { return (x - center).squaredNorm() - r2; };
  d.G.gradient = [center](const Vector& x) -> Vector { return 2.0 * (x - center); };
  d.G.hessian = [n](const Vector&) -> Matrix { return 2.0 * Matrix::Identity(n, n); };
  d.G.label = "|x-c|^2-r^2";
  d.kind = DomainKind::ball;
  d.band_delta = 0.5 * r2;
  d.metadata = BallParams{radius, center};
  if (space.dim() <= 3) {
    d.closed_form_surface = [center, r2, n](double level, std::size_t resolution) {
      if (r2 + level <= 0.0) return SurfacePatch{};
      return ellipse_patch(center, Vector::Constant(n, std::sqrt(r2 + level)), checked_resolution(resolution));
    };
  }
  std::ostringstream label;
  label << "ball(n=" << space.dim() << ",r=" << radius << ")";
  d.label = label.str();
  return d;
}

LevelSetDomain make_ellipsoid(const GaussianSpace& space, const EllipsoidSpec& spec) {
  if (static_cast<std::size_t>(spec.alphas.size()) != space.dim())
    throw std::invalid_argument("make_ellipsoid: alphas have the wrong dimension");
  if ((spec.alphas.array() < 0.0).any()) throw std::invalid_argument("make_ellipsoid: alphas must be nonnegative");
  if (!((spec.alphas.array() > 0.0).any())) throw std::invalid_argument("make_ellipsoid: alphas are all zero");
  if (!(spec.radius > 0.0)) throw std::invalid_argument("make_ellipsoid: radius must be > 0");
  const Vector alpha = spec.alphas;
  const double r2 = spec.radius * spec.radius;
  LevelSetDomain d;
  d.G = fields::diagonal_quadratic(alpha, -r2);
  d.G.label = "sum a_k x_k^2-r^2";
  d.kind = DomainKind::ellipsoid;
  d.band_delta = 0.5 * r2;
  d.metadata = spec;
  const bool bounded = (alpha.array() > 0.0).all();
  if (bounded && space.dim() <= 3) {
    d.closed_form_surface = [alpha, r2](double level, std::size_t resolution) {
      if (r2 + level <= 0.0) return SurfacePatch{};
      const Vector radii = (std::sqrt(r2 + level) * alpha.cwiseSqrt().cwiseInverse()).eval();
      return ellipse_patch(Vector::Zero(alpha.size()), radii, checked_resolution(resolution));
    };
  }
  std::ostringstream label;
  label << "ellipsoid(n=" << space.dim() << ",r=" << spec.radius << ")";
  d.label = label.str();
  return d;
}

LevelSetDomain make_graph_region(const GaussianSpace& space, std::size_t h_index, const ScalarField& F) {
  if (space.dim() < 2) throw std::invalid_argument("make_graph_region: needs dimension >= 2");
  if (h_index >= space.dim()) {
    std::ostringstream msg;
    msg << "make_graph_region: axis index " << h_index << " out of range for dimension " << space.dim();
    throw std::out_of_range(msg.str());
  }
  if (!F.value || !F.gradient) throw std::invalid_argument("make_graph_region: F needs a value and a gradient");
  const double s = space.sqrt_eigenvalues()(static_cast<Eigen::Index>(h_index));
  const auto n = static_cast<Eigen::Index>(space.dim());
  const auto h = static_cast<Eigen::Index>(h_index);
  LevelSetDomain d;
  d.G.value = [=](const Vector& x) { return x(h) / s - F.value(drop_coordinate(x, h_index)); };
  d.G.gradient = [=](const Vector& x) -> Vector {
    const Vector gy = F.gradient(drop_coordinate(x, h_index));
    return insert_coordinate(-gy, h_index, 1.0 / s);
  };
  if (F.has_hessian()) {
    d.G.hessian = [=](const Vector& x) -> Matrix {
      const Matrix hy = F.hessian(drop_coordinate(x, h_index));
      Matrix out = Matrix::Zero(n, n);
      for (Eigen::Index i = 0, ii = 0; i < n; ++i) {
        if (i == h) continue;
        for (Eigen::Index j = 0, jj = 0; j < n; ++j) {
          if (j == h) continue;
          out(i, j) = -hy(ii, jj);
          ++jj;
        }
        ++ii;
      }
      return out;
    };
  }
  d.G.derivatives = F.derivatives;
  d.G.label = "hhat-F(y)";
  d.kind = DomainKind::graph_region;
  d.band_delta = 0.5;
  d.metadata = GraphParams{h_index, F};
  // Surface {x_h = s (F(y) + xi)} over Gauss-Hermite nodes of mu_Y; the area
  // element is sqrt(1 + lambda_h |grad F|^2) dy.
  const GaussianSpace Y = space.drop_axis(h_index);
  d.closed_form_surface = [=](double level, std::size_t resolution) {
    SurfacePatch patch;
    checked_resolution(resolution);
    if (Y.dim() > kTensorMaxDim) throw QuadratureBudgetExceeded("graph surface quadrature: Y dimension too large");
    for_each_tensor_node(Y, tensor_order(resolution, Y.dim()), [&](const Vector& y, double w) {
      const double t = s * (F.value(y) + level);
      const double area = std::sqrt(1.0 + s * s * F.gradient(y).squaredNorm());
      patch.points.push_back(insert_coordinate(y, h_index, t));
      patch.area_weights.push_back(w / Y.density(y) * area);
    });
    return patch;
  };
  std::ostringstream label;
  label << "graph(n=" << space.dim() << ",axis=" << h_index << "," << F.label << ")";
  d.label = label.str();
  return d;
}

LevelSetDomain make_custom(const ScalarField& G, double band_delta, std::string label) {
  if (!G.value || !G.gradient) throw std::invalid_argument("make_custom: G needs a value and a gradient");
  if (!(band_delta > 0.0)) throw std::invalid_argument("make_custom: band_delta must be > 0");
  LevelSetDomain d;
  d.G = G;
  d.kind = DomainKind::custom;
  d.band_delta = band_delta;
  d.label = std::move(label);
  return d;
}

DomainSamples sample_domain(const LevelSetDomain& domain, const GaussianSpace& space, const SamplerState& state,
                            std::size_t count, std::size_t proposal_cap) {
  if (count == 0) throw std::invalid_argument("sample_domain: count must be >= 1");
  const auto n = static_cast<Eigen::Index>(space.dim());
  const Vector& scale = space.sqrt_eigenvalues();
  DomainSamples out;
  out.points.resize(n, static_cast<Eigen::Index>(count));
  std::size_t accepted = 0;
  std::size_t proposals = 0;
  constexpr std::size_t kPilot = 100'000;
  Vector x(n);
  while (accepted < count) {
    if (proposals >= proposal_cap) {
      std::ostringstream msg;
      msg << "sample_domain(" << domain.label << "): acceptance starvation, " << accepted << " of " << count
          << " samples after " << proposals << " proposals";
      throw AcceptanceStarvation(msg.str());
    }
    if (proposals == kPilot && static_cast<double>(accepted) < kMinAcceptanceRate * static_cast<double>(kPilot)) {
      std::ostringstream msg;
      msg << "sample_domain(" << domain.label << "): acceptance rate " << static_cast<double>(accepted) / kPilot
          << " below " << kMinAcceptanceRate << " after a pilot of " << kPilot << " proposals";
      throw AcceptanceStarvation(msg.str());
    }
    CounterRng rng(state, proposals);
    for (Eigen::Index k = 0; k < n; ++k) x(k) = scale(k) * rng.normal();
    ++proposals;
    if (domain.contains(x)) out.points.col(static_cast<Eigen::Index>(accepted++)) = x;
  }
  out.proposals = proposals;
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposals);
  return out;
}

double MassIdentity::combined_error() const { return std::hypot(lhs.std_error, rhs.std_error); }

bool MassIdentity::agrees(double sigmas) const {
  return std::abs(lhs.mean - rhs.mean) <= sigmas * combined_error() + 1e-15;
}

MassIdentity ellipsoid_mass_identity(const GaussianSpace& space, const EllipsoidSpec& spec, const SamplerState& state,
                                     std::size_t count, unsigned workers) {
  if (static_cast<std::size_t>(spec.alphas.size()) != space.dim())
    throw std::invalid_argument("ellipsoid_mass_identity: alphas have the wrong dimension");
  if (!((spec.alphas.array() > 0.0).all()))
    throw std::invalid_argument("ellipsoid_mass_identity: every alpha must be > 0");
  const LevelSetDomain ellipsoid = make_ellipsoid(space, spec);
  const GaussianSpace rescaled = GaussianSpace::diagonal(space.eigenvalues().cwiseProduct(spec.alphas));
  const double r2 = spec.radius * spec.radius;
  MassIdentity out;
  const SampleSet lhs_samples(space, state.substream(0), count, workers);
  out.lhs = integrate(lhs_samples, 1, [&](const Vector& x, std::span<double> v) {
    v[0] = ellipsoid.contains(x) ? 1.0 : 0.0;
  })[0];
  const SampleSet rhs_samples(rescaled, state.substream(1), count, workers);
  out.rhs = integrate(rhs_samples, 1, [&](const Vector& x, std::span<double> v) {
    v[0] = x.squaredNorm() < r2 ? 1.0 : 0.0;
  })[0];
  return out;
}

double trace_weighted_alpha_sum(const GaussianSpace& space, const EllipsoidSpec& spec) {
  if (static_cast<std::size_t>(spec.alphas.size()) != space.dim())
    throw std::invalid_argument("trace_weighted_alpha_sum: alphas have the wrong dimension");
  return space.eigenvalues().dot(spec.alphas);
}

GaussianSpace dirichlet_laplacian_space(DirichletCovariance covariance, std::size_t n) {
  if (n == 0) throw std::invalid_argument("dirichlet_laplacian_space: n must be >= 1");
  Vector lambda(static_cast<Eigen::Index>(n));
  const double pi = std::numbers::pi;
  for (std::size_t k = 1; k <= n; ++k) {
    const double pk2 = pi * pi * static_cast<double>(k * k);
    lambda(static_cast<Eigen::Index>(k - 1)) =
        covariance == DirichletCovariance::half_inverse ? 1.0 / (2.0 * pk2) : 1.0 / (2.0 * pk2 * pk2);
  }
  return GaussianSpace::diagonal(lambda);
}

EllipsoidSpec dirichlet_ball_spec(std::size_t n, double beta, double radius) {
  if (n == 0) throw std::invalid_argument("dirichlet_ball_spec: n must be >= 1");
  EllipsoidSpec spec;
  spec.alphas.resize(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k)
    spec.alphas(static_cast<Eigen::Index>(k - 1)) = std::pow(std::numbers::pi * static_cast<double>(k), 4.0 * beta);
  spec.radius = radius;
  return spec;
}

bool NondegeneracyReport::ok() const {
  auto stable = [](double half, double full) {
    if (full == 0.0 && half == 0.0) return true;
    const double ratio = full / half;
    return std::isfinite(ratio) && ratio >= 0.5 && ratio <= 2.0;
  };
  return hit_rate > 0.0 && min_h_gradient > 0.0 && stable(mean_inverse_q2_half, mean_inverse_q2_full) &&
         stable(mean_inverse_q4_half, mean_inverse_q4_full);
}

NondegeneracyReport check_nondegeneracy(const LevelSetDomain& domain, const GaussianSpace& space,
                                        const SamplerState& state, std::size_t count, unsigned workers) {
  if (count < 2) throw std::invalid_argument("check_nondegeneracy: count must be >= 2");
  const Matrix points = sample_gaussian(space, state, count, workers);
  NondegeneracyReport report;
  report.min_h_gradient = std::numeric_limits<double>::infinity();
  const std::size_t half = count / 2;
  std::size_t inside = 0;
  std::size_t band = 0;
  double q2 = 0.0, q4 = 0.0, q2_half = 0.0, q4_half = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const Vector x = points.col(static_cast<Eigen::Index>(i));
    const double g = domain.G.value(x);
    if (g < 0.0) ++inside;
    if (std::abs(g) >= domain.band_delta) continue;
    const double dh = h_gradient_norm(space, domain.G.gradient(x));
    report.min_h_gradient = std::min(report.min_h_gradient, dh);
    const double inv2 = 1.0 / (dh * dh);
    ++band;
    q2 += inv2;
    q4 += inv2 * inv2;
    if (i < half) {
      q2_half += inv2;
      q4_half += inv2 * inv2;
    }
  }
  // Averages against mu, restricted to the band (indicator included).
  report.hit_rate = static_cast<double>(inside) / static_cast<double>(count);
  report.band_fraction = static_cast<double>(band) / static_cast<double>(count);
  if (band == 0) report.min_h_gradient = 0.0;
  report.mean_inverse_q2_full = q2 / static_cast<double>(count);
  report.mean_inverse_q4_full = q4 / static_cast<double>(count);
  report.mean_inverse_q2_half = q2_half / static_cast<double>(half);
  report.mean_inverse_q4_half = q4_half / static_cast<double>(half);
  return report;
}

}  // namespace gausstrace
