#include "gausstrace/trace_identities.hpp"

#include "gausstrace/gauss_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gausstrace {

const char* to_string(IdentityId id) noexcept {
  switch (id) {
    case IdentityId::parti: return "parti";
    case IdentityId::partitraccia: return "partitraccia";
    case IdentityId::partitraccia2: return "partitraccia2";
    case IdentityId::campi: return "campi";
    case IdentityId::particlassica: return "particlassica";
    case IdentityId::partial_h: return "partial_h";
    case IdentityId::partisemispazio: return "partisemispazio";
    case IdentityId::tracciasemispazio: return "tracciasemispazio";
    case IdentityId::sfera: return "sfera";
  }
  return "unknown";
}

double IdentityReport::combined_error() const { return std::hypot(lhs_err, rhs_err); }

double IdentityReport::tolerance() const {
  const double floor = 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs));
  return kPassSigmas * combined_error() + floor;
}

bool IdentityReport::consistent() const {
  return lhs_err >= 0.0 && rhs_err >= 0.0 && diff_err >= 0.0 && pass == (std::abs(lhs - rhs) <= tolerance());
}

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double signed_power(double v, double q) { return v == 0.0 ? 0.0 : std::pow(std::abs(v), q - 2.0) * v; }

std::string index_label(const char* name, std::size_t k) { return std::string(name) + "=" + std::to_string(k + 1); }

std::string number_label(const char* name, double v) {
  std::ostringstream out;
  out << name << "=" << v;
  return out.str();
}

void require_index(const GaussianSpace& space, std::size_t k, const char* where) {
  if (k >= space.dim()) {
    std::ostringstream msg;
    msg << where << ": index " << k << " out of range for dimension " << space.dim();
    throw std::out_of_range(msg.str());
  }
}

void require_hessian(const LevelSetDomain& domain, const char* where) {
  if (!domain.G.has_hessian()) throw std::invalid_argument(std::string(where) + ": G needs a Hessian");
}

void require_exponent(double q, const char* where) {
  if (!(q >= 1.0)) throw std::invalid_argument(std::string(where) + ": exponent must be >= 1");
}

const HalfspaceParams& halfspace_params(const LevelSetDomain& domain, const char* where) {
  const auto* params = std::get_if<HalfspaceParams>(&domain.metadata);
  if (domain.kind != DomainKind::halfspace || params == nullptr)
    throw std::invalid_argument(std::string(where) + ": domain is not a halfspace");
  return *params;
}

const BallParams& centered_ball(const LevelSetDomain& domain, const char* where) {
  const auto* params = std::get_if<BallParams>(&domain.metadata);
  if (domain.kind != DomainKind::ball || params == nullptr)
    throw std::invalid_argument(std::string(where) + ": domain is not a ball");
  if (params->center.size() > 0 && params->center.norm() != 0.0)
    throw std::invalid_argument(std::string(where) + ": ball must be centered at the origin");
  return *params;
}

}  // namespace

SurfaceIntegral surface_or_coarea(const GaussianSpace& space, const LevelSetDomain& domain, const PointFunction& g,
                                  const SampleSet& samples, const SurfaceRoute& route) {
  try {
    return surface_integral(space, domain, g, 0.0, route.resolution);
  } catch (const SurfaceRouteUnavailable&) {
    // rho-integral of g = q_psi(0) with psi = g |D_H G| (coarea).
    ScalarField psi;
    psi.value = [&](const Vector& x) { return g(x) * h_gradient_norm(space, domain.G.gradient(x)); };
    psi.label = "coarea";
    const double b = route.kde_bandwidth_scale * silverman_bandwidth(domain, samples);
    const DensityCurve fine = qphi_estimate(domain, psi, samples, {-b, 0.0, b}, b);
    const DensityCurve coarse = qphi_estimate(domain, psi, samples, {-b, 0.0, b}, 2.0 * b);
    const double bias = std::abs(coarse.values[1] - fine.values[1]) / 3.0;
    return SurfaceIntegral{fine.values[1], fine.std_errors[1] + bias};
  }
}

std::vector<IdentityReport> evaluate_identities(const GaussianSpace& space, const LevelSetDomain& domain,
                                                const SampleSet& samples, const std::vector<IdentityTerms>& batch,
                                                const SurfaceRoute& route) {
  const std::size_t m = batch.size();
  const std::vector<Estimate> mc = integrate(samples, 3 * m, [&](const Vector& x, std::span<double> out) {
    const bool inside = domain.contains(x);
    for (std::size_t i = 0; i < m; ++i) {
      const IdentityTerms& t = batch[i];
      double l = 0.0, r = 0.0;
      if (inside) {
        if (t.lhs_bulk) l += t.lhs_bulk(x);
        if (t.rhs_bulk) r += t.rhs_bulk(x);
      }
      if (t.lhs_global) l += t.lhs_global(x);
      if (t.rhs_global) r += t.rhs_global(x);
      out[3 * i] = l;
      out[3 * i + 1] = r;
      out[3 * i + 2] = l - r;
    }
  });

  // Quadratures at resolutions m and 2m are shared by every surface term.
  std::optional<SurfaceQuadrature> coarse, fine;
  try {
    coarse = surface_quadrature(space, domain, 0.0, route.resolution);
    if (space.dim() > 1) fine = surface_quadrature(space, domain, 0.0, 2 * route.resolution);
  } catch (const SurfaceRouteUnavailable&) {
    coarse.reset();
  }
  auto surface = [&](const PointFunction& g) -> SurfaceIntegral {
    if (!g) return {};
    if (!coarse) return surface_or_coarea(space, domain, g, samples, route);
    const double a = coarse->apply(g);
    if (!fine) return {a, 0.0};
    const double b = fine->apply(g);
    return {b, std::abs(b - a)};
  };

  std::vector<IdentityReport> reports;
  reports.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const IdentityTerms& t = batch[i];
    const SurfaceIntegral sl = surface(t.lhs_surface);
    const SurfaceIntegral sr = surface(t.rhs_surface);
    IdentityReport rep;
    rep.id = t.id;
    rep.lhs = mc[3 * i].mean + sl.value;
    rep.rhs = mc[3 * i + 1].mean + sr.value;
    rep.lhs_err = std::hypot(mc[3 * i].std_error, sl.error_estimate);
    rep.rhs_err = std::hypot(mc[3 * i + 1].std_error, sr.error_estimate);
    rep.diff_err = std::sqrt(mc[3 * i + 2].std_error * mc[3 * i + 2].std_error +
                             sl.error_estimate * sl.error_estimate + sr.error_estimate * sr.error_estimate);
    rep.pass = std::abs(rep.lhs - rep.rhs) <= rep.tolerance();
    rep.domain = domain.label;
    rep.phi = t.phi;
    rep.psi = t.psi;
    rep.index = t.index;
    rep.note = t.note;
    reports.push_back(std::move(rep));
  }
  return reports;
}

IdentityTerms parti_terms(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                          std::size_t k) {
  require_index(space, k, "parti");
  const auto kk = static_cast<Eigen::Index>(k);
  const double s = space.sqrt_eigenvalues()(kk);
  const ScalarField G = domain.G;
  IdentityTerms t;
  t.id = IdentityId::parti;
  t.phi = phi.label;
  t.index = index_label("k", k);
  t.lhs_bulk = [phi, s, kk](const Vector& x) { return s * phi.gradient(x)(kk); };
  t.rhs_bulk = [phi, s, kk](const Vector& x) { return x(kk) / s * phi.value(x); };
  t.rhs_surface = [phi, G, space, s, kk](const Vector& x) {
    const Vector g = G.gradient(x);
    return phi.value(x) * s * g(kk) / h_gradient_norm(space, g);
  };
  return t;
}

IdentityTerms power_terms(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi, double q,
                          PowerVariant variant) {
  require_exponent(q, "power identity");
  const ScalarField G = domain.G;
  const Vector lambda = space.eigenvalues();
  IdentityTerms t;
  t.phi = phi.label;
  t.index = number_label("q", q);
  if (variant == PowerVariant::partitraccia) {
    require_hessian(domain, "partitraccia");
    t.id = IdentityId::partitraccia;
    t.lhs_surface = [phi, G, space, q](const Vector& x) {
      return std::pow(std::abs(phi.value(x)), q) * h_gradient_norm(space, G.gradient(x));
    };
    t.rhs_bulk = [phi, G, lambda, q](const Vector& x) {
      const Vector g = G.gradient(x);
      const double v = phi.value(x);
      const double inner = lambda.cwiseProduct(g).dot(phi.gradient(x));
      const double LG = lambda.dot(G.hessian(x).diagonal()) - x.dot(g);
      return q * signed_power(v, q) * inner + LG * std::pow(std::abs(v), q);
    };
  } else {
    require_hessian(domain, "partitraccia2");
    t.id = IdentityId::partitraccia2;
    t.lhs_surface = [phi, q](const Vector& x) { return std::pow(std::abs(phi.value(x)), q); };
    t.rhs_bulk = [phi, G, lambda, space, q](const Vector& x) {
      const Vector g = G.gradient(x);
      const double v = phi.value(x);
      const double norm = h_gradient_norm(space, g);
      const double inner = lambda.cwiseProduct(g).dot(phi.gradient(x)) / norm;
      return q * signed_power(v, q) * inner + unit_normal_divergence(space, G, x) * std::pow(std::abs(v), q);
    };
  }
  return t;
}

IdentityTerms divergence_terms(const GaussianSpace& space, const LevelSetDomain& domain, const VectorFieldH& Phi) {
  if (Phi.components.size() != space.dim())
    throw std::invalid_argument("campi: field has the wrong number of components");
  const ScalarField G = domain.G;
  const Vector s = space.sqrt_eigenvalues();
  IdentityTerms t;
  t.id = IdentityId::campi;
  t.phi = Phi.label;
  t.lhs_bulk = [space, Phi](const Vector& x) { return gaussian_divergence(space, Phi, x); };
  t.rhs_surface = [space, Phi, G, s](const Vector& x) {
    const Vector g = G.gradient(x);
    double inner = 0.0;
    for (std::size_t k = 0; k < Phi.components.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      inner += Phi.components[k].value(x) * s(kk) * g(kk);
    }
    return inner / h_gradient_norm(space, g);
  };
  return t;
}

IdentityTerms product_terms(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                            const ScalarField& psi, std::size_t k) {
  require_index(space, k, "particlassica");
  const auto kk = static_cast<Eigen::Index>(k);
  const double s = space.sqrt_eigenvalues()(kk);
  const ScalarField G = domain.G;
  IdentityTerms t;
  t.id = IdentityId::particlassica;
  t.phi = phi.label;
  t.psi = psi.label;
  t.index = index_label("k", k);
  t.lhs_bulk = [phi, psi, s, kk](const Vector& x) { return s * phi.gradient(x)(kk) * psi.value(x); };
  t.rhs_bulk = [phi, psi, s, kk](const Vector& x) {
    const double f = phi.value(x);
    return -s * psi.gradient(x)(kk) * f + x(kk) / s * f * psi.value(x);
  };
  t.rhs_surface = [phi, psi, G, space, s, kk](const Vector& x) {
    const Vector g = G.gradient(x);
    return s * g(kk) / h_gradient_norm(space, g) * phi.value(x) * psi.value(x);
  };
  return t;
}

IdentityTerms partial_h_terms(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                              const Vector& h) {
  if (static_cast<std::size_t>(h.size()) != space.dim() || !(h.norm() > 0.0))
    throw std::invalid_argument("partial_h: h must be a nonzero vector of the space dimension");
  const Vector c = h / h.norm();
  const Vector s = space.sqrt_eigenvalues();
  const Vector cs = c.cwiseProduct(s);   // d_h = sum_k c_k sqrt(lambda_k) d_k
  const Vector cv = c.cwiseQuotient(s);  // h^(x) = sum_k c_k x_k / sqrt(lambda_k)
  const ScalarField G = domain.G;
  IdentityTerms t;
  t.id = IdentityId::partial_h;
  t.phi = phi.label;
  std::ostringstream label;
  label << "h=(";
  for (Eigen::Index k = 0; k < c.size(); ++k) label << (k ? "," : "") << c(k);
  label << ")";
  t.index = label.str();
  t.lhs_bulk = [phi, cs, cv](const Vector& x) { return cs.dot(phi.gradient(x)) - cv.dot(x) * phi.value(x); };
  t.rhs_surface = [phi, G, space, cs](const Vector& x) {
    const Vector g = G.gradient(x);
    return phi.value(x) * cs.dot(g) / h_gradient_norm(space, g);
  };
  return t;
}

namespace {

// x - h^(x) h: the projection whose law is mu_Y, supported on {h^ = 0}.
struct HalfspaceFrame {
  Vector h;   ///< eigen coordinates of h
  Vector cv;  ///< h^(x) = cv . x
  Vector c;   ///< Cameron-Martin coordinates
  [[nodiscard]] Vector project(const Vector& x) const { return x - cv.dot(x) * h; }
};

HalfspaceFrame halfspace_frame(const GaussianSpace& space, const LevelSetDomain& domain, const char* where) {
  const HalfspaceParams& params = halfspace_params(domain, where);
  const Vector& s = space.sqrt_eigenvalues();
  return HalfspaceFrame{params.hhat.cwiseProduct(s), params.hhat.cwiseQuotient(s), params.hhat};
}

constexpr const char* kHalfspaceNote = "rho=(2pi)^{-1/2}mu_Y";

}  // namespace

IdentityTerms halfspace_parti_terms(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                    std::size_t k) {
  require_index(space, k, "partisemispazio");
  const HalfspaceFrame frame = halfspace_frame(space, domain, "partisemispazio");
  const auto kk = static_cast<Eigen::Index>(k);
  const double s = space.sqrt_eigenvalues()(kk);
  const double ck = frame.c(kk);
  IdentityTerms t;
  t.id = IdentityId::partisemispazio;
  t.phi = phi.label;
  t.index = index_label("k", k);
  t.note = kHalfspaceNote;
  t.lhs_bulk = [phi, s, kk](const Vector& x) { return s * phi.gradient(x)(kk); };
  t.rhs_bulk = [phi, s, kk](const Vector& x) { return x(kk) / s * phi.value(x); };
  if (ck != 0.0)
    t.rhs_global = [phi, frame, ck](const Vector& x) { return -ck * kInvSqrt2Pi * phi.value(frame.project(x)); };
  return t;
}

IdentityTerms halfspace_trace_terms(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                    double p) {
  require_exponent(p, "tracciasemispazio");
  const HalfspaceFrame frame = halfspace_frame(space, domain, "tracciasemispazio");
  const Vector cs = frame.c.cwiseProduct(space.sqrt_eigenvalues());
  IdentityTerms t;
  t.id = IdentityId::tracciasemispazio;
  t.phi = phi.label;
  t.index = number_label("p", p);
  t.note = kHalfspaceNote;
  t.lhs_global = [phi, frame, p](const Vector& x) {
    return kInvSqrt2Pi * std::pow(std::abs(phi.value(frame.project(x))), p);
  };
  t.rhs_bulk = [phi, frame, cs, p](const Vector& x) {
    const double v = phi.value(x);
    return -p * signed_power(v, p) * cs.dot(phi.gradient(x)) + frame.cv.dot(x) * std::pow(std::abs(v), p);
  };
  return t;
}

IdentityTerms sphere_terms(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                           double p) {
  require_exponent(p, "sfera");
  centered_ball(domain, "sfera");
  const Vector lambda = space.eigenvalues();
  const double trace = space.trace();
  IdentityTerms t;
  t.id = IdentityId::sfera;
  t.phi = phi.label;
  t.index = number_label("p", p);
  t.lhs_surface = [phi, p](const Vector& x) { return std::pow(std::abs(phi.value(x)), p); };
  t.rhs_bulk = [phi, lambda, trace, p](const Vector& x) {
    const Vector qx = lambda.cwiseProduct(x);
    const double half = std::sqrt(x.dot(qx));  // |Q^{1/2} x|
    const double v = phi.value(x);
    const double vp = std::pow(std::abs(v), p);
    const double grad = p * signed_power(v, p) * qx.dot(phi.gradient(x)) / half;
    return grad + (trace - x.squaredNorm()) / half * vp - qx.squaredNorm() / (half * half * half) * vp;
  };
  return t;
}

IdentityReport verify_parti(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                            std::size_t k, const SampleSet& samples, const SurfaceRoute& route) {
  return evaluate_identities(space, domain, samples, {parti_terms(space, domain, phi, k)}, route).front();
}

IdentityReport verify_parti(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                            std::size_t k, const SamplerState& state, std::size_t count,
                            std::size_t surface_resolution) {
  const SampleSet samples(space, state, count);
  SurfaceRoute route;
  route.resolution = surface_resolution;
  return verify_parti(space, domain, phi, k, samples, route);
}

IdentityReport verify_power_identity(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                     double q, PowerVariant variant, const SampleSet& samples,
                                     const SurfaceRoute& route) {
  return evaluate_identities(space, domain, samples, {power_terms(space, domain, phi, q, variant)}, route).front();
}

IdentityReport verify_divergence_theorem(const GaussianSpace& space, const LevelSetDomain& domain,
                                         const VectorFieldH& Phi, const SampleSet& samples,
                                         const SurfaceRoute& route) {
  return evaluate_identities(space, domain, samples, {divergence_terms(space, domain, Phi)}, route).front();
}

IdentityReport verify_product_rule(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                   const ScalarField& psi, std::size_t k, const SampleSet& samples,
                                   const SurfaceRoute& route) {
  return evaluate_identities(space, domain, samples, {product_terms(space, domain, phi, psi, k)}, route).front();
}

IdentityReport verify_partial_h(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                const Vector& h, const SampleSet& samples, const SurfaceRoute& route) {
  return evaluate_identities(space, domain, samples, {partial_h_terms(space, domain, phi, h)}, route).front();
}

IdentityReport verify_sphere_formula(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                     double p, const SampleSet& samples, const SurfaceRoute& route) {
  return evaluate_identities(space, domain, samples, {sphere_terms(space, domain, phi, p)}, route).front();
}

VectorFieldH rotation_field(const GaussianSpace& space, const LevelSetDomain& domain) {
  if (space.dim() != 2) throw std::invalid_argument("rotation_field: needs dimension 2");
  require_hessian(domain, "rotation_field");
  const ScalarField G = domain.G;
  const Vector s = space.sqrt_eigenvalues();
  // Phi = (-D_2 G, D_1 G): H-orthogonal to D_H G everywhere.
  VectorFieldH field;
  field.label = "rotation";
  for (Eigen::Index k = 0; k < 2; ++k) {
    const Eigen::Index other = 1 - k;
    const double sign = k == 0 ? -1.0 : 1.0;
    const double scale = sign * s(other);
    ScalarField c;
    c.value = [G, scale, other](const Vector& x) { return scale * G.gradient(x)(other); };
    c.gradient = [G, scale, other](const Vector& x) -> Vector { return scale * G.hessian(x).row(other).transpose(); };
    c.label = "rot" + std::to_string(k + 1);
    field.components.push_back(std::move(c));
  }
  return field;
}

VectorFieldH directional_field(const ScalarField& phi, const Vector& a) {
  VectorFieldH field;
  const auto n = static_cast<std::size_t>(a.size());
  for (std::size_t k = 0; k < n; ++k) field.components.push_back(fields::scaled(phi, a(static_cast<Eigen::Index>(k))));
  std::ostringstream label;
  label << phi.label << "*(";
  for (Eigen::Index k = 0; k < a.size(); ++k) label << (k ? "," : "") << a(k);
  label << ")";
  field.label = label.str();
  return field;
}

ZeroTraceReport zero_trace_probe(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& u,
                                 double eps, const std::vector<double>& sweep, std::size_t k,
                                 const SampleSet& samples, const SurfaceRoute& route) {
  require_index(space, k, "zero_trace_probe");
  const ScalarField phi = fields::boundary_cutoff(u, domain.G, eps);
  ZeroTraceReport report;
  report.boundary_integral =
      surface_or_coarea(space, domain, [&](const Vector& x) { return std::abs(phi.value(x)); }, samples, route).value;

  std::vector<IdentityTerms> batch;
  for (std::size_t j = 0; j < space.dim(); ++j) {
    IdentityTerms t = parti_terms(space, domain, phi, j);
    t.rhs_surface = nullptr;
    t.note = "zero trace";
    batch.push_back(std::move(t));
  }
  report.parti = evaluate_identities(space, domain, samples, batch, route);

  std::vector<double> eps_values = sweep;
  std::sort(eps_values.begin(), eps_values.end(), std::greater<>());
  std::vector<ScalarField> cut;
  for (double e : eps_values) cut.push_back(fields::boundary_cutoff(u, domain.G, e));
  const auto kk = static_cast<Eigen::Index>(k);
  const double s = space.sqrt_eigenvalues()(kk);
  const std::size_t m = cut.size();
  // Outputs: uncut bulk, then per eps (bulk, cut mass, bound).
  const std::vector<Estimate> mc = integrate(samples, 1 + 3 * m, [&](const Vector& x, std::span<double> out) {
    if (!domain.contains(x)) return;
    const double vk = x(kk) / s;
    const double uv = u.value(x);
    out[0] = vk * uv;
    for (std::size_t i = 0; i < m; ++i) {
      const double pv = cut[i].value(x);
      out[1 + 3 * i] = vk * pv;
      out[2 + 3 * i] = std::abs(uv) - std::abs(pv);
      out[3 + 3 * i] = std::abs(vk) * (std::abs(uv) - std::abs(pv));
    }
  });
  report.uncut_bulk = mc[0];
  report.cut_mass_monotone = true;
  report.bulk_converges = true;
  double previous_mass = std::numeric_limits<double>::infinity();
  double previous_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    ZeroTraceRow row{eps_values[i], mc[1 + 3 * i], mc[2 + 3 * i]};
    const double bound = mc[3 + 3 * i].mean;
    if (row.cut_mass.mean > previous_mass) report.cut_mass_monotone = false;
    if (std::abs(row.bulk.mean - report.uncut_bulk.mean) > bound * (1.0 + 1e-12) + 1e-15 || bound > previous_bound)
      report.bulk_converges = false;
    previous_mass = row.cut_mass.mean;
    previous_bound = bound;
    report.sweep.push_back(row);
  }
  return report;
}

HardyReport hardy_probe(const GaussianSpace& space, const LevelSetDomain& ball, double p,
                        const std::vector<ScalarField>& family, const SamplerState& state, std::size_t count,
                        unsigned workers) {
  const BallParams& params = centered_ball(ball, "hardy_probe");
  if (!(p > 1.0)) throw std::invalid_argument("hardy_probe: p must be > 1");
  const std::size_t n = space.dim();
  if (n < 2) throw std::invalid_argument("hardy_probe: needs dimension >= 2");
  HardyReport report;
  report.p = p;
  report.converse_regime = params.radius * params.radius < space.trace() - space.max_eigenvalue();

  const double nd = static_cast<double>(n);
  // E over chi_n of 1/R: likelihood ratio chi_n / chi_{n-1} is c R.
  const double ratio_const = std::exp(std::lgamma(0.5 * (nd - 1.0)) - std::lgamma(0.5 * nd)) / std::sqrt(2.0);
  const Vector lambda = space.eigenvalues();
  const Vector s = space.sqrt_eigenvalues();
  const double r2 = params.radius * params.radius;
  const double trace = space.trace();
  const std::size_t f = family.size();
  constexpr std::size_t kOut = 6;
  const std::vector<Estimate> mc = integrate_indexed(
      state, count, workers, kOut * f, [&](std::size_t, CounterRng& rng, std::span<double> out) {
        Vector u(static_cast<Eigen::Index>(n));
        for (auto& v : u) v = rng.normal();
        u.normalize();
        double r_sq = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
          const double g = rng.normal();
          r_sq += g * g;
        }
        const double R = std::sqrt(r_sq);
        const Vector x = s.cwiseProduct(R * u);
        const double w = ratio_const * R;
        Vector plain(static_cast<Eigen::Index>(n));
        for (auto& v : plain) v = rng.normal();
        plain = s.cwiseProduct(plain);
        const bool in_is = x.squaredNorm() < r2;
        const bool in_plain = plain.squaredNorm() < r2;
        const Vector qx = lambda.cwiseProduct(x);
        const double half = std::sqrt(x.dot(qx));
        for (std::size_t i = 0; i < f; ++i) {
          const ScalarField& phi = family[i];
          std::span<double> o = out.subspan(kOut * i, kOut);
          if (in_is && half > 0.0) {
            const double v = phi.value(x);
            const double vp = std::pow(std::abs(v), p);
            o[0] = w * vp / half;
            o[3] = w * p * signed_power(v, p) * qx.dot(phi.gradient(x)) / half;
            o[4] = w * (trace - x.squaredNorm()) / half * vp;
            o[5] = -w * qx.squaredNorm() / (half * half * half) * vp;
          }
          if (in_plain) {
            o[1] = std::pow(std::abs(phi.value(plain)), p);
            o[2] = std::pow(h_gradient_norm(space, phi.gradient(plain)), p);
          }
        }
      });
  for (std::size_t i = 0; i < f; ++i) {
    HardyRow row;
    row.phi = family[i].label;
    row.numerator = mc[kOut * i];
    row.lp_norm_p = mc[kOut * i + 1];
    row.grad_norm_p = mc[kOut * i + 2];
    row.term_gradient = mc[kOut * i + 3];
    row.term_trace = mc[kOut * i + 4];
    row.term_curvature = mc[kOut * i + 5];
    if (row.numerator.mean > 0.0 && row.numerator.std_error > 0.5 * row.numerator.mean) {
      std::ostringstream msg;
      msg << "hardy_probe: Monte Carlo error of the singular integral for " << row.phi
          << " exceeds half its value; increase the sample count or the importance tilt";
      throw std::runtime_error(msg.str());
    }
    const double a = std::pow(row.lp_norm_p.mean, 1.0 / p);
    const double b = std::pow(row.grad_norm_p.mean, 1.0 / p);
    row.denominator = std::pow(a + b, p);
    row.ratio = row.denominator > 0.0 ? row.numerator.mean / row.denominator : 0.0;
    if (row.denominator > 0.0 && row.numerator.mean > 0.0) {
      const double rel_a = row.lp_norm_p.mean > 0.0 ? row.lp_norm_p.std_error / row.lp_norm_p.mean : 0.0;
      const double rel_b = row.grad_norm_p.mean > 0.0 ? row.grad_norm_p.std_error / row.grad_norm_p.mean : 0.0;
      const double rel_den = (a * rel_a + b * rel_b) / (a + b);
      row.ratio_err = row.ratio * std::hypot(row.numerator.std_error / row.numerator.mean, rel_den);
    }
    report.sup_ratio = std::max(report.sup_ratio, row.ratio);
    report.rows.push_back(std::move(row));
  }
  return report;
}

TraceBoundCheck trace_bound_check(const GaussianSpace& space, const LevelSetDomain& domain, const ScalarField& phi,
                                  double q, double p, const SampleSet& samples, const SurfaceRoute& route) {
  require_exponent(q, "trace_bound_check");
  if (!(p > q)) throw std::invalid_argument("trace_bound_check: needs p > q");
  require_hessian(domain, "trace_bound_check");
  TraceBoundCheck out;
  out.q = q;
  out.p = p;
  const SurfaceIntegral lhs = surface_or_coarea(
      space, domain, [&](const Vector& x) { return std::pow(std::abs(phi.value(x)), q); }, samples, route);
  out.lhs = lhs.value;
  const double conj = p / (p - q);
  const std::vector<Estimate> mc = integrate(samples, 4, [&](const Vector& x, std::span<double> o) {
    if (!domain.contains(x)) return;
    o[0] = 1.0;
    o[1] = std::pow(std::abs(phi.value(x)), p);
    o[2] = std::pow(h_gradient_norm(space, phi.gradient(x)), p);
    o[3] = std::pow(std::max(0.0, unit_normal_divergence(space, domain.G, x)), conj);
  });
  out.constant = q * std::pow(mc[0].mean, 1.0 - q / p) + std::pow(mc[3].mean, 1.0 / conj);
  out.sobolev_q = std::pow(std::pow(mc[1].mean, 1.0 / p) + std::pow(mc[2].mean, 1.0 / p), q);
  out.bound = out.constant * out.sobolev_q;
  out.holds = out.lhs - lhs.error_estimate <= out.bound;
  return out;
}

bool BoundednessCheck::gradient_bounded() const {
  return std::isfinite(sup_h_gradient) && sup_h_gradient <= 1.05 * sup_h_gradient_half;
}

BoundednessCheck boundedness_check(const GaussianSpace& space, const LevelSetDomain& domain, const SampleSet& samples,
                                   std::size_t surface_resolution) {
  require_hessian(domain, "boundedness_check");
  BoundednessCheck out;
  out.sup_h_gradient = out.sup_h_gradient_half = 0.0;
  out.sup_generator = out.sup_generator_half = -std::numeric_limits<double>::infinity();
  const std::size_t half = samples.size() / 2;
  const Vector& lambda = space.eigenvalues();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vector x = samples.points().col(static_cast<Eigen::Index>(i));
    if (!domain.contains(x)) continue;
    const Vector g = domain.G.gradient(x);
    const double dh = h_gradient_norm(space, g);
    const double LG = lambda.dot(domain.G.hessian(x).diagonal()) - x.dot(g);
    out.sup_h_gradient = std::max(out.sup_h_gradient, dh);
    out.sup_generator = std::max(out.sup_generator, LG);
    if (i < half) {
      out.sup_h_gradient_half = std::max(out.sup_h_gradient_half, dh);
      out.sup_generator_half = std::max(out.sup_generator_half, LG);
    }
  }
  const SurfaceQuadrature quad = surface_quadrature(space, domain, 0.0, surface_resolution);
  out.inf_boundary_h_gradient = std::numeric_limits<double>::infinity();
  for (const Vector& x : quad.points)
    out.inf_boundary_h_gradient = std::min(out.inf_boundary_h_gradient, h_gradient_norm(space, domain.G.gradient(x)));
  if (quad.points.empty()) out.inf_boundary_h_gradient = 0.0;
  return out;
}

std::vector<SuiteDomain> default_suite_domains() {
  std::vector<SuiteDomain> out;
  {
    const GaussianSpace space = GaussianSpace::diagonal(Vector{{1.0}});
    out.push_back({"halfspace1d", space, make_halfspace(space, Vector{{1.0}})});
  }
  {
    const GaussianSpace space = GaussianSpace::diagonal(Vector{{1.5, 0.5}});
    out.push_back({"halfspace2d", space, make_halfspace(space, Vector{{1.0, 1.0}})});
  }
  {
    const GaussianSpace space = GaussianSpace::isotropic(2);
    out.push_back({"sphere2d", space, make_ball(space, 1.0)});
  }
  {
    const GaussianSpace space = GaussianSpace::diagonal(Vector{{1.0, 0.6, 0.3}});
    out.push_back({"sphere3d", space, make_ball(space, 1.0)});
  }
  {
    const GaussianSpace space = GaussianSpace::diagonal(Vector{{1.0, 0.7}});
    ScalarField F;
    F.value = [](const Vector& y) { return 0.25 + 0.4 * std::sin(y(0)); };
    F.gradient = [](const Vector& y) -> Vector { return Vector::Constant(1, 0.4 * std::cos(y(0))); };
    F.hessian = [](const Vector& y) -> Matrix { return Matrix::Constant(1, 1, -0.4 * std::sin(y(0))); };
    F.label = "0.25+0.4sin(y)";
    out.push_back({"graph2d", space, make_graph_region(space, 0, F)});
  }
  {
    const GaussianSpace space = GaussianSpace::diagonal(Vector{{1.0, 0.5}});
    out.push_back({"ellipsoid2d", space, make_ellipsoid(space, EllipsoidSpec{Vector{{1.0, 2.0}}, 1.2})});
  }
  for (SuiteDomain& d : out) d.domain.label = d.name;
  return out;
}

std::vector<ScalarField> default_test_functions(std::size_t dim) {
  std::vector<ScalarField> out;
  out.push_back(fields::constant(dim, 1.0));
  for (std::size_t k = 0; k < dim; ++k) out.push_back(fields::coordinate(dim, k));
  for (std::size_t k = 0; k < dim; ++k) out.push_back(fields::coordinate_square(dim, k));
  out.push_back(fields::gaussian_bump(Vector::Zero(static_cast<Eigen::Index>(dim)), 4.0));
  return out;
}

std::vector<IdentityTerms> default_identity_batch(const GaussianSpace& space, const LevelSetDomain& domain) {
  const std::size_t n = space.dim();
  const auto nn = static_cast<Eigen::Index>(n);
  const ScalarField psi = fields::gaussian_bump(Vector::Zero(nn), 4.0);
  Vector h(nn), a(nn);
  for (Eigen::Index k = 0; k < nn; ++k) {
    h(k) = static_cast<double>(k + 1);
    a(k) = (k % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(k + 1);
  }
  const bool halfspace = domain.kind == DomainKind::halfspace;
  const auto* ball = std::get_if<BallParams>(&domain.metadata);
  const bool centered_ball = domain.kind == DomainKind::ball && ball != nullptr && ball->center.norm() == 0.0;

  std::vector<IdentityTerms> batch;
  for (const ScalarField& phi : default_test_functions(n)) {
    for (std::size_t k = 0; k < n; ++k) batch.push_back(parti_terms(space, domain, phi, k));
    batch.push_back(partial_h_terms(space, domain, phi, h));
    for (double q : {1.0, 2.0}) {
      batch.push_back(power_terms(space, domain, phi, q, PowerVariant::partitraccia));
      batch.push_back(power_terms(space, domain, phi, q, PowerVariant::partitraccia2));
    }
    batch.push_back(divergence_terms(space, domain, directional_field(phi, a)));
    for (std::size_t k = 0; k < n; ++k) batch.push_back(product_terms(space, domain, phi, psi, k));
    if (halfspace) {
      for (std::size_t k = 0; k < n; ++k) batch.push_back(halfspace_parti_terms(space, domain, phi, k));
      for (double p : {1.0, 2.0}) batch.push_back(halfspace_trace_terms(space, domain, phi, p));
    }
    if (centered_ball)
      for (double p : {1.0, 2.0}) batch.push_back(sphere_terms(space, domain, phi, p));
  }
  batch.push_back(divergence_terms(space, domain, vector_fields::unit_normal(space, domain.G)));
  if (n == 2 && domain.kind != DomainKind::halfspace)
    batch.push_back(divergence_terms(space, domain, rotation_field(space, domain)));
  return batch;
}

std::vector<IdentityReport> run_identity_suite(const SuiteConfig& config) {
  return run_identity_suite(config, default_suite_domains());
}

std::vector<IdentityReport> run_identity_suite(const SuiteConfig& config, const std::vector<SuiteDomain>& domains) {
  std::vector<IdentityReport> all;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const SuiteDomain& d = domains[i];
    const SampleSet samples(d.space, config.state.substream(static_cast<std::uint32_t>(i)), config.samples,
                            config.workers);
    std::vector<IdentityReport> reports =
        evaluate_identities(d.space, d.domain, samples, default_identity_batch(d.space, d.domain), config.route);
    for (IdentityReport& r : reports) r.domain = d.name;
    all.insert(all.end(), std::make_move_iterator(reports.begin()), std::make_move_iterator(reports.end()));
  }
  return all;
}

}  // namespace gausstrace
