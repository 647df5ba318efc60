#pragma once

// Verification harness for the integration-by-parts and trace identities.
// Every identity is written as bulk integrands over O, integrands over the
// whole space and surface integrands against rho; one pass over a shared
// sample set evaluates a whole batch (common random numbers).

#include "gausstrace/domains.hpp"
#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/monte_carlo.hpp"
#include "gausstrace/scalar_field.hpp"
#include "gausstrace/surface_measure.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gausstrace {

enum class IdentityId {
  parti,
  partitraccia,
  partitraccia2,
  campi,
  particlassica,
  partial_h,
  partisemispazio,
  tracciasemispazio,
  sfera,
};

[[nodiscard]] const char* to_string(IdentityId id) noexcept;

inline constexpr double kPassSigmas = 3.0;

struct IdentityReport {
  IdentityId id = IdentityId::parti;
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_err = 0.0;
  double rhs_err = 0.0;
  /// Standard error of the per-sample difference (plus quadrature errors);
  /// diagnostic only, the pass rule uses combined_error().
  double diff_err = 0.0;
  bool pass = false;
  std::string domain;
  std::string phi;
  std::string psi;
  std::string index;  ///< "k=2", "q=1", "h=...", ...
  std::string note;

  [[nodiscard]] double combined_error() const;
  [[nodiscard]] double tolerance() const;
  /// pass agrees with the stored numbers.
  [[nodiscard]] bool consistent() const;
};

/// One identity as integrands. Empty functions contribute zero.
struct IdentityTerms {
  IdentityId id = IdentityId::parti;
  std::string phi, psi, index, note;
  PointFunction lhs_bulk, rhs_bulk;        ///< integrated over O against mu
  PointFunction lhs_global, rhs_global;    ///< integrated over X against mu
  PointFunction lhs_surface, rhs_surface;  ///< integrated over G = 0 against rho
};

struct SurfaceRoute {
  std::size_t resolution = 64;
  /// Used when the domain has no parametrization: coarea estimate from the
  /// sample set with this bandwidth multiplier on Silverman's rule.
  double kde_bandwidth_scale = 0.5;
};

/// Surface integral by quadrature, or by the coarea route with error equal to
/// the KDE standard error plus a bias estimate from doubling the bandwidth.
[[nodiscard]] SurfaceIntegral surface_or_coarea(const GaussianSpace& space, const LevelSetDomain& domain,
                                                const PointFunction& g, const SampleSet& samples,
                                                const SurfaceRoute& route);

/// Evaluates a batch of identities on one sample set.
[[nodiscard]] std::vector<IdentityReport> evaluate_identities(const GaussianSpace& space,
                                                              const LevelSetDomain& domain,
                                                              const SampleSet& samples,
                                                              const std::vector<IdentityTerms>& batch,
                                                              const SurfaceRoute& route = {});

// Term builders. Indices k are 0-based; labels print them 1-based.
[[nodiscard]] IdentityTerms parti_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                        const ScalarField& phi, std::size_t k);
enum class PowerVariant { partitraccia, partitraccia2 };
[[nodiscard]] IdentityTerms power_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                        const ScalarField& phi, double q, PowerVariant variant);
[[nodiscard]] IdentityTerms divergence_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                             const VectorFieldH& Phi);
[[nodiscard]] IdentityTerms product_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                          const ScalarField& phi, const ScalarField& psi, std::size_t k);
/// h given by Cameron-Martin coordinates (normalized internally).
[[nodiscard]] IdentityTerms partial_h_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                            const ScalarField& phi, const Vector& h);
/// Halfspace forms; the surface side is (2 pi)^{-1/2} times the mu_Y integral,
/// computed from x - h^(x) h over the whole space.
[[nodiscard]] IdentityTerms halfspace_parti_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                                  const ScalarField& phi, std::size_t k);
[[nodiscard]] IdentityTerms halfspace_trace_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                                  const ScalarField& phi, double p);
/// Ball identity with the three bulk terms; requires a centered ball.
[[nodiscard]] IdentityTerms sphere_terms(const GaussianSpace& space, const LevelSetDomain& domain,
                                         const ScalarField& phi, double p);

// Single-identity conveniences.
[[nodiscard]] IdentityReport verify_parti(const GaussianSpace& space, const LevelSetDomain& domain,
                                          const ScalarField& phi, std::size_t k, const SampleSet& samples,
                                          const SurfaceRoute& route = {});
[[nodiscard]] IdentityReport verify_parti(const GaussianSpace& space, const LevelSetDomain& domain,
                                          const ScalarField& phi, std::size_t k, const SamplerState& state,
                                          std::size_t count, std::size_t surface_resolution);
[[nodiscard]] IdentityReport verify_power_identity(const GaussianSpace& space, const LevelSetDomain& domain,
                                                   const ScalarField& phi, double q, PowerVariant variant,
                                                   const SampleSet& samples, const SurfaceRoute& route = {});
[[nodiscard]] IdentityReport verify_divergence_theorem(const GaussianSpace& space, const LevelSetDomain& domain,
                                                       const VectorFieldH& Phi, const SampleSet& samples,
                                                       const SurfaceRoute& route = {});
[[nodiscard]] IdentityReport verify_product_rule(const GaussianSpace& space, const LevelSetDomain& domain,
                                                 const ScalarField& phi, const ScalarField& psi, std::size_t k,
                                                 const SampleSet& samples, const SurfaceRoute& route = {});
[[nodiscard]] IdentityReport verify_partial_h(const GaussianSpace& space, const LevelSetDomain& domain,
                                              const ScalarField& phi, const Vector& h, const SampleSet& samples,
                                              const SurfaceRoute& route = {});
[[nodiscard]] IdentityReport verify_sphere_formula(const GaussianSpace& space, const LevelSetDomain& domain,
                                                   const ScalarField& phi, double p, const SampleSet& samples,
                                                   const SurfaceRoute& route = {});

/// Tangential field for balls and ellipsoids in 2D: <Phi, D_H G>_H = 0.
[[nodiscard]] VectorFieldH rotation_field(const GaussianSpace& space, const LevelSetDomain& domain);
/// Phi = phi * a (constant Cameron-Martin direction a).
[[nodiscard]] VectorFieldH directional_field(const ScalarField& phi, const Vector& a);

struct ZeroTraceRow {
  double eps = 0.0;
  Estimate bulk;      ///< integral over O of v^_k phi_eps
  Estimate cut_mass;  ///< integral over O of |u| (1 - eta_eps(G))
};

struct ZeroTraceReport {
  double boundary_integral = 0.0;  ///< surface integral of |phi_eps|
  std::vector<IdentityReport> parti;  ///< (parti) with no boundary term, per k
  std::vector<ZeroTraceRow> sweep;
  Estimate uncut_bulk;  ///< integral over O of v^_k u for the swept k
  bool cut_mass_monotone = false;
  bool bulk_converges = false;  ///< |bulk - uncut| <= cut-mass bound, shrinking
};

/// phi = u eta(G) with eta vanishing on {G > -eps}; checks the zero boundary
/// integral, (parti) without boundary term, and an eps sweep for axis `k`.
[[nodiscard]] ZeroTraceReport zero_trace_probe(const GaussianSpace& space, const LevelSetDomain& domain,
                                               const ScalarField& u, double eps, const std::vector<double>& sweep,
                                               std::size_t k, const SampleSet& samples,
                                               const SurfaceRoute& route = {});

struct HardyRow {
  std::string phi;
  Estimate numerator;  ///< integral over B of |phi|^p / |Q^{1/2} x|
  Estimate lp_norm_p;  ///< integral over B of |phi|^p
  Estimate grad_norm_p;  ///< integral over B of |D_H phi|^p
  double denominator = 0.0;  ///< (|phi|_{L^p} + |D_H phi|_{L^p})^p
  double ratio = 0.0;
  double ratio_err = 0.0;
  // Ball-identity decomposition of the surface integral of |phi|^p.
  Estimate term_gradient;
  Estimate term_trace;
  Estimate term_curvature;
};

struct HardyReport {
  std::vector<HardyRow> rows;
  double sup_ratio = 0.0;
  bool converse_regime = false;  ///< r^2 < Tr Q - lambda_max
  double p = 2.0;
};

/// Estimates R(phi) for each member of the family. The singular weight is
/// handled by drawing |z| from chi_{n-1} instead of chi_n (z the whitened
/// point) and reweighting by the likelihood ratio. Requires n >= 2.
[[nodiscard]] HardyReport hardy_probe(const GaussianSpace& space, const LevelSetDomain& ball, double p,
                                      const std::vector<ScalarField>& family, const SamplerState& state,
                                      std::size_t count, unsigned workers = 1);

struct TraceBoundCheck {
  double q = 1.0;
  double p = 4.0;
  double lhs = 0.0;       ///< surface integral of |phi|^q
  double constant = 0.0;  ///< C_est
  double sobolev_q = 0.0; ///< |phi|^q_{W^{1,p}(O)}
  double bound = 0.0;
  bool holds = false;
};

/// LHS of the trace bound against C_est |phi|^q_{W^{1,p}}, where
/// C_est = q mu(O)^{1 - q/p} + |(div n)^+|_{L^{p/(p-q)}(O)} comes from the
/// partitraccia2 right-hand side and Hoelder.
[[nodiscard]] TraceBoundCheck trace_bound_check(const GaussianSpace& space, const LevelSetDomain& domain,
                                                const ScalarField& phi, double q, double p,
                                                const SampleSet& samples, const SurfaceRoute& route = {});

struct BoundednessCheck {
  double sup_h_gradient = 0.0;        ///< max |D_H G| over samples in O
  double sup_h_gradient_half = 0.0;   ///< same over the first half
  double sup_generator = 0.0;         ///< max LG over samples in O
  double sup_generator_half = 0.0;
  double inf_boundary_h_gradient = 0.0;  ///< min |D_H G| over quadrature nodes
  [[nodiscard]] bool gradient_bounded() const;
  [[nodiscard]] bool boundary_nondegenerate() const { return inf_boundary_h_gradient > 0.0; }
};

[[nodiscard]] BoundednessCheck boundedness_check(const GaussianSpace& space, const LevelSetDomain& domain,
                                                 const SampleSet& samples, std::size_t surface_resolution = 64);

/// A domain of the default suite with its test functions.
struct SuiteDomain {
  std::string name;
  GaussianSpace space;
  LevelSetDomain domain;
};

/// 1D halfspace, 2D halfspace, 2D sphere, 3D anisotropic sphere, 2D graph
/// region, 2D anisotropic ellipsoid.
[[nodiscard]] std::vector<SuiteDomain> default_suite_domains();
/// {1, x_k, x_k^2, exp(-|x|^2/4)} for every k.
[[nodiscard]] std::vector<ScalarField> default_test_functions(std::size_t dim);
/// Every identity applicable to the domain for the standard family.
[[nodiscard]] std::vector<IdentityTerms> default_identity_batch(const GaussianSpace& space,
                                                                const LevelSetDomain& domain);

struct SuiteConfig {
  SamplerState state{42, 0};
  std::size_t samples = 1'000'000;
  unsigned workers = 1;
  SurfaceRoute route;
};

/// Runs the default batch on every suite domain; domain i uses substream i.
[[nodiscard]] std::vector<IdentityReport> run_identity_suite(const SuiteConfig& config);
[[nodiscard]] std::vector<IdentityReport> run_identity_suite(const SuiteConfig& config,
                                                             const std::vector<SuiteDomain>& domains);

}  // namespace gausstrace
