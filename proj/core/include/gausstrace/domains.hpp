#pragma once

#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/monte_carlo.hpp"
#include "gausstrace/rng.hpp"
#include "gausstrace/scalar_field.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gausstrace {

enum class DomainKind { halfspace, graph_region, ball, ellipsoid, custom };

[[nodiscard]] const char* to_string(DomainKind kind) noexcept;

/// Quadrature for Euclidean surface measure on a patch of a level set:
/// sum_i area_weights[i] * g(points[i]) approximates the integral of g dS.
struct SurfacePatch {
  std::vector<Vector> points;
  std::vector<double> area_weights;
};

/// Closed-form parametrization of G^{-1}(level) sampled at a resolution.
using SurfaceParametrization = std::function<SurfacePatch(double level, std::size_t resolution)>;

struct HalfspaceParams {
  Vector hhat;  ///< Cameron-Martin coordinates of h, |h|_H = 1
};

struct BallParams {
  double radius = 1.0;
  Vector center;
};

struct EllipsoidSpec {
  Vector alphas;
  double radius = 1.0;
};

struct GraphParams {
  std::size_t h_index = 0;  ///< 0-based axis spanning the normal direction
  ScalarField F;            ///< function on Y (the remaining n-1 coordinates)
};

using DomainMetadata = std::variant<std::monostate, HalfspaceParams, BallParams, EllipsoidSpec, GraphParams>;

/// Sublevel domain O = {G < 0} together with its nondegeneracy band
/// O_delta = {|G| < delta} and, when known, a parametrization of G^{-1}(xi).
struct LevelSetDomain {
  ScalarField G;
  DomainKind kind = DomainKind::custom;
  double band_delta = 0.5;
  SurfaceParametrization closed_form_surface;
  DomainMetadata metadata;
  std::string label;

  [[nodiscard]] bool contains(const Vector& x) const { return G.value(x) < 0.0; }
  [[nodiscard]] bool in_band(const Vector& x) const { return std::abs(G.value(x)) < band_delta; }
  [[nodiscard]] bool has_closed_form_surface() const noexcept { return static_cast<bool>(closed_form_surface); }
};

/// O = {h^ > 0} with G = -h^, h normalized to |h|_H = 1. `hhat` holds the
/// Cameron-Martin coordinates <h, v_k>_H before normalization.
[[nodiscard]] LevelSetDomain make_halfspace(const GaussianSpace& space, const Vector& hhat);
/// O = {|x - center| < r}, G = |x - center|^2 - r^2.
[[nodiscard]] LevelSetDomain make_ball(const GaussianSpace& space, double radius);
[[nodiscard]] LevelSetDomain make_ball(const GaussianSpace& space, double radius, const Vector& center);
/// O = {sum alpha_k x_k^2 < r^2}.
[[nodiscard]] LevelSetDomain make_ellipsoid(const GaussianSpace& space, const EllipsoidSpec& spec);
/// O = {h^(x) < F(y)}: region below the graph of F over Y, h = v_{h_index}.
[[nodiscard]] LevelSetDomain make_graph_region(const GaussianSpace& space, std::size_t h_index, const ScalarField& F);
/// Arbitrary smooth G without a closed-form surface.
[[nodiscard]] LevelSetDomain make_custom(const ScalarField& G, double band_delta, std::string label);

/// Splits eigen coordinates into (t, y) with t = v^_h(x) and y the remaining
/// coordinates in order; `join` is the inverse.
[[nodiscard]] Vector drop_coordinate(const Vector& x, std::size_t index);
[[nodiscard]] Vector insert_coordinate(const Vector& y, std::size_t index, double value);

struct DomainSamples {
  Matrix points;  ///< dim x count, all inside O
  double acceptance_rate = 0.0;
  std::size_t proposals = 0;
};

/// Raised when rejection sampling cannot collect enough points.
class AcceptanceStarvation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kRejectionProposalCap = 1'000'000'000;
inline constexpr double kMinAcceptanceRate = 1e-4;

/// i.i.d. samples of mu conditioned on O by rejection from mu. Proposal i uses
/// CounterRng(state, i), so the output is a pure function of the inputs.
[[nodiscard]] DomainSamples sample_domain(const LevelSetDomain& domain, const GaussianSpace& space,
                                          const SamplerState& state, std::size_t count,
                                          std::size_t proposal_cap = kRejectionProposalCap);

struct MassIdentity {
  Estimate lhs;  ///< mu(E_r)
  Estimate rhs;  ///< mu~(B(0, r)), mu~ = N(0, diag(lambda_k alpha_k))
  [[nodiscard]] double combined_error() const;
  [[nodiscard]] bool agrees(double sigmas = 3.0) const;
};

/// Monte Carlo check that the ellipsoid E_r has the same mass under mu as the
/// ball of radius r under the rescaled measure; independent substreams.
[[nodiscard]] MassIdentity ellipsoid_mass_identity(const GaussianSpace& space, const EllipsoidSpec& spec,
                                                   const SamplerState& state, std::size_t count, unsigned workers = 1);

/// sum_k lambda_k alpha_k, finite for every truncation.
[[nodiscard]] double trace_weighted_alpha_sum(const GaussianSpace& space, const EllipsoidSpec& spec);

enum class DirichletCovariance {
  half_inverse,         ///< Q = A^{-1} / 2, lambda_k = 1 / (2 pi^2 k^2)
  half_inverse_square,  ///< Q = A^{-2} / 2, lambda_k = 1 / (2 pi^4 k^4)
};

/// n-dimensional truncation of the Dirichlet Laplacian covariance on (0, 1).
[[nodiscard]] GaussianSpace dirichlet_laplacian_space(DirichletCovariance covariance, std::size_t n);
/// alpha_k = (pi k)^{4 beta}: the D(A^beta) ball weights.
[[nodiscard]] EllipsoidSpec dirichlet_ball_spec(std::size_t n, double beta, double radius);

struct NondegeneracyReport {
  double hit_rate = 0.0;             ///< mu(O) estimate
  double band_fraction = 0.0;        ///< mu(O_delta) estimate
  double min_h_gradient = 0.0;       ///< min |D_H G| over band samples
  double mean_inverse_q2_half = 0.0; ///< mean of |D_H G|^-2 over band, first half
  double mean_inverse_q2_full = 0.0;
  double mean_inverse_q4_half = 0.0;
  double mean_inverse_q4_full = 0.0;
  [[nodiscard]] bool ok() const;
};

/// Empirical version of the nondegeneracy hypothesis on O_delta: positive
/// mass, no vanishing H-gradient in the band, and |D_H G|^{-q} averages (q = 2,
/// 4) stable under doubling the sample size.
[[nodiscard]] NondegeneracyReport check_nondegeneracy(const LevelSetDomain& domain, const GaussianSpace& space,
                                                      const SamplerState& state, std::size_t count,
                                                      unsigned workers = 1);

}  // namespace gausstrace
