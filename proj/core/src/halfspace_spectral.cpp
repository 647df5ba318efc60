#include "gausstrace/halfspace_spectral.hpp"

#include "gausstrace/domains.hpp"
#include "gausstrace/gauss_core.hpp"
#include "gausstrace/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace gausstrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Local exponents within this margin of -1 are treated as non-integrable.
constexpr double kExponentMargin = 0.05;
constexpr std::size_t kLpNodeBudget = 200'000;
constexpr std::size_t kLpPanels = 400;
constexpr std::size_t kLpPanelOrder = 4;
constexpr double kLpHalfWidth = 10.0;

void require_p(double p, const char* where) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument(std::string(where) + ": p must be finite and > 1");
}

void require_y_dim(const SplitSpace& split, const HermiteExpansion& f, const char* where) {
  if (f.dim() != split.y_dim()) throw std::invalid_argument(std::string(where) + ": expansion dimension != dim Y");
}

int effective_degree(const HermiteExpansion& f) {
  int d = 0;
  for (const auto& [alpha, c] : f.coefficients())
    if (c != 0.0) d = std::max(d, total_degree(alpha));
  return d;
}

// Integral over (0, inf) of g on a log grid, Simpson in log t, with the mass
// outside [lower, upper] taken from the local power law at each end.
double log_grid_integral(const std::function<double(double)>& g, const TimeGrid& grid) {
  if (!(grid.lower > 0.0) || !(grid.upper > grid.lower) || grid.points_per_decade < 2)
    throw std::invalid_argument("TimeGrid: need 0 < lower < upper and points_per_decade >= 2");
  const double a = std::log(grid.lower);
  const double b = std::log(grid.upper);
  const double decades = (b - a) / std::log(10.0);
  auto intervals = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(grid.points_per_decade)));
  intervals = std::max<std::size_t>(intervals + (intervals % 2), 4);
  const double du = (b - a) / static_cast<double>(intervals);

  std::vector<double> t(intervals + 1), v(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    t[i] = std::exp(a + du * static_cast<double>(i));
    v[i] = g(t[i]);
    if (!std::isfinite(v[i])) return kInf;
  }
  double body = v.front() * t.front() + v.back() * t.back();
  for (std::size_t i = 1; i < intervals; ++i) body += (i % 2 ? 4.0 : 2.0) * v[i] * t[i];
  body *= du / 3.0;

  // Exponents from an eighth of a decade at each end.
  const std::size_t span = std::max<std::size_t>(1, std::min(grid.points_per_decade / 8, intervals / 2));
  auto exponent = [&](std::size_t i, std::size_t j) { return std::log(v[j] / v[i]) / std::log(t[j] / t[i]); };

  double head = 0.0;
  if (v[0] > 0.0 && v[span] > 0.0) {
    const double s = exponent(0, span);
    if (s <= -1.0 + kExponentMargin) return kInf;
    head = v[0] * t[0] / (s + 1.0);
  }
  double tail = 0.0;
  if (v[intervals] > 0.0 && v[intervals - span] > 0.0) {
    const double s = exponent(intervals - span, intervals);
    if (s >= -1.0 - kExponentMargin) return kInf;
    tail = v[intervals] * t[intervals] / (-s - 1.0);
  }
  return head + body + tail;
}

double mode_weight(TraceMode mode, double p, double t) {
  switch (mode) {
    case TraceMode::interp1: return std::pow(t, -(p + 1.0) / 2.0);
    case TraceMode::interp2: return std::pow(t, (p - 1.0) / 2.0);
    case TraceMode::interp3: return std::pow(t, (p - 3.0) / 2.0);
  }
  return 0.0;
}

// Spectral multiplier of the operator inside the norm, on the degree-k chaos.
double mode_multiplier(TraceMode mode, double t, double k) {
  switch (mode) {
    case TraceMode::interp1: return std::expm1(-k * t);
    case TraceMode::interp2: return -k * std::exp(-k * t);
    case TraceMode::interp3: return -k / (t + k);
  }
  return 0.0;
}

// Coefficients of an expansion with the basis tabulated on a tensor
// Gauss-Hermite rule of Y, so that L^p norms of spectral multipliers of f
// cost one matrix-vector product.
struct ModalTable {
  std::vector<double> degree;
  Vector coefficient;
  Matrix basis;  // nodes x modes
  Vector weight;

  ModalTable(const SplitSpace& split, const HermiteExpansion& f, bool tabulate) {
    for (const auto& [alpha, c] : f.coefficients()) {
      if (c == 0.0) continue;
      degree.push_back(static_cast<double>(total_degree(alpha)));
    }
    coefficient.resize(static_cast<Eigen::Index>(degree.size()));
    Eigen::Index m = 0;
    for (const auto& [alpha, c] : f.coefficients())
      if (c != 0.0) coefficient(m++) = c;
    if (!tabulate || degree.empty()) return;

    const std::size_t dim = split.y_dim();
    const int max_degree = effective_degree(f);
    auto order = static_cast<std::size_t>(std::clamp(2 * max_degree + 24, 24, 200));
    const auto cap = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(kLpNodeBudget), 1.0 / static_cast<double>(dim))));
    order = std::max<std::size_t>(std::min(order, cap), 2);

    std::vector<Vector> nodes;
    std::vector<double> w;
    if (dim == 1) {
      // |f|^p has kinks at the zeros of f, where Gauss-Hermite converges
      // slowly; composite Gauss-Legendre panels against the normal density
      // keep the error at O(h^{p+1}) per kink.
      const QuadratureRule& gl = gauss_legendre(kLpPanelOrder);
      const double h = 2.0 * kLpHalfWidth / static_cast<double>(kLpPanels);
      const double sd = split.Y.sqrt_eigenvalues()(0);
      for (std::size_t panel = 0; panel < kLpPanels; ++panel) {
        const double mid = -kLpHalfWidth + h * (static_cast<double>(panel) + 0.5);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
          const double u = mid + 0.5 * h * gl.nodes[q];
          nodes.push_back(Vector::Constant(1, sd * u));
          w.push_back(0.5 * h * gl.weights[q] * std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi));
        }
      }
    } else {
      for_each_tensor_node(split.Y, order, [&](const Vector& node, double wt) {
        nodes.push_back(node);
        w.push_back(wt);
      });
    }
    basis.resize(static_cast<Eigen::Index>(nodes.size()), m);
    weight = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    const Vector& s = split.Y.sqrt_eigenvalues();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::vector<std::vector<double>> h(dim);
      for (std::size_t k = 0; k < dim; ++k)
        h[k] = normalized_hermite_values(static_cast<std::size_t>(max_degree),
                                         nodes[i](static_cast<Eigen::Index>(k)) / s(static_cast<Eigen::Index>(k)));
      Eigen::Index j = 0;
      for (const auto& [alpha, c] : f.coefficients()) {
        if (c == 0.0) continue;
        double term = 1.0;
        for (std::size_t k = 0; k < dim; ++k) term *= h[k][static_cast<std::size_t>(alpha[k])];
        basis(static_cast<Eigen::Index>(i), j++) = term;
      }
    }
  }

  // ||sum_alpha c_alpha m(|alpha|) H_alpha||_p^p.
  [[nodiscard]] double norm_p(double p, const std::function<double(double)>& multiplier) const {
    Vector scaled(coefficient.size());
    for (Eigen::Index j = 0; j < coefficient.size(); ++j)
      scaled(j) = coefficient(j) * multiplier(degree[static_cast<std::size_t>(j)]);
    if (p == 2.0) return scaled.squaredNorm();
    if (scaled.size() == 0) return 0.0;
    const Vector g = basis * scaled;
    return weight.dot(g.array().abs().pow(p).matrix());
  }
};

// Value, t-derivative and Y-gradient of e^{t^2 L_Y} f at y.
struct ExtensionJet {
  double value = 0.0;
  double dt = 0.0;
  Vector grad_y;
};

ExtensionJet extension_jet(const SplitSpace& split, const HermiteExpansion& f, double t, const Vector& y) {
  const std::size_t dim = split.y_dim();
  const Vector& s = split.Y.sqrt_eigenvalues();
  const auto top = static_cast<std::size_t>(std::max(f.max_degree(), 1));
  std::vector<std::vector<double>> h(dim);
  for (std::size_t k = 0; k < dim; ++k)
    h[k] = normalized_hermite_values(top, y(static_cast<Eigen::Index>(k)) / s(static_cast<Eigen::Index>(k)));

  ExtensionJet jet;
  jet.grad_y = Vector::Zero(static_cast<Eigen::Index>(dim));
  const double t2 = t * t;
  for (const auto& [alpha, c] : f.coefficients()) {
    if (c == 0.0) continue;
    const double k = static_cast<double>(total_degree(alpha));
    const double e = c * std::exp(-k * t2);
    double H = 1.0;
    for (std::size_t a = 0; a < dim; ++a) H *= h[a][static_cast<std::size_t>(alpha[a])];
    jet.value += e * H;
    jet.dt += -2.0 * t * k * e * H;
    for (std::size_t j = 0; j < dim; ++j) {
      const int aj = alpha[j];
      if (aj == 0) continue;
      double term = e * std::sqrt(static_cast<double>(aj)) * h[j][static_cast<std::size_t>(aj - 1)] /
                    s(static_cast<Eigen::Index>(j));
      for (std::size_t a = 0; a < dim; ++a)
        if (a != j) term *= h[a][static_cast<std::size_t>(alpha[a])];
      jet.grad_y(static_cast<Eigen::Index>(j)) += term;
    }
  }
  return jet;
}

}  // namespace

std::pair<double, Vector> SplitSpace::to_split(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != parent.dim()) throw std::invalid_argument("SplitSpace::to_split: bad dimension");
  const auto h = static_cast<Eigen::Index>(h_index);
  return {x(h) / parent.sqrt_eigenvalues()(h), drop_coordinate(x, h_index)};
}

Vector SplitSpace::from_split(double t, const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != Y.dim()) throw std::invalid_argument("SplitSpace::from_split: bad dimension");
  return insert_coordinate(y, h_index, t * parent.sqrt_eigenvalues()(static_cast<Eigen::Index>(h_index)));
}

SplitSpace split(const GaussianSpace& space, std::size_t h_index) {
  if (h_index >= space.dim()) throw std::out_of_range("split: h_index out of range");
  return SplitSpace{space, h_index, space.drop_axis(h_index)};
}

SplitCovarianceCheck split_covariance_check(const SplitSpace& split, const SamplerState& state, std::size_t count) {
  if (count < 2) throw std::invalid_argument("split_covariance_check: need at least two samples");
  const Matrix pts = sample_gaussian(split.parent, state, count);
  const std::size_t m = split.y_dim();
  double tt = 0.0;
  Vector ty = Vector::Zero(static_cast<Eigen::Index>(m));
  double tsum = 0.0;
  Vector ysum = Vector::Zero(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const auto [t, y] = split.to_split(pts.col(i));
    const Vector z = y.cwiseQuotient(split.Y.sqrt_eigenvalues());
    tsum += t;
    ysum += z;
    tt += t * t;
    ty += t * z;
  }
  const double n = static_cast<double>(count);
  SplitCovarianceCheck out;
  out.t_variance = tt / n - (tsum / n) * (tsum / n);
  out.max_cross_covariance = (ty / n - (tsum / n) * (ysum / n)).cwiseAbs().maxCoeff();
  out.tolerance = 4.0 / std::sqrt(n);
  return out;
}

const char* to_string(TraceMode mode) noexcept {
  switch (mode) {
    case TraceMode::interp1: return "interp1";
    case TraceMode::interp2: return "interp2";
    case TraceMode::interp3: return "interp3";
  }
  return "unknown";
}

TimeGrid default_time_grid(TraceMode mode) {
  if (mode == TraceMode::interp3) return TimeGrid{1e-6, 1e6, 64};
  return TimeGrid{1e-6, 50.0, 64};
}

double tp_seminorm(const SplitSpace& split, const HermiteExpansion& f, double p, TraceMode mode,
                   const TimeGrid& grid) {
  require_p(p, "tp_seminorm");
  require_y_dim(split, f, "tp_seminorm");
  const ModalTable table(split, f, p != 2.0);
  const double integral = log_grid_integral(
      [&](double t) {
        return mode_weight(mode, p, t) * table.norm_p(p, [&](double k) { return mode_multiplier(mode, t, k); });
      },
      grid);
  return std::isfinite(integral) ? std::pow(std::max(integral, 0.0), 1.0 / p) : kInf;
}

double tp_seminorm(const SplitSpace& split, const HermiteExpansion& f, double p, TraceMode mode) {
  return tp_seminorm(split, f, p, mode, default_time_grid(mode));
}

double tp_seminorm(const SplitSpace& split, const ScalarField& f, double p, TraceMode mode, const TimeGrid& grid,
                   std::size_t quad_order) {
  require_p(p, "tp_seminorm");
  if (mode == TraceMode::interp3)
    throw std::invalid_argument("tp_seminorm: the resolvent form needs a Hermite expansion");
  if (mode == TraceMode::interp2 && (!f.gradient || !f.has_hessian()))
    throw std::invalid_argument("tp_seminorm: the generator form needs gradient and Hessian of f");

  std::vector<Vector> nodes;
  std::vector<double> w;
  for_each_tensor_node(split.Y, quad_order, [&](const Vector& node, double wt) {
    nodes.push_back(node);
    w.push_back(wt);
  });
  std::vector<double> f0(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) f0[i] = f.value(nodes[i]);

  const double integral = log_grid_integral(
      [&](double t) {
        double acc = 0.0;
        if (mode == TraceMode::interp1) {
          for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += w[i] * std::pow(std::abs(mehler_apply(split.Y, f, t, nodes[i], quad_order) - f0[i]), p);
        } else {
          const ScalarField Tf = mehler_field(split.Y, f, t, quad_order);
          for (std::size_t i = 0; i < nodes.size(); ++i) acc += w[i] * std::pow(std::abs(ou_apply(split.Y, Tf, nodes[i])), p);
        }
        return mode_weight(mode, p, t) * acc;
      },
      grid);
  return std::isfinite(integral) ? std::pow(std::max(integral, 0.0), 1.0 / p) : kInf;
}

double lp_norm(const SplitSpace& split, const HermiteExpansion& f, double p) {
  require_p(p, "lp_norm");
  require_y_dim(split, f, "lp_norm");
  if (p == 2.0) return std::sqrt(f.l2_norm_squared());
  const ModalTable table(split, f, true);
  return std::pow(table.norm_p(p, [](double) { return 1.0; }), 1.0 / p);
}

double tp_norm(const SplitSpace& split, const HermiteExpansion& f, double p, TraceMode mode) {
  return lp_norm(split, f, p) + tp_seminorm(split, f, p, mode);
}

double t2_norm_spectral(const SplitSpace& split, const HermiteExpansion& f) {
  require_y_dim(split, f, "t2_norm_spectral");
  double total = f.l2_norm_squared();
  for (int k = 1; k <= f.max_degree(); ++k) total += std::sqrt(static_cast<double>(k)) * f.chaos_norm_squared(k);
  return std::sqrt(total);
}

TraceNormReport trace_norm_report(const SplitSpace& split, const HermiteExpansion& f, double p, std::string label) {
  TraceNormReport r;
  r.f_label = std::move(label);
  r.degree = effective_degree(f);
  r.p = p;
  r.norms[0] = tp_norm(split, f, p, TraceMode::interp1);
  r.norms[1] = tp_norm(split, f, p, TraceMode::interp2);
  r.norms[2] = tp_norm(split, f, p, TraceMode::interp3);
  r.norms[3] = p == 2.0 ? t2_norm_spectral(split, f) : std::numeric_limits<double>::quiet_NaN();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) r.ratios[idx++] = r.norms[i] / r.norms[j];
  double lo = kInf, hi = 0.0;
  for (double v : r.norms) {
    if (!std::isfinite(v) || v <= 0.0) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.ratio_max = hi > 0.0 ? hi / lo : std::numeric_limits<double>::quiet_NaN();
  return r;
}

namespace {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

double ratio_degree_trend(const std::vector<TraceNormReport>& reports) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      std::vector<double> lx, ly;
      for (const auto& r : reports) {
        const double q = r.norms[i] / r.norms[j];
        if (r.degree < 1 || !std::isfinite(q) || q <= 0.0) continue;
        lx.push_back(std::log(static_cast<double>(r.degree)));
        ly.push_back(std::log(q));
      }
      worst = std::max(worst, std::abs(least_squares_slope(lx, ly)));
    }
  return worst;
}

std::vector<std::pair<std::string, HermiteExpansion>> hermite_family(const SplitSpace& split, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("hermite_family: max_degree must be >= 0");
  std::vector<std::pair<std::string, HermiteExpansion>> out;
  for (int k = 0; k <= max_degree; ++k)
    out.emplace_back("h_" + std::to_string(k), HermiteExpansion::mode(split.y_dim(), 0, k));
  return out;
}

std::vector<std::pair<std::string, HermiteExpansion>> random_combinations(const SplitSpace& split, int max_degree,
                                                                           std::size_t modes, std::size_t count,
                                                                           const SamplerState& state) {
  std::vector<MultiIndex> pool = multi_indices_up_to(split.y_dim(), max_degree);
  pool.erase(pool.begin());  // constant mode
  if (modes == 0 || modes > pool.size()) throw std::invalid_argument("random_combinations: bad mode count");
  std::vector<std::pair<std::string, HermiteExpansion>> out;
  for (std::size_t c = 0; c < count; ++c) {
    CounterRng rng(state, c);
    std::vector<MultiIndex> chosen = pool;
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < modes; ++i) {
      const auto span = static_cast<double>(chosen.size() - i);
      const std::size_t j = i + std::min(static_cast<std::size_t>(rng.uniform() * span), chosen.size() - i - 1);
      std::swap(chosen[i], chosen[j]);
    }
    HermiteExpansion f(split.y_dim(), max_degree);
    for (std::size_t i = 0; i < modes; ++i) f.set(chosen[i], rng.normal());
    out.emplace_back("mix_" + std::to_string(c), std::move(f));
  }
  return out;
}

double extension_apply(const SplitSpace& split, const HermiteExpansion& f, double t, const Vector& y) {
  if (t < 0.0) throw std::invalid_argument("extension_apply: t must be >= 0");
  require_y_dim(split, f, "extension_apply");
  return extension_jet(split, f, t, y).value;
}

double extension_apply(const SplitSpace& split, const ScalarField& f, double t, const Vector& y,
                       std::size_t quad_order) {
  if (t < 0.0) throw std::invalid_argument("extension_apply: t must be >= 0");
  return mehler_apply(split.Y, f, t * t, y, quad_order);
}

ScalarField extension_field(const SplitSpace& split, const HermiteExpansion& f) {
  require_y_dim(split, f, "extension_field");
  ScalarField out;
  out.value = [split, f](const Vector& x) {
    const auto [t, y] = split.to_split(x);
    return extension_jet(split, f, t, y).value;
  };
  out.gradient = [split, f](const Vector& x) {
    const auto [t, y] = split.to_split(x);
    const ExtensionJet jet = extension_jet(split, f, t, y);
    const double s = split.parent.sqrt_eigenvalues()(static_cast<Eigen::Index>(split.h_index));
    return insert_coordinate(jet.grad_y, split.h_index, jet.dt / s);
  };
  out.label = "Ef";
  return out;
}

ExtensionBoundReport verify_extension_bound(const SplitSpace& split,
                                            const std::vector<std::pair<std::string, HermiteExpansion>>& family,
                                            const SamplerState& state, std::size_t mc_count, unsigned workers) {
  int top = 0;
  for (const auto& [label, f] : family) {
    require_y_dim(split, f, "verify_extension_bound");
    top = std::max(top, effective_degree(f));
  }
  const Vector& lambda_y = split.Y.eigenvalues();
  auto squares = [&](const HermiteExpansion& f, double t, const Vector& y) {
    const ExtensionJet jet = extension_jet(split, f, t, y);
    return std::pair{jet.value * jet.value, jet.dt * jet.dt + lambda_y.dot(jet.grad_y.cwiseAbs2())};
  };

  // t in (0, 10) against the standard normal density; the mass beyond is
  // below 1e-22.
  constexpr double kTMax = 10.0;
  const QuadratureRule& gl = gauss_legendre(128);
  std::vector<Vector> ynodes;
  std::vector<double> yweights;
  for_each_tensor_node(split.Y, static_cast<std::size_t>(top + 8), [&](const Vector& node, double w) {
    ynodes.push_back(node);
    yweights.push_back(w);
  });
  std::vector<std::pair<double, double>> quad(family.size(), {0.0, 0.0});
  for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
    const double t = 0.5 * kTMax * (gl.nodes[a] + 1.0);
    const double wt = 0.5 * kTMax * gl.weights[a] * std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t b = 0; b < ynodes.size(); ++b)
      for (std::size_t i = 0; i < family.size(); ++i) {
        const auto [v2, g2] = squares(family[i].second, t, ynodes[b]);
        quad[i].first += wt * yweights[b] * v2;
        quad[i].second += wt * yweights[b] * g2;
      }
  }

  std::vector<Estimate> mc;
  if (mc_count > 0) {
    const SampleSet samples(split.parent, state, mc_count, workers);
    mc = integrate(samples, 2 * family.size(), [&](const Vector& x, std::span<double> out) {
      const auto [t, y] = split.to_split(x);
      std::fill(out.begin(), out.end(), 0.0);
      if (t <= 0.0) return;
      for (std::size_t i = 0; i < family.size(); ++i) std::tie(out[2 * i], out[2 * i + 1]) = squares(family[i].second, t, y);
    });
  }

  ExtensionBoundReport report;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < family.size(); ++i) {
    ExtensionBoundRow row;
    row.label = family[i].first;
    row.degree = effective_degree(family[i].second);
    row.l2_norm = std::sqrt(quad[i].first);
    row.grad_norm = std::sqrt(quad[i].second);
    row.w12_norm = row.l2_norm + row.grad_norm;
    row.t2_norm = t2_norm_spectral(split, family[i].second);
    row.ratio = row.t2_norm > 0.0 ? row.w12_norm / row.t2_norm : 0.0;
    if (!mc.empty()) {
      auto root = [](const Estimate& sq) {
        const double r = std::sqrt(std::max(sq.mean, 0.0));
        return Estimate{r, r > 0.0 ? sq.std_error / (2.0 * r) : std::sqrt(sq.std_error)};
      };
      const Estimate l2 = root(mc[2 * i]), grad = root(mc[2 * i + 1]);
      row.mc_w12 = Estimate{l2.mean + grad.mean, std::hypot(l2.std_error, grad.std_error)};
    }
    report.max_ratio = std::max(report.max_ratio, row.ratio);
    if (row.degree >= 1 && row.ratio > 0.0) {
      lx.push_back(std::log(static_cast<double>(row.degree)));
      ly.push_back(std::log(row.ratio));
    }
    report.rows.push_back(std::move(row));
  }
  report.slope = least_squares_slope(lx, ly);
  return report;
}

ScalarField trace_of(const SplitSpace& split, const ScalarField& u) {
  return fields::from_value([split, u](const Vector& y) { return u.value(split.from_split(0.0, y)); }, "Tr(" + u.label + ")");
}

double projection_apply(const SplitSpace& split, const ScalarField& u, const Vector& x, std::size_t quad_order) {
  const auto [t, y] = split.to_split(x);
  return u.value(x) - mehler_apply(split.Y, trace_of(split, u), t * t, y, quad_order);
}

ScalarField projection_field(const SplitSpace& split, const ScalarField& u, std::size_t quad_order) {
  return fields::from_value([split, u, quad_order](const Vector& x) { return projection_apply(split, u, x, quad_order); },
                    "P(" + u.label + ")");
}

}  // namespace gausstrace
