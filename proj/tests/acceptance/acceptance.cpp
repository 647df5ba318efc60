// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "gausstrace/csv.hpp"
#include "gausstrace/domains.hpp"
#include "gausstrace/gauss_core.hpp"
#include "gausstrace/halfspace_spectral.hpp"
#include "gausstrace/surface_measure.hpp"
#include "gausstrace/trace_identities.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gausstrace;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// The full suite is needed by two criteria; run it once and keep the tables.
struct SuiteRun {
  std::vector<IdentityReport> reports;
  double seconds = 0.0;
};

const SuiteConfig kSuiteConfig{{42, 0}, 1'000'000, 1, {}};

const SuiteRun& first_suite_run() {
  static const SuiteRun run = [] {
    const auto t0 = Clock::now();
    SuiteRun r;
    r.reports = run_identity_suite(kSuiteConfig);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

// 1. Sphere surface mass by quadrature and by the partitraccia2 Monte Carlo route.
Outcome sphere_two_routes() {
  const auto t0 = Clock::now();
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const LevelSetDomain ball = make_ball(space, 1.0);
  const SampleSet samples(space, {42, 0}, 1'000'000);
  const IdentityReport r =
      verify_power_identity(space, ball, fields::constant(2, 1.0), 2.0, PowerVariant::partitraccia2, samples);
  const double secs = seconds_since(t0);
  const double exact = std::exp(-0.5);
  const double quad_err = std::abs(r.lhs - exact);
  const double mc_dev = std::abs(r.rhs - exact);
  const bool pass = quad_err <= 1e-3 && mc_dev <= 3.0 * r.rhs_err && secs <= 10.0;
  return {pass, fmt("quadrature %.8f (|err| %.1e <= 1e-3), MC %.6f +- %.6f (|dev| %.2e <= 3 SE), %.2f s <= 10 s",
                    r.lhs, quad_err, r.rhs, r.rhs_err, mc_dev, secs)};
}

// 2. Integration-by-parts suite at 10^6 samples.
Outcome ibp_suite() {
  const SuiteRun& run = first_suite_run();
  std::size_t failed = 0;
  std::set<std::string> ids, domains;
  for (const IdentityReport& r : run.reports) {
    if (!r.pass) ++failed;
    ids.insert(to_string(r.id));
    domains.insert(r.domain);
  }
  const std::set<std::string> required{"parti", "partitraccia", "partitraccia2", "campi", "particlassica", "partial_h"};
  const bool covered = std::includes(ids.begin(), ids.end(), required.begin(), required.end());
  const bool pass = failed == 0 && covered && domains.size() == 6 && run.seconds <= 300.0;
  return {pass, fmt("%zu identities over %zu domains, %zu failed, all six forms present: %s, %.1f s <= 300 s",
                    run.reports.size(), domains.size(), failed, covered ? "yes" : "no", run.seconds)};
}

// 3. Density calculus on the line, G(x) = x, plus the L1 bound on every suite member.
Outcome density_calculus() {
  const GaussianSpace space = GaussianSpace::isotropic(1);
  const LevelSetDomain line = make_halfspace(space, vec({-1.0}));
  const SampleSet samples(space, {42, 3}, 1'000'000);
  const double b = silverman_bandwidth(line, samples);
  const std::vector<double> grid = band_grid(line.band_delta, 41);

  struct Case {
    const char* name;
    ScalarField phi;
    std::function<double(double, double)> moment;  // E phi(S), S ~ N(m, v)
  };
  const std::vector<Case> cases{
      {"1", fields::constant(1, 1.0), [](double, double) { return 1.0; }},
      {"x", fields::coordinate(1, 0), [](double m, double) { return m; }},
      {"x^2", fields::coordinate_square(1, 0), [](double m, double v) { return m * m + v; }},
  };

  double worst = 0.0;
  std::string worst_case;
  const auto note = [&](double z, const char* name) {
    if (z > worst) {
      worst = z;
      worst_case = name;
    }
  };
  for (const Case& c : cases) {
    const auto q = [&](double xi) { return oracle::smoothed_density(xi, b, c.moment); };
    const auto dq = [&](double xi) { return (q(xi + 1e-5) - q(xi - 1e-5)) / 2e-5; };
    const QphiDerivativeReport rep = qphi_derivative_check(space, line, c.phi, samples, grid, b);
    const auto& g = rep.phi_curve.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
      // KDE of q_phi and of q_{phi_1} against the kernel-smoothed closed forms.
      note(std::abs(rep.phi_curve.values[i] - q(g[i])) / rep.phi_curve.std_errors[i], c.name);
      note(std::abs(rep.phi1_curve.values[i] - dq(g[i])) / rep.phi1_curve.std_errors[i], c.name);
    }
    for (const DerivativeCheckRow& row : rep.rows) {
      const auto it = std::find(g.begin(), g.end(), row.xi);
      if (it == g.begin() || it == g.end() || it + 1 == g.end()) continue;
      const std::size_t i = static_cast<std::size_t>(it - g.begin());
      // Central difference of the measured q_phi against the same difference
      // of the closed form; error bound by Minkowski over the two KDE errors.
      const double oracle_fd = (q(g[i + 1]) - q(g[i - 1])) / (g[i + 1] - g[i - 1]);
      const double combined = row.std_error + rep.phi1_curve.std_errors[i];
      note(std::abs(row.fd_derivative - oracle_fd) / combined, c.name);
    }
  }

  // L1 bound on every suite domain and test function.
  std::size_t l1_checks = 0, l1_failed = 0;
  double l1_worst = 0.0;
  std::uint32_t stream = 0;
  for (const SuiteDomain& d : default_suite_domains()) {
    const SampleSet s(d.space, SamplerState{42, 11}.substream(stream++), 1'000'000);
    const double bw = silverman_bandwidth(d.domain, s);
    const std::vector<double> dgrid = band_grid(d.domain.band_delta, 41);
    for (const ScalarField& phi : default_test_functions(d.space.dim())) {
      const DensityCurve curve = qphi_estimate(d.domain, phi, s, dgrid, bw);
      DensityCurve errs = curve;
      errs.values = curve.std_errors;
      const Estimate mass = band_abs_mass(d.domain, phi, s);
      const double bound = mass.mean + 3.0 * std::hypot(mass.std_error, trapezoid_abs(errs));
      const double lhs = trapezoid_abs(curve);
      ++l1_checks;
      if (lhs > bound) ++l1_failed;
      l1_worst = std::max(l1_worst, lhs / bound);
    }
  }
  const bool pass = worst <= 5.0 && l1_failed == 0;
  return {pass, fmt("bandwidth %.4f, max |measured - closed form| / KDE error %.2f <= 5%s%s; L1 bound %zu/%zu hold "
                    "(max ratio %.3f)",
                    b, worst, worst_case.empty() ? "" : " at phi = ", worst_case.c_str(), l1_checks - l1_failed,
                    l1_checks, l1_worst)};
}

// 4. Mehler quadrature against the spectral action; Hermite modes.
Outcome spectral_ou() {
  double worst_poly = 0.0;
  CounterRng rng({42, 4}, 0);
  const std::vector<GaussianSpace> spaces{GaussianSpace::isotropic(1), GaussianSpace::diagonal(vec({2.0, 0.5})),
                                          GaussianSpace::diagonal(vec({1.0, 0.3, 0.1}))};
  for (const GaussianSpace& space : spaces) {
    const std::size_t n = space.dim();
    for (int deg : {3, 7, 10}) {
      HermiteExpansion e(n, deg);
      for (const MultiIndex& a : multi_indices_up_to(n, deg)) e.set(a, rng.normal() / std::sqrt(1.0 + total_degree(a)));
      const ScalarField f = e.as_field(space);
      for (double t : {0.01, 0.3, 1.0, 3.0}) {
        for (int p = 0; p < 5; ++p) {
          Vector x(static_cast<Eigen::Index>(n));
          for (std::size_t k = 0; k < n; ++k) x(Eigen::Index(k)) = space.sqrt_eigenvalues()(Eigen::Index(k)) * rng.normal();
          const double m = mehler_apply(space, f, t, x, static_cast<std::size_t>(deg) + 1);
          worst_poly = std::max(worst_poly, std::abs(m - e.ou_semigroup(t).evaluate(space, x)));
        }
      }
    }
  }
  double worst_mode = 0.0;
  const GaussianSpace line = GaussianSpace::isotropic(1);
  for (int k = 0; k <= 10; ++k) {
    const ScalarField h = HermiteExpansion::mode(1, 0, k).as_field(line);
    for (double t : {0.001, 0.1, 1.0, 5.0}) {
      for (double x : {-3.0, -1.0, 0.2, 1.7, 2.9}) {
        const double ref = std::exp(-k * t) * oracle::hermite_normalized(unsigned(k), x);
        const double got = mehler_apply(line, h, t, vec({x}), std::size_t(k) + 1);
        worst_mode = std::max(worst_mode, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
      }
    }
  }
  const bool pass = worst_poly <= 1e-8 && worst_mode <= 1e-10;
  return {pass, fmt("max |Mehler - spectral| %.2e <= 1e-8 (degree <= 10, n = 1..3); max T(t)h_k error %.2e <= 1e-10",
                    worst_poly, worst_mode)};
}

// 5. The four trace-space characterizations on Hermite modes.
Outcome trace_norms() {
  const SplitSpace s = split(GaussianSpace::isotropic(2), 0);
  std::vector<TraceNormReport> reports;
  double ratio_max = 0.0;
  for (const auto& [label, f] : hermite_family(s, 12)) {
    reports.push_back(trace_norm_report(s, f, 2.0, label));
    ratio_max = std::max(ratio_max, reports.back().ratio_max);
  }
  const double trend = ratio_degree_trend(reports);
  const double t2 = t2_norm_spectral(s, HermiteExpansion::mode(1, 0, 3));
  const double t2_err = std::abs(t2 - std::sqrt(1.0 + std::sqrt(3.0)));
  const bool pass = ratio_max <= 50.0 && std::abs(trend) <= 0.1 && t2_err <= 1e-12;
  return {pass, fmt("max pairwise ratio %.4f <= 50, |degree slope| %.4f <= 0.1, |t2(h_3) - (1+sqrt3)^(1/2)| %.1e <= "
                    "1e-12",
                    ratio_max, std::abs(trend), t2_err)};
}

// 6. Extension operator: trace, bound table, projection.
Outcome extension_operator() {
  const SplitSpace s = split(GaussianSpace::isotropic(2), 0);
  auto family = hermite_family(s, 12);
  for (auto& m : random_combinations(s, 12, 5, 5, {42, 6})) family.push_back(std::move(m));

  CounterRng rng({42, 6}, 1);
  double trace_err = 0.0;
  for (const auto& [label, f] : family) {
    const ScalarField Ef = extension_field(s, f);
    const ScalarField field = f.as_field(s.Y);
    for (int i = 0; i < 16; ++i) {
      const Vector y = vec({2.0 * rng.normal()});
      const double fy = f.evaluate(s.Y, y);
      trace_err = std::max(trace_err, std::abs(Ef(s.from_split(0.0, y)) - fy));
      trace_err = std::max(trace_err, std::abs(extension_apply(s, field, 0.0, y, 40) - fy));
    }
  }

  const ExtensionBoundReport rep = verify_extension_bound(s, hermite_family(s, 12), {42, 6}, 0);
  bool finite = true;
  double min_ratio = rep.rows.front().ratio;
  for (const ExtensionBoundRow& r : rep.rows) {
    finite = finite && std::isfinite(r.ratio) && r.ratio > 0.0;
    min_ratio = std::min(min_ratio, r.ratio);
  }

  // u with nonzero trace, its projection, and the projection applied twice.
  const ScalarField u = fields::from_value(
      [&](const Vector& x) {
        const auto [t, y] = s.to_split(x);
        return std::exp(-t) * (y(0) * y(0) - 1.0) + std::sin(y(0)) + t * y(0);
      },
      "u");
  const ScalarField Pu = projection_field(s, u);
  const ScalarField PPu = projection_field(s, Pu);
  const ScalarField trPu = trace_of(s, Pu);
  double idem = 0.0, zero = 0.0;
  for (int i = 0; i < 16; ++i) {
    const Vector y = vec({1.5 * rng.normal()});
    zero = std::max(zero, std::abs(trPu(y)));
    const Vector x = s.from_split(std::abs(rng.normal()), y);
    idem = std::max(idem, std::abs(PPu(x) - Pu(x)));
  }
  const bool pass = trace_err <= 1e-10 && finite && rep.bounded(0.1) && idem <= 1e-10 && zero <= 1e-10;
  return {pass, fmt("max |Tr(Ef) - f| %.1e <= 1e-10; ratios %.4f..%.4f, degree slope %.4f (no positive trend); "
                    "max |P(Pu) - Pu| %.1e, max |Tr Pu| %.1e <= 1e-10",
                    trace_err, min_ratio, rep.max_ratio, rep.slope, idem, zero)};
}

// 7. Ellipsoid mass identity for three configurations.
Outcome ellipsoid_mass() {
  struct Config {
    std::string name;
    GaussianSpace space;
    EllipsoidSpec spec;
  };
  const std::vector<Config> configs{
      {"Q=I, alpha=(1,1), r=1", GaussianSpace::isotropic(2), {vec({1.0, 1.0}), 1.0}},
      {"lambda=(4,1), alpha=(1,4), r=1", GaussianSpace::diagonal(vec({4.0, 1.0})), {vec({1.0, 4.0}), 1.0}},
      {"Dirichlet n=8, beta=1/4, r=0.6", dirichlet_laplacian_space(DirichletCovariance::half_inverse, 8),
       dirichlet_ball_spec(8, 0.25, 0.6)},
  };
  bool pass = true;
  std::ostringstream detail;
  std::uint32_t stream = 0;
  for (const Config& c : configs) {
    const MassIdentity m = ellipsoid_mass_identity(c.space, c.spec, SamplerState{42, 7}.substream(stream++), 1'000'000);
    const double dev = std::abs(m.lhs.mean - m.rhs.mean);
    pass = pass && m.agrees(3.0);
    detail << (stream > 1 ? "; " : "") << c.name << ": " << fmt("%.5f vs %.5f (%.2f SE)", m.lhs.mean, m.rhs.mean,
                                                             dev / m.combined_error());
  }
  return {pass, detail.str()};
}

// 8. Residual of (parti) against sample size over independent substreams.
Outcome convergence_law() {
  const GaussianSpace space = GaussianSpace::isotropic(2);
  const LevelSetDomain ball = make_ball(space, 1.0);
  const ScalarField phi = fields::coordinate_square(2, 0);
  const std::vector<std::size_t> sizes{10'000, 31'623, 100'000, 316'228, 1'000'000};
  const std::uint32_t replicates = 64;
  std::vector<double> ns, rms;
  for (std::size_t n : sizes) {
    double sq = 0.0;
    for (std::uint32_t r = 0; r < replicates; ++r) {
      const SampleSet s(space, SamplerState{42, 8}.substream(r), n);
      const IdentityReport rep = verify_parti(space, ball, phi, 0, s);
      sq += (rep.lhs - rep.rhs) * (rep.lhs - rep.rhs);
    }
    ns.push_back(double(n));
    rms.push_back(std::sqrt(sq / replicates));
  }
  // Least-squares slope of log rms on log n.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    mx += std::log(ns[i]);
    my += std::log(rms[i]);
  }
  mx /= double(ns.size());
  my /= double(ns.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sxy += (std::log(ns[i]) - mx) * (std::log(rms[i]) - my);
    sxx += (std::log(ns[i]) - mx) * (std::log(ns[i]) - mx);
  }
  const double slope = sxy / sxx;
  return {slope >= -0.6 && slope <= -0.4,
          fmt("parti on the unit disc, phi = x1^2, 64 substreams, N = 1e4..1e6: rms %.2e -> %.2e, slope %.4f in "
              "[-0.6, -0.4]",
              rms.front(), rms.back(), slope)};
}

// 9. Two suite runs with the same seed and worker count give identical CSV bytes.
Outcome reproducibility() {
  const std::string a = identity_table(first_suite_run().reports).str();
  const std::string b = identity_table(run_identity_suite(kSuiteConfig)).str();
  return {a == b && !a.empty(), fmt("%zu bytes, %s", a.size(), a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"sphere surface mass, two routes", sphere_two_routes},
      {"integration-by-parts suite", ibp_suite},
      {"density calculus", density_calculus},
      {"spectral Ornstein-Uhlenbeck", spectral_ou},
      {"trace-space norms", trace_norms},
      {"extension operator", extension_operator},
      {"ellipsoid mass identity", ellipsoid_mass},
      {"convergence law", convergence_law},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
