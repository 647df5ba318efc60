#include "experiments.hpp"

#include "gausstrace/domains.hpp"
#include "gausstrace/halfspace_spectral.hpp"
#include "gausstrace/surface_measure.hpp"
#include "gausstrace/trace_identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gausstrace::runner {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) { return format_double(v); }

std::string describe(double value, double bound, const char* op) {
  std::ostringstream out;
  out << value << " " << op << " " << bound;
  return out.str();
}

SamplerState base_state(const ExperimentConfig& c) { return SamplerState{c.seed, 0}; }

SurfaceRoute route_of(const ExperimentConfig& c) {
  SurfaceRoute r;
  r.resolution = c.resolution;
  return r;
}

// ---------------------------------------------------------------- ibp_suite

RunResult ibp_suite(const ExperimentConfig& c) {
  SuiteConfig sc;
  sc.state = base_state(c);
  sc.samples = c.samples;
  sc.workers = c.workers;
  sc.route = route_of(c);
  std::vector<SuiteDomain> domains;
  if (c.domain.kind == "suite") {
    domains = default_suite_domains();
  } else {
    const GaussianSpace space = c.space.build();
    domains.push_back(SuiteDomain{c.domain.kind, space, c.domain.build(space)});
  }
  const std::vector<IdentityReport> reports = run_identity_suite(sc, domains);

  RunResult r;
  r.artifacts.push_back({c.output, identity_table(reports)});
  std::size_t passed = 0;
  for (const auto& rep : reports) {
    if (rep.pass) {
      ++passed;
      continue;
    }
    std::ostringstream note;
    note << "FAIL " << to_string(rep.id) << " domain=" << rep.domain << " phi=" << rep.phi
         << (rep.psi.empty() ? "" : " psi=" + rep.psi) << " " << rep.index << " lhs=" << rep.lhs << " rhs=" << rep.rhs
         << " tol=" << rep.tolerance();
    r.notes.push_back(note.str());
  }
  r.gates.push_back({"all_identities_pass", passed == reports.size(),
                     std::to_string(passed) + "/" + std::to_string(reports.size())});
  return r;
}

// ------------------------------------------------------------ surface_routes

struct RouteRow {
  double quad = kNaN, quad_err = kNaN;
  Estimate mc;
  bool agree = false;
  bool quad_available = false;
};

RouteRow surface_routes_row(const ExperimentConfig& c, const GaussianSpace& space, const LevelSetDomain& domain,
                            const SamplerState& state) {
  RouteRow row;
  try {
    const SurfaceIntegral s = surface_integral(space, domain, fields::constant(space.dim(), 1.0), 0.0, c.resolution);
    row.quad = s.value;
    row.quad_err = s.error_estimate;
    row.quad_available = true;
  } catch (const SurfaceRouteUnavailable&) {
  }
  row.mc = rho_total_via_identity(space, domain, state, c.samples, c.workers);
  row.agree = row.quad_available &&
              std::abs(row.quad - row.mc.mean) <= kPassSigmas * std::hypot(row.mc.std_error, row.quad_err);
  return row;
}

RunResult surface_routes(const ExperimentConfig& c) {
  const GaussianSpace space = c.space.build();
  const LevelSetDomain domain = c.domain.build(space);
  const RouteRow row = surface_routes_row(c, space, domain, base_state(c));
  CsvTable t({"route", "value", "error"});
  t.add_row({"quadrature", fmt(row.quad), fmt(row.quad_err)});
  t.add_row({"identity_mc", fmt(row.mc.mean), fmt(row.mc.std_error)});
  RunResult r;
  r.artifacts.push_back({c.output, t});
  if (row.quad_available) {
    r.gates.push_back({"routes_agree", row.agree,
                       describe(std::abs(row.quad - row.mc.mean), kPassSigmas * std::hypot(row.mc.std_error, row.quad_err), "<=")});
  } else {
    r.notes.push_back("no surface parametrization for this domain; Monte Carlo route only");
  }
  return r;
}

// ---------------------------------------------------------------- qphi_study

struct QphiOutcome {
  QphiDerivativeReport report;
  double bandwidth = 0.0;
  double l1_curve = 0.0;
  double l1_bound = 0.0;
  Gate derivative, fundamental, l1;
};

QphiOutcome qphi_outcome(const ExperimentConfig& c, double bandwidth_scale) {
  const GaussianSpace space = c.space.build();
  const LevelSetDomain domain = c.domain.build(space);
  const ScalarField phi = phi_by_name(c.phi, space.dim());
  const SampleSet samples(space, base_state(c), c.samples, c.workers);
  QphiOutcome o;
  o.bandwidth = bandwidth_scale * silverman_bandwidth(domain, samples);
  o.report = qphi_derivative_check(space, domain, phi, samples, band_grid(domain.band_delta, c.grid_points), o.bandwidth);
  const auto& rep = o.report;
  o.derivative = {"derivative_matches_phi1", rep.max_standardized <= 5.0, describe(rep.max_standardized, 5.0, "<=")};
  const double ft = std::abs(rep.fundamental_lhs - rep.fundamental_rhs);
  o.fundamental = {"fundamental_theorem", ft <= kPassSigmas * rep.fundamental_error + 1e-12,
                   describe(ft, kPassSigmas * rep.fundamental_error, "<=")};
  // The curve's own error enters through the trapezoid of its standard errors.
  DensityCurve errs = rep.phi_curve;
  errs.values = errs.std_errors;
  const Estimate mass = band_abs_mass(domain, phi, samples);
  o.l1_curve = trapezoid_abs(rep.phi_curve);
  o.l1_bound = mass.mean + kPassSigmas * std::hypot(mass.std_error, trapezoid_abs(errs));
  o.l1 = {"l1_bound", o.l1_curve <= o.l1_bound, describe(o.l1_curve, o.l1_bound, "<=")};
  return o;
}

RunResult qphi_study(const ExperimentConfig& c) {
  const QphiOutcome o = qphi_outcome(c, c.bandwidth_scale);
  RunResult r;
  r.artifacts.push_back({c.output, density_table(o.report.phi_curve)});
  r.artifacts.push_back({"phi1_" + c.output, density_table(o.report.phi1_curve)});
  CsvTable d({"xi", "fd_derivative", "phi1_value", "stderr"});
  for (const auto& row : o.report.rows)
    d.add_row({fmt(row.xi), fmt(row.fd_derivative), fmt(row.phi1_value), fmt(row.std_error)});
  r.artifacts.push_back({"derivative_" + c.output, d});
  r.gates = {o.derivative, o.fundamental, o.l1};
  return r;
}

// ------------------------------------------------------ halfspace programme

std::vector<std::pair<std::string, HermiteExpansion>> spectral_family(const ExperimentConfig& c, const SplitSpace& s,
                                                                      bool with_mixtures) {
  auto family = hermite_family(s, c.max_degree);
  if (with_mixtures && c.mixtures > 0) {
    const int mix_degree = std::min(c.max_degree, 8);
    const std::size_t modes = std::min<std::size_t>(5, multi_indices_up_to(s.y_dim(), mix_degree).size() - 1);
    for (auto& m : random_combinations(s, mix_degree, modes, c.mixtures, base_state(c).substream(1)))
      family.push_back(std::move(m));
  }
  return family;
}

RunResult halfspace_norms(const ExperimentConfig& c) {
  const SplitSpace s = split(c.space.build(), c.axis_h - 1);
  std::vector<TraceNormReport> all, pure;
  for (const auto& [label, f] : spectral_family(c, s, true)) {
    all.push_back(trace_norm_report(s, f, c.p, label));
    if (label.rfind("h_", 0) == 0) pure.push_back(all.back());
  }
  double worst = 0.0;
  for (const auto& rep : all) worst = std::max(worst, rep.ratio_max);
  const double trend = ratio_degree_trend(pure);
  RunResult r;
  r.artifacts.push_back({c.output, trace_norm_table(all)});
  r.gates.push_back({"ratios_within_50", worst <= 50.0, describe(worst, 50.0, "<=")});
  r.gates.push_back({"no_degree_trend", trend <= 0.1, describe(trend, 0.1, "<=")});
  return r;
}

double max_trace_defect(const SplitSpace& s, const std::vector<std::pair<std::string, HermiteExpansion>>& family,
                        const SamplerState& state) {
  const Matrix probes = sample_gaussian(s.Y, state, 64);
  double worst = 0.0;
  for (const auto& [label, f] : family)
    for (Eigen::Index i = 0; i < probes.cols(); ++i) {
      const Vector y = probes.col(i);
      worst = std::max(worst, std::abs(extension_apply(s, f, 0.0, y) - f.evaluate(s.Y, y)));
    }
  return worst;
}

RunResult extension_bound(const ExperimentConfig& c) {
  const SplitSpace s = split(c.space.build(), c.axis_h - 1);
  const auto family = spectral_family(c, s, true);
  const ExtensionBoundReport rep = verify_extension_bound(s, family, base_state(c), c.samples, c.workers);
  const double defect = max_trace_defect(s, family, base_state(c).substream(2));
  RunResult r;
  r.artifacts.push_back({c.output, extension_table(rep)});
  r.gates.push_back({"no_positive_trend", rep.bounded(), describe(rep.slope, 0.1, "<=")});
  r.gates.push_back({"trace_of_extension", defect <= 1e-10, describe(defect, 1e-10, "<=")});
  return r;
}

// -------------------------------------------------------------- hardy_sweep

RunResult hardy_sweep(const ExperimentConfig& c) {
  std::vector<std::size_t> dims = c.dims;
  if (dims.empty())
    for (std::size_t n = 2; n <= 10; ++n) dims.push_back(n);
  CsvTable t({"dim", "phi_label", "numerator", "numerator_err", "denominator", "ratio", "ratio_err", "converse_regime"});
  for (std::size_t n : dims) {
    const GaussianSpace space = GaussianSpace::isotropic(n, 1.0 / static_cast<double>(n));
    const LevelSetDomain ball = make_ball(space, c.domain.radius);
    const std::vector<ScalarField> family{fields::constant(n, 1.0), fields::coordinate(n, 0),
                                          fields::gaussian_bump(Vector::Zero(static_cast<Eigen::Index>(n)), 4.0)};
    const HardyReport rep = hardy_probe(space, ball, c.p, family, base_state(c).substream(static_cast<std::uint32_t>(n)),
                                        c.samples, c.workers);
    for (const auto& row : rep.rows)
      t.add_row({std::to_string(n), row.phi, fmt(row.numerator.mean), fmt(row.numerator.std_error),
                 fmt(row.denominator), fmt(row.ratio), fmt(row.ratio_err), rep.converse_regime ? "1" : "0"});
  }
  RunResult r;
  r.gated = false;
  r.artifacts.push_back({c.output, t});
  r.notes.push_back("exploratory: the Hardy inequality is open, ratios are reported without a verdict");
  return r;
}

// ------------------------------------------------------- ellipsoid_identity

RunResult ellipsoid_identity(const ExperimentConfig& c) {
  const GaussianSpace space = c.space.build();
  const EllipsoidSpec spec = c.domain.ellipsoid(space.dim());
  const MassIdentity m = ellipsoid_mass_identity(space, spec, base_state(c), c.samples, c.workers);
  CsvTable t({"lhs", "lhs_err", "rhs", "rhs_err", "combined_error", "trace_weighted_alpha_sum", "agrees"});
  t.add_row({fmt(m.lhs.mean), fmt(m.lhs.std_error), fmt(m.rhs.mean), fmt(m.rhs.std_error), fmt(m.combined_error()),
             fmt(trace_weighted_alpha_sum(space, spec)), m.agrees() ? "1" : "0"});
  RunResult r;
  r.artifacts.push_back({c.output, t});
  r.gates.push_back({"mass_identity", m.agrees(),
                     describe(std::abs(m.lhs.mean - m.rhs.mean), kPassSigmas * m.combined_error(), "<=")});
  return r;
}

// ------------------------------------------------------------------- sweeps

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument(std::string(what) + " values must be positive integers");
  return static_cast<std::size_t>(v);
}

RunResult sweep_samples(const ExperimentConfig& c, const std::vector<double>& values) {
  if (c.domain.kind == "suite") throw SweepNotApplicable("samples sweep needs a single domain, not 'suite'");
  const GaussianSpace space = c.space.build();
  const LevelSetDomain domain = c.domain.build(space);
  const ScalarField phi = phi_by_name(c.phi, space.dim());
  CsvTable t({"samples", "rms_residual", "mean_reported_error", "replicates"});
  std::vector<double> ns, rms;
  for (double v : values) {
    const std::size_t n = as_count(v, "samples");
    double sq = 0.0, err = 0.0;
    for (std::size_t rep = 0; rep < c.replicates; ++rep) {
      const SampleSet samples(space, base_state(c).substream(static_cast<std::uint32_t>(rep)), n, c.workers);
      const IdentityReport ir =
          c.identity == "parti"
              ? verify_parti(space, domain, phi, c.k - 1, samples, route_of(c))
              : verify_power_identity(space, domain, phi, 1.0, PowerVariant::partitraccia2, samples, route_of(c));
      sq += (ir.lhs - ir.rhs) * (ir.lhs - ir.rhs);
      err += ir.combined_error();
    }
    const double reps = static_cast<double>(c.replicates);
    ns.push_back(static_cast<double>(n));
    rms.push_back(std::sqrt(sq / reps));
    t.add_row({std::to_string(n), fmt(rms.back()), fmt(err / reps), std::to_string(c.replicates)});
  }
  RunResult r;
  r.artifacts.push_back({"sweep_samples_" + c.output, t});
  if (ns.size() >= 2) {
    const double slope = log_log_slope(ns, rms);
    r.gates.push_back({"clt_slope", slope >= -0.6 && slope <= -0.4, "slope " + fmt(slope) + " in [-0.6, -0.4]"});
  }
  return r;
}

RunResult sweep_dimension(const ExperimentConfig& c, const std::vector<double>& values) {
  if (c.experiment == Experiment::hardy_sweep) {
    ExperimentConfig d = c;
    d.dims.clear();
    for (double v : values) d.dims.push_back(as_count(v, "dimension"));
    validate(d);
    RunResult r = hardy_sweep(d);
    r.artifacts.front().file = "sweep_dimension_" + c.output;
    return r;
  }
  if (c.experiment != Experiment::surface_routes)
    throw SweepNotApplicable("dimension sweep applies to surface_routes and hardy_sweep");
  if (c.space.spectrum == "list") throw SweepNotApplicable("dimension sweep needs a generated spectrum, not 'list'");
  CsvTable t({"dim", "quadrature", "quadrature_err", "identity_mc", "identity_mc_err", "agree"});
  RunResult r;
  bool all = true;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig d = c;
    d.space.dim = as_count(values[i], "dimension");
    if (d.domain.hhat.size() != d.space.dim) d.domain.hhat.clear();
    if (d.domain.center.size() != d.space.dim) d.domain.center.clear();
    validate(d);
    const GaussianSpace space = d.space.build();
    const RouteRow row = surface_routes_row(d, space, d.domain.build(space), base_state(c).substream(static_cast<std::uint32_t>(i)));
    if (row.quad_available) all = all && row.agree;
    t.add_row({std::to_string(d.space.dim), fmt(row.quad), fmt(row.quad_err), fmt(row.mc.mean), fmt(row.mc.std_error),
               row.quad_available ? (row.agree ? "1" : "0") : "na"});
  }
  r.artifacts.push_back({"sweep_dimension_" + c.output, t});
  r.gates.push_back({"routes_agree", all, "every dimension with a parametrization"});
  return r;
}

RunResult sweep_bandwidth(const ExperimentConfig& c, const std::vector<double>& values) {
  if (c.experiment != Experiment::qphi_study) throw SweepNotApplicable("bandwidth sweep applies to qphi_study");
  CsvTable t({"bandwidth_scale", "bandwidth", "max_abs_difference", "max_standardized", "l1_curve", "l1_bound",
              "l1_within"});
  RunResult r;
  bool all = true;
  for (double v : values) {
    if (!(v > 0.0)) throw std::invalid_argument("bandwidth values must be > 0");
    const QphiOutcome o = qphi_outcome(c, v);
    all = all && o.derivative.pass;
    if (!o.l1.pass)
      r.notes.push_back("bandwidth scale " + fmt(v) + ": smoothed curve exceeds the L1 bound (" + o.l1.detail +
                        "); kernel smoothing moves mass across the band edge");
    t.add_row({fmt(v), fmt(o.bandwidth), fmt(o.report.max_abs_difference), fmt(o.report.max_standardized),
               fmt(o.l1_curve), fmt(o.l1_bound), o.l1.pass ? "1" : "0"});
  }
  r.artifacts.push_back({"sweep_bandwidth_" + c.output, t});
  r.gates.push_back({"derivative_every_bandwidth", all, std::to_string(values.size()) + " bandwidths"});
  return r;
}

RunResult sweep_degree(const ExperimentConfig& c, const std::vector<double>& values) {
  if (c.experiment != Experiment::extension_bound && c.experiment != Experiment::halfspace_norms)
    throw SweepNotApplicable("degree sweep applies to extension_bound and halfspace_norms");
  const SplitSpace s = split(c.space.build(), c.axis_h - 1);
  std::vector<std::pair<std::string, HermiteExpansion>> family;
  for (double v : values) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 40.0) throw std::invalid_argument("degree values must be integers in 0..40");
    const int k = static_cast<int>(v);
    family.emplace_back("h_" + std::to_string(k), HermiteExpansion::mode(s.y_dim(), 0, k));
  }
  RunResult r;
  if (c.experiment == Experiment::extension_bound) {
    const ExtensionBoundReport rep = verify_extension_bound(s, family, base_state(c), c.samples, c.workers);
    r.artifacts.push_back({"sweep_degree_" + c.output, extension_table(rep)});
    r.gates.push_back({"no_positive_trend", rep.bounded(), describe(rep.slope, 0.1, "<=")});
  } else {
    std::vector<TraceNormReport> reps;
    double worst = 0.0;
    for (const auto& [label, f] : family) {
      reps.push_back(trace_norm_report(s, f, c.p, label));
      worst = std::max(worst, reps.back().ratio_max);
    }
    const double trend = ratio_degree_trend(reps);
    r.artifacts.push_back({"sweep_degree_" + c.output, trace_norm_table(reps)});
    r.gates.push_back({"ratios_within_50", worst <= 50.0, describe(worst, 50.0, "<=")});
    r.gates.push_back({"no_degree_trend", trend <= 0.1, describe(trend, 0.1, "<=")});
  }
  return r;
}

}  // namespace

bool RunResult::ok() const {
  if (!gated) return true;
  return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

ScalarField phi_by_name(const std::string& name, std::size_t dim) {
  if (name == "one") return fields::constant(dim, 1.0);
  if (name == "x1") return fields::coordinate(dim, 0);
  if (name == "x1^2") return fields::coordinate_square(dim, 0);
  if (name == "bump") return fields::gaussian_bump(Vector::Zero(static_cast<Eigen::Index>(dim)), 4.0);
  throw std::invalid_argument("unknown test function '" + name + "'");
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope: need two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RunResult run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::ibp_suite: return ibp_suite(c);
    case Experiment::surface_routes: return surface_routes(c);
    case Experiment::qphi_study: return qphi_study(c);
    case Experiment::halfspace_norms: return halfspace_norms(c);
    case Experiment::extension_bound: return extension_bound(c);
    case Experiment::hardy_sweep: return hardy_sweep(c);
    case Experiment::ellipsoid_identity: return ellipsoid_identity(c);
  }
  throw std::logic_error("run_experiment: unhandled experiment");
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "dimension") return SweepAxis::dimension;
  if (name == "samples") return SweepAxis::samples;
  if (name == "bandwidth") return SweepAxis::bandwidth;
  if (name == "degree") return SweepAxis::degree;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::dimension: return "dimension";
    case SweepAxis::samples: return "samples";
    case SweepAxis::bandwidth: return "bandwidth";
    case SweepAxis::degree: return "degree";
  }
  return "unknown";
}

RunResult run_sweep(const ExperimentConfig& c, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  switch (axis) {
    case SweepAxis::samples:
      if (c.experiment != Experiment::ibp_suite && c.experiment != Experiment::surface_routes)
        throw SweepNotApplicable("samples sweep applies to ibp_suite and surface_routes");
      return sweep_samples(c, values);
    case SweepAxis::dimension: return sweep_dimension(c, values);
    case SweepAxis::bandwidth: return sweep_bandwidth(c, values);
    case SweepAxis::degree: return sweep_degree(c, values);
  }
  throw std::logic_error("run_sweep: unhandled axis");
}

}  // namespace gausstrace::runner
