#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace gausstrace::runner {

namespace pt = boost::property_tree;

const char* to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::ibp_suite: return "ibp_suite";
    case Experiment::surface_routes: return "surface_routes";
    case Experiment::qphi_study: return "qphi_study";
    case Experiment::halfspace_norms: return "halfspace_norms";
    case Experiment::extension_bound: return "extension_bound";
    case Experiment::hardy_sweep: return "hardy_sweep";
    case Experiment::ellipsoid_identity: return "ellipsoid_identity";
  }
  return "unknown";
}

ConfigError::ConfigError(std::string field, std::size_t line, const std::string& message)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"name", "samples", "seed", "resolution", "output", "workers"}},
      {"space", {"dim", "spectrum", "eigenvalues", "variance", "decay", "dirichlet_power"}},
      {"domain",
       {"kind", "hhat", "radius", "center", "alphas", "dirichlet_beta", "axis", "offset", "amplitude", "frequency"}},
      {"options",
       {"phi", "bandwidth_scale", "grid_points", "p", "max_degree", "mixtures", "axis", "dims", "replicates",
        "identity", "k"}},
  };
  return keys;
}

// Line numbers of "[section]" headers and "key =" lines, for diagnostics.
std::map<std::string, std::size_t> index_lines(const std::string& text) {
  std::map<std::string, std::size_t> lines;
  std::istringstream in(text);
  std::string line, section;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == ';' || line[first] == '#') continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      section = line.substr(first + 1, close == std::string::npos ? std::string::npos : close - first - 1);
      lines.emplace(section, n);
      continue;
    }
    const auto eq = line.find('=', first);
    if (eq == std::string::npos) continue;
    std::string key = line.substr(first, eq - first);
    key.erase(key.find_last_not_of(" \t") + 1);
    lines.emplace(section + "." + key, n);
  }
  return lines;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, std::size_t> lines, std::string source)
      : tree_(tree), lines_(std::move(lines)), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    const auto it = lines_.find(field);
    const std::size_t line = it == lines_.end() ? 0 : it->second;
    std::ostringstream msg;
    msg << source_ << ":" << line << ": " << field << ": " << why;
    throw ConfigError(field, line, msg.str());
  }

  [[nodiscard]] std::optional<std::string> raw(const std::string& field) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(field, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void read(const std::string& field, std::string& out) const {
    if (auto v = raw(field)) {
      if (v->empty()) fail(field, "empty value");
      out = *v;
    }
  }

  void read(const std::string& field, double& out) const {
    if (auto v = raw(field)) out = to_double(field, *v);
  }

  template <typename Int>
  void read_int(const std::string& field, Int& out, long double lo) const {
    if (auto v = raw(field)) out = to_int<Int>(field, *v, lo);
  }

  void read(const std::string& field, std::vector<double>& out) const {
    if (auto v = raw(field)) {
      out.clear();
      for (const auto& item : split(*v)) out.push_back(to_double(field, item));
      if (out.empty()) fail(field, "empty list");
    }
  }

  void read(const std::string& field, std::vector<std::size_t>& out) const {
    if (auto v = raw(field)) {
      out.clear();
      for (const auto& item : split(*v)) out.push_back(to_int<std::size_t>(field, item, 1));
      if (out.empty()) fail(field, "empty list");
    }
  }

  [[nodiscard]] static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> items;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) items.push_back(item);
    }
    return items;
  }

 private:
  double to_double(const std::string& field, const std::string& s) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      fail(field, "'" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v)) fail(field, "'" + s + "' is not a finite number");
    return v;
  }

  // Integers accept scientific notation ("1e6") when the value is integral.
  template <typename Int>
  Int to_int(const std::string& field, const std::string& s, long double lo) const {
    const double v = to_double(field, s);
    if (v != std::floor(v)) fail(field, "'" + s + "' is not an integer");
    if (v < static_cast<double>(lo)) fail(field, "'" + s + "' must be >= " + std::to_string(static_cast<long long>(lo)));
    if (v > 9.0e15) fail(field, "'" + s + "' is too large");
    return static_cast<Int>(v);
  }

  const pt::ptree& tree_;
  std::map<std::string, std::size_t> lines_;
  std::string source_;
};

Experiment parse_experiment(const Reader& r, const std::string& name) {
  static const std::map<std::string, Experiment> names{
      {"ibp_suite", Experiment::ibp_suite},
      {"surface_routes", Experiment::surface_routes},
      {"qphi_study", Experiment::qphi_study},
      {"halfspace_norms", Experiment::halfspace_norms},
      {"extension_bound", Experiment::extension_bound},
      {"hardy_sweep", Experiment::hardy_sweep},
      {"ellipsoid_identity", Experiment::ellipsoid_identity},
  };
  const auto it = names.find(name);
  if (it == names.end()) r.fail("experiment.name", "unknown experiment '" + name + "'");
  return it->second;
}

ScalarField sine_graph(std::size_t ydim, double offset, double amplitude, double frequency) {
  ScalarField F;
  F.value = [=](const Vector& y) { return offset + amplitude * std::sin(frequency * y(0)); };
  F.gradient = [=](const Vector& y) -> Vector {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(ydim));
    g(0) = amplitude * frequency * std::cos(frequency * y(0));
    return g;
  };
  F.hessian = [=](const Vector& y) -> Matrix {
    Matrix h = Matrix::Zero(static_cast<Eigen::Index>(ydim), static_cast<Eigen::Index>(ydim));
    h(0, 0) = -amplitude * frequency * frequency * std::sin(frequency * y(0));
    return h;
  };
  F.label = "sine";
  return F;
}

void check(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw ConfigError(field, 0, field + ": " + why);
}

}  // namespace

GaussianSpace SpaceSpec::build() const {
  if (spectrum == "isotropic") return GaussianSpace::isotropic(dim, variance);
  if (spectrum == "list") {
    Vector l(static_cast<Eigen::Index>(eigenvalues.size()));
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) l(static_cast<Eigen::Index>(k)) = eigenvalues[k];
    return GaussianSpace::diagonal(l);
  }
  if (spectrum == "power") {
    Vector l(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k)
      l(static_cast<Eigen::Index>(k)) = variance * std::pow(static_cast<double>(k + 1), -decay);
    return GaussianSpace::diagonal(l);
  }
  return dirichlet_laplacian_space(
      dirichlet_power == 2 ? DirichletCovariance::half_inverse_square : DirichletCovariance::half_inverse, dim);
}

EllipsoidSpec DomainSpec::ellipsoid(std::size_t dim) const {
  if (alphas.empty()) return dirichlet_ball_spec(dim, dirichlet_beta, radius);
  Vector a(static_cast<Eigen::Index>(alphas.size()));
  for (std::size_t k = 0; k < alphas.size(); ++k) a(static_cast<Eigen::Index>(k)) = alphas[k];
  return EllipsoidSpec{a, radius};
}

LevelSetDomain DomainSpec::build(const GaussianSpace& space) const {
  const std::size_t n = space.dim();
  auto vec = [&](const std::vector<double>& v, double fill_first) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(n));
    if (v.empty()) {
      out(0) = fill_first;
    } else {
      for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[k];
    }
    return out;
  };
  if (kind == "halfspace") return make_halfspace(space, vec(hhat, 1.0));
  if (kind == "ball") return make_ball(space, radius, vec(center, 0.0));
  if (kind == "ellipsoid") return make_ellipsoid(space, ellipsoid(n));
  if (kind == "graph") return make_graph_region(space, axis - 1, sine_graph(n - 1, offset, amplitude, frequency));
  throw std::invalid_argument("domain kind '" + kind + "' has no single-domain form");
}

void validate(const ExperimentConfig& c) {
  const auto& s = c.space;
  static const std::set<std::string> spectra{"isotropic", "list", "power", "dirichlet"};
  check(spectra.count(s.spectrum) == 1, "space.spectrum", "expected isotropic, list, power or dirichlet");
  check(s.dim >= 1, "space.dim", "must be >= 1");
  if (s.spectrum == "list") {
    check(s.eigenvalues.size() == s.dim, "space.eigenvalues",
          "has " + std::to_string(s.eigenvalues.size()) + " entries, space.dim is " + std::to_string(s.dim));
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k)
      check(s.eigenvalues[k] > 0.0, "space.eigenvalues",
            "entry " + std::to_string(k + 1) + " is " + std::to_string(s.eigenvalues[k]) + ", must be > 0");
  }
  check(s.variance > 0.0, "space.variance", "must be > 0");
  check(s.dirichlet_power == 1 || s.dirichlet_power == 2, "space.dirichlet_power", "must be 1 or 2");

  const auto& d = c.domain;
  static const std::set<std::string> kinds{"halfspace", "ball", "ellipsoid", "graph", "suite"};
  check(kinds.count(d.kind) == 1, "domain.kind", "expected halfspace, ball, ellipsoid, graph or suite");
  check(d.kind != "suite" || c.experiment == Experiment::ibp_suite, "domain.kind", "'suite' is only valid for ibp_suite");
  check(d.hhat.empty() || d.hhat.size() == s.dim, "domain.hhat", "needs space.dim entries");
  check(d.hhat.empty() || std::any_of(d.hhat.begin(), d.hhat.end(), [](double v) { return v != 0.0; }), "domain.hhat",
        "must not be zero");
  check(d.radius > 0.0, "domain.radius", "must be > 0");
  check(d.center.empty() || d.center.size() == s.dim, "domain.center", "needs space.dim entries");
  if (d.kind == "ellipsoid") {
    check(!d.alphas.empty() || d.dirichlet_beta >= 0.0, "domain.alphas", "give alphas or dirichlet_beta");
    check(d.alphas.empty() || d.alphas.size() == s.dim, "domain.alphas", "needs space.dim entries");
    for (double a : d.alphas) check(a >= 0.0, "domain.alphas", "entries must be >= 0");
  }
  if (d.kind == "graph") {
    check(s.dim >= 2, "space.dim", "graph regions need dim >= 2");
    check(d.axis >= 1 && d.axis <= s.dim, "domain.axis", "must be in 1..space.dim");
  }

  check(c.samples >= 1, "experiment.samples", "must be >= 1");
  check(c.resolution >= 2, "experiment.resolution", "must be >= 2");
  check(c.workers >= 1, "experiment.workers", "must be >= 1");
  check(!c.output.empty() && c.output.find('/') == std::string::npos, "experiment.output",
        "must be a plain file name");
  static const std::set<std::string> phis{"one", "x1", "x1^2", "bump"};
  check(phis.count(c.phi) == 1, "options.phi", "expected one, x1, x1^2 or bump");
  check(c.bandwidth_scale > 0.0, "options.bandwidth_scale", "must be > 0");
  check(c.grid_points >= 5, "options.grid_points", "must be >= 5");
  check(c.p > 1.0, "options.p", "must be > 1");
  check(c.max_degree >= 1 && c.max_degree <= 40, "options.max_degree", "must be in 1..40");
  check(c.replicates >= 2, "options.replicates", "must be >= 2");
  check(c.identity == "parti" || c.identity == "partitraccia2", "options.identity", "expected parti or partitraccia2");
  check(c.k >= 1 && c.k <= s.dim, "options.k", "must be in 1..space.dim");
  if (c.experiment == Experiment::halfspace_norms || c.experiment == Experiment::extension_bound) {
    check(s.dim >= 2, "space.dim", "the halfspace split needs dim >= 2");
    check(c.axis_h >= 1 && c.axis_h <= s.dim, "options.axis", "must be in 1..space.dim");
  }
  if (c.experiment == Experiment::hardy_sweep)
    for (std::size_t n : c.dims) check(n >= 2, "options.dims", "dimensions must be >= 2");
  if (c.experiment == Experiment::qphi_study)
    check(c.samples >= kMinKdeSamples, "experiment.samples", "the density estimate needs >= 10000 samples");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      std::ostringstream msg;
      msg << source << ":" << e.line() << ": syntax: " << e.message();
      throw ConfigError("syntax", e.line(), msg.str());
    }
  }
  const auto lines = index_lines(text);
  const Reader r(tree, lines, source);

  ExperimentConfig c;
  c.source = source;
  for (const auto& [section, body] : tree) {
    const auto allowed = allowed_keys().find(section);
    if (allowed == allowed_keys().end()) r.fail(section, "unknown section");
    if (body.empty() && !body.data().empty()) r.fail(section, "key outside a section");
    for (const auto& [key, value] : body) {
      if (allowed->second.count(key) == 0) r.fail(section + "." + key, "unknown key");
      c.echo.emplace_back(section + "." + key, trim(value.data()));
    }
  }
  std::sort(c.echo.begin(), c.echo.end(), [&](const auto& a, const auto& b) {
    const auto la = lines.count(a.first) ? lines.at(a.first) : 0, lb = lines.count(b.first) ? lines.at(b.first) : 0;
    return la < lb;
  });

  std::string name;
  r.read("experiment.name", name);
  if (name.empty()) r.fail("experiment.name", "missing (required)");
  c.experiment = parse_experiment(r, name);
  r.read_int("experiment.samples", c.samples, 1);
  r.read_int("experiment.seed", c.seed, 0);
  r.read_int("experiment.resolution", c.resolution, 2);
  r.read("experiment.output", c.output);
  r.read_int("experiment.workers", c.workers, 1);

  r.read("space.spectrum", c.space.spectrum);
  r.read("space.eigenvalues", c.space.eigenvalues);
  if (c.space.spectrum == "list" && !r.raw("space.dim")) c.space.dim = c.space.eigenvalues.size();
  r.read_int("space.dim", c.space.dim, 1);
  r.read("space.variance", c.space.variance);
  r.read("space.decay", c.space.decay);
  r.read_int("space.dirichlet_power", c.space.dirichlet_power, 1);

  r.read("domain.kind", c.domain.kind);
  r.read("domain.hhat", c.domain.hhat);
  r.read("domain.radius", c.domain.radius);
  r.read("domain.center", c.domain.center);
  r.read("domain.alphas", c.domain.alphas);
  r.read("domain.dirichlet_beta", c.domain.dirichlet_beta);
  r.read_int("domain.axis", c.domain.axis, 1);
  r.read("domain.offset", c.domain.offset);
  r.read("domain.amplitude", c.domain.amplitude);
  r.read("domain.frequency", c.domain.frequency);

  r.read("options.phi", c.phi);
  r.read("options.bandwidth_scale", c.bandwidth_scale);
  r.read_int("options.grid_points", c.grid_points, 1);
  r.read("options.p", c.p);
  r.read_int("options.max_degree", c.max_degree, 0);
  r.read_int("options.mixtures", c.mixtures, 0);
  r.read_int("options.axis", c.axis_h, 1);
  r.read("options.dims", c.dims);
  r.read_int("options.replicates", c.replicates, 1);
  r.read("options.identity", c.identity);
  r.read_int("options.k", c.k, 1);

  try {
    validate(c);
  } catch (const ConfigError& e) {
    r.fail(e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("file", 0, path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path);
}

}  // namespace gausstrace::runner
