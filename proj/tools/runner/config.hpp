#pragma once

// Experiment configuration: INI text with [experiment], [space], [domain] and
// [options] sections. See docs/config.md for the grammar.

#include "gausstrace/domains.hpp"
#include "gausstrace/gaussian_space.hpp"
#include "gausstrace/surface_measure.hpp"

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gausstrace::runner {

enum class Experiment {
  ibp_suite,
  surface_routes,
  qphi_study,
  halfspace_norms,
  extension_bound,
  hardy_sweep,
  ellipsoid_identity,
};

[[nodiscard]] const char* to_string(Experiment e) noexcept;

/// Invalid configuration; what() reads "<file>:<line>: <section.key>: <reason>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& message);
  [[nodiscard]] const std::string& field() const noexcept { return field_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

struct SpaceSpec {
  std::size_t dim = 1;
  /// isotropic (all lambda = variance), list (eigenvalues), power
  /// (lambda_k = variance * k^-decay), dirichlet (-Laplacian on (0,1)).
  std::string spectrum = "isotropic";
  std::vector<double> eigenvalues;
  double variance = 1.0;
  double decay = 2.0;
  int dirichlet_power = 1;  ///< 1: Q = A^-1 / 2, 2: Q = A^-2 / 2

  [[nodiscard]] GaussianSpace build() const;
};

struct DomainSpec {
  /// halfspace, ball, ellipsoid, graph, suite (ibp_suite only).
  std::string kind = "halfspace";
  std::vector<double> hhat;     ///< empty: first Cameron-Martin axis
  double radius = 1.0;
  std::vector<double> center;   ///< empty: origin
  std::vector<double> alphas;   ///< empty with dirichlet_beta set: (pi k)^{4 beta}
  double dirichlet_beta = -1.0; ///< < 0: unused
  std::size_t axis = 1;         ///< 1-based normal axis for graph regions
  double offset = 0.25;         ///< F(y) = offset + amplitude sin(frequency y_1)
  double amplitude = 0.4;
  double frequency = 1.0;

  [[nodiscard]] LevelSetDomain build(const GaussianSpace& space) const;
  [[nodiscard]] EllipsoidSpec ellipsoid(std::size_t dim) const;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::ibp_suite;
  SpaceSpec space;
  DomainSpec domain;
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 42;
  std::size_t resolution = 64;
  std::string output = "results.csv";
  unsigned workers = 1;

  // [options]
  std::string phi = "one";          ///< one, x1, x1^2, bump (qphi_study)
  double bandwidth_scale = 1.0;     ///< multiplier on Silverman's rule
  std::size_t grid_points = 41;
  double p = 2.0;                   ///< halfspace_norms, hardy_sweep
  int max_degree = 12;
  std::size_t mixtures = 5;         ///< random 5-mode combinations
  std::size_t axis_h = 1;           ///< 1-based split axis (halfspace_norms, extension_bound)
  std::vector<std::size_t> dims;    ///< hardy_sweep dimensions
  std::size_t replicates = 32;      ///< samples sweep
  std::string identity = "parti";   ///< samples sweep: parti or partitraccia2
  std::size_t k = 1;                ///< samples sweep coordinate, 1-based

  /// (section.key, value) in file order, for the manifest.
  std::vector<std::pair<std::string, std::string>> echo;
  std::string source;
};

/// Parses and validates; throws ConfigError.
[[nodiscard]] ExperimentConfig parse_config_file(const std::string& path);
[[nodiscard]] ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<string>");

/// Field checks shared by the parser and by overrides; throws ConfigError
/// with line 0.
void validate(const ExperimentConfig& config);

}  // namespace gausstrace::runner
