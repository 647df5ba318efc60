#pragma once

// Experiment and sweep execution. Results are CSV tables plus named gates;
// the CLI turns them into files, a manifest and an exit status.

#include "config.hpp"

#include "gausstrace/csv.hpp"

#include <string>
#include <vector>

namespace gausstrace::runner {

struct Artifact {
  std::string file;
  CsvTable table;
};

struct Gate {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  std::vector<Gate> gates;
  std::vector<std::string> notes;
  /// Exploratory experiments report but never gate.
  bool gated = true;

  [[nodiscard]] bool ok() const;
};

[[nodiscard]] RunResult run_experiment(const ExperimentConfig& config);

enum class SweepAxis { dimension, samples, bandwidth, degree };

[[nodiscard]] SweepAxis parse_axis(const std::string& name);
[[nodiscard]] const char* to_string(SweepAxis axis) noexcept;

/// Raised when the axis does not apply to the configured experiment.
class SweepNotApplicable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

[[nodiscard]] RunResult run_sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<double>& values);

/// Least-squares slope of log(y) on log(x).
[[nodiscard]] double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Test function by config name for a space of dimension `dim`.
[[nodiscard]] ScalarField phi_by_name(const std::string& name, std::size_t dim);

}  // namespace gausstrace::runner
