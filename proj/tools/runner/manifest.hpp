#pragma once

#include "config.hpp"
#include "experiments.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gausstrace::runner {

struct RunRecord {
  std::string command;      ///< "run" or "sweep --axis ..."
  std::string config_path;
  std::optional<ExperimentConfig> config;  ///< absent when parsing failed
  std::optional<RunResult> result;         ///< absent when the run threw
  std::string error;
  std::vector<std::string> written;
  double wall_seconds = 0.0;
  int exit_status = 0;
};

/// Plain-text manifest: config echo, seed, workers, versions, wall time,
/// outputs, gates and exit status.
void write_manifest(const std::string& path, const RunRecord& record);

/// Writes the artifacts into `dir` (created if needed); returns file names.
std::vector<std::string> write_artifacts(const std::string& dir, const RunResult& result);

}  // namespace gausstrace::runner
