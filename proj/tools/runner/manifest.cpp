#include "manifest.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#ifndef GAUSSTRACE_VERSION
#define GAUSSTRACE_VERSION "unknown"
#endif

namespace gausstrace::runner {

std::vector<std::string> write_artifacts(const std::string& dir, const RunResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& a : result.artifacts) {
    const auto path = std::filesystem::path(dir) / a.file;
    a.table.save(path.string());
    written.push_back(a.file);
  }
  return written;
}

void write_manifest(const std::string& path, const RunRecord& rec) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path);

  out << "gausstrace manifest\n";
  out << "command = " << rec.command << "\n";
  out << "config = " << rec.config_path << "\n";
  if (rec.config) {
    out << "experiment = " << to_string(rec.config->experiment) << "\n";
    out << "seed = " << rec.config->seed << "\n";
    out << "workers = " << rec.config->workers << "\n";
  }
  out << "gausstrace_version = " << GAUSSTRACE_VERSION << "\n";
  out << "compiler = " << __VERSION__ << "\n";
  out << "eigen_version = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
  out << "boost_version = " << BOOST_LIB_VERSION << "\n";
  out << "wall_time_s = " << rec.wall_seconds << "\n";

  if (rec.config) {
    out << "\n[config]\n";
    for (const auto& [k, v] : rec.config->echo) out << k << " = " << v << "\n";
  }
  out << "\n[outputs]\n";
  for (const auto& f : rec.written) out << f << "\n";
  if (rec.result) {
    out << "\n[gates]\n";
    if (!rec.result->gated) out << "(exploratory, not gated)\n";
    for (const auto& g : rec.result->gates) out << g.name << " = " << (g.pass ? "PASS" : "FAIL") << " (" << g.detail << ")\n";
    if (!rec.result->notes.empty()) {
      out << "\n[notes]\n";
      for (const auto& n : rec.result->notes) out << n << "\n";
    }
  }
  if (!rec.error.empty()) out << "\n[error]\n" << rec.error << "\n";
  out << "\nexit_status = " << rec.exit_status << "\n";
}

}  // namespace gausstrace::runner
