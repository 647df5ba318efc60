// gausstrace: experiment runner for the Gaussian trace toolkit.
//
//   gausstrace run <config> [--seed N] [--output-dir DIR] [--workers W]
//   gausstrace sweep <config> --axis samples --values 1e4,1e5,1e6 [...]
//
// Exit status: 0 all gates pass, 1 a gate failed, 2 invalid config or
// arguments, 3 runtime failure.

#include "runner/config.hpp"
#include "runner/experiments.hpp"
#include "runner/manifest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace rn = gausstrace::runner;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "gausstrace-out";
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config_path, "INI experiment config")->required();
  cmd->add_option("--seed", c.seed, "override experiment.seed");
  cmd->add_option("--output-dir", c.output_dir, "directory for CSV files and manifest.txt")->capture_default_str();
  cmd->add_option("--workers", c.workers, "override experiment.workers")->check(CLI::PositiveNumber);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument("--values: '" + item + "' is not a number");
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("--values: empty list");
  return out;
}

int execute(const Common& common, const std::string& command,
            const std::function<rn::RunResult(const rn::ExperimentConfig&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  rn::RunRecord rec;
  rec.command = command;
  rec.config_path = common.config_path;
  try {
    rn::ExperimentConfig cfg = rn::parse_config_file(common.config_path);
    if (common.seed) cfg.seed = *common.seed;
    if (common.workers) cfg.workers = *common.workers;
    rec.config = cfg;
    try {
      rec.result = body(cfg);
      rec.written = rn::write_artifacts(common.output_dir, *rec.result);
      rec.exit_status = rec.result->ok() ? 0 : 1;
    } catch (const rn::SweepNotApplicable& e) {
      rec.error = e.what();
      rec.exit_status = 2;
    } catch (const std::exception& e) {
      rec.error = std::string("runtime failure: ") + e.what();
      rec.exit_status = 3;
    }
  } catch (const rn::ConfigError& e) {
    rec.error = e.what();
    rec.exit_status = 2;
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (rec.result) {
    for (const auto& g : rec.result->gates)
      std::cout << (g.pass ? "PASS " : "FAIL ") << g.name << " (" << g.detail << ")\n";
    for (const auto& n : rec.result->notes) std::cout << n << "\n";
    if (!rec.result->gated) std::cout << "exploratory run: gates not applied\n";
  }
  if (!rec.error.empty()) std::cerr << "error: " << rec.error << "\n";
  try {
    rn::write_manifest(common.output_dir + "/manifest.txt", rec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rec.exit_status == 0 ? 3 : rec.exit_status;
  }
  return rec.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian trace toolkit experiment runner"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "run one experiment config");
  add_common(run, run_opts);

  Common sweep_opts;
  std::string axis, values;
  auto* sweep = app.add_subcommand("sweep", "repeat a metric over one axis");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis, "dimension, samples, bandwidth or degree")
      ->required()
      ->check(CLI::IsMember({"dimension", "samples", "bandwidth", "degree"}));
  sweep->add_option("--values", values, "comma-separated values, e.g. 1e4,1e5,1e6")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return execute(run_opts, "run", [](const rn::ExperimentConfig& c) { return rn::run_experiment(c); });

  std::vector<double> parsed;
  try {
    parsed = parse_values(values);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const rn::SweepAxis ax = rn::parse_axis(axis);
  return execute(sweep_opts, "sweep --axis " + axis + " --values " + values,
                 [&](const rn::ExperimentConfig& c) { return rn::run_sweep(c, ax, parsed); });
}
