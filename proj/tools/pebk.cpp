#include "pebk/bench.hpp"
#include "pebk/config.hpp"
#include "pebk/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

int list_experiments() {
  for (const auto& e : pebk::experiments()) {
    std::cout << e.id << "\n    " << e.description << '\n';
  }
  return 0;
}

int run(const std::string& id, const std::string& config_path,
        const std::vector<std::string>& sets, const std::string& out_dir, bool no_timing) {
  const pebk::Config file = config_path.empty() ? pebk::Config{} : pebk::Config::load(config_path);
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& s : sets) overrides.push_back(pebk::parse_assignment(s));
  pebk::RunOptions options;
  options.out_dir = out_dir;
  options.no_timing = no_timing;
  const pebk::ExperimentOutput out = pebk::run_experiment(id, file, overrides, options);
  std::cout << out.summary;
  for (const auto& f : out.files) std::cout << "wrote " << f.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-parallel exponential block Krylov experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list experiments");

  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  std::string id, config_path, out_dir = ".";
  std::vector<std::string> sets;
  bool no_timing = false;
  run_cmd->add_option("experiment", id, "experiment id (see `pebk list`)")->required();
  run_cmd->add_option("--config", config_path, "configuration file");
  run_cmd->add_option("--set", sets, "override a parameter, key=value")->allow_extra_args(false);
  run_cmd->add_option("--out", out_dir, "output directory for CSV files");
  run_cmd->add_flag("--no-timing", no_timing, "write timing columns as zero");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*list) return list_experiments();
    return run(id, config_path, sets, out_dir, no_timing);
  } catch (const pebk::InvalidArgument& e) {
    std::cerr << "pebk: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pebk::SolverError& e) {
    std::cerr << "pebk: solver failure: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "pebk: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "pebk: solver failure: " << e.what() << '\n';
    return kSolverError;
  }
}
