#pragma once

// Experiment registry and CSV reports behind the `pebk` command line tool.

#include "pebk/config.hpp"
#include "pebk/parallel.hpp"
#include "pebk/wr.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace pebk {

/// One line of an efficiency table.
struct ReportRow {
  int p = 1;
  double tau0 = 0.0;
  double max_tau1 = 0.0;
  double max_tau2 = 0.0;
  double error = 0.0;
  double speedup = 0.0;
  double efficiency = 0.0;
};

/// speedup = tau0 / (max_tau1 + max_tau2), efficiency = speedup / P.
ReportRow make_report_row(int p, double tau0, double max_tau1, double max_tau2, double error);

struct RunReport {
  std::vector<ReportRow> rows;
};

/// Scientific notation with 6 significant digits.
std::string format_sci(double v);

/// P,tau0,max_tau1,max_tau2,error,speedup,efficiency. With no_timing the
/// timing-derived columns are written as zero.
void write_report_csv(std::ostream& out, const RunReport& report, bool no_timing);

/// iteration,P,error,iterate_change,iter_time_max
void write_error_history_header(std::ostream& out);
void write_error_history_rows(std::ostream& out, int p, const std::vector<WrIteration>& history,
                              bool no_timing);

struct EfficiencyRow {
  int p = 1;
  double total_time = 0.0;
  double speedup = 0.0;
  double efficiency = 0.0;
};

/// P,total_time,speedup,efficiency
void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows,
                          bool no_timing);

/// First iteration whose error is at most `factor` times `plateau`, or -1.
int iterations_to_plateau(const std::vector<WrIteration>& history, double plateau,
                          double factor = 2.0);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool no_timing = false;
  Clock clock = steady_clock();
};

struct ExperimentOutput {
  std::vector<std::filesystem::path> files;
  std::string summary;  // short human-readable digest for the terminal
};

struct Experiment {
  std::string id;
  std::string description;
  std::vector<ParamSpec> params;
  std::function<ExperimentOutput(const ExperimentConfig&, const RunOptions&)> run;
};

const std::vector<Experiment>& experiments();

/// Throws ConfigError listing the known ids.
const Experiment& find_experiment(const std::string& id);

/// Resolves the configuration for `id` and runs it. Global keys in `file`
/// that no experiment declares are rejected.
ExperimentOutput run_experiment(const std::string& id, const Config& file,
                                const std::vector<std::pair<std::string, std::string>>& overrides,
                                const RunOptions& options);

}  // namespace pebk
