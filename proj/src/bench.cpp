#include "pebk/bench.hpp"

#include "pebk/baseline.hpp"
#include "pebk/ebk.hpp"
#include "pebk/lowrank.hpp"
#include "pebk/metrics.hpp"
#include "pebk/model.hpp"
#include "pebk/paraexp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace pebk {

ReportRow make_report_row(int p, double tau0, double max_tau1, double max_tau2, double error) {
  ReportRow row{p, tau0, max_tau1, max_tau2, error, 0.0, 0.0};
  const double parallel = max_tau1 + max_tau2;
  if (parallel > 0.0) {
    row.speedup = tau0 / parallel;
    row.efficiency = row.speedup / p;
  }
  return row;
}

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

void write_report_csv(std::ostream& out, const RunReport& report, bool no_timing) {
  out << "P,tau0,max_tau1,max_tau2,error,speedup,efficiency\n";
  for (const auto& r : report.rows) {
    auto t = [&](double v) { return format_sci(no_timing ? 0.0 : v); };
    out << r.p << ',' << t(r.tau0) << ',' << t(r.max_tau1) << ',' << t(r.max_tau2) << ','
        << format_sci(r.error) << ',' << t(r.speedup) << ',' << t(r.efficiency) << '\n';
  }
}

void write_error_history_header(std::ostream& out) {
  out << "iteration,P,error,iterate_change,iter_time_max\n";
}

void write_error_history_rows(std::ostream& out, int p, const std::vector<WrIteration>& history,
                              bool no_timing) {
  for (const auto& h : history) {
    out << h.iteration << ',' << p << ',' << format_sci(h.error) << ','
        << format_sci(h.iterate_change) << ',' << format_sci(no_timing ? 0.0 : h.iter_time_max)
        << '\n';
  }
}

void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows,
                          bool no_timing) {
  out << "P,total_time,speedup,efficiency\n";
  for (const auto& r : rows) {
    auto t = [&](double v) { return format_sci(no_timing ? 0.0 : v); };
    out << r.p << ',' << t(r.total_time) << ',' << t(r.speedup) << ',' << t(r.efficiency) << '\n';
  }
}

int iterations_to_plateau(const std::vector<WrIteration>& history, double plateau, double factor) {
  for (const auto& h : history) {
    if (h.error <= factor * plateau) return h.iteration;
  }
  return -1;
}

namespace {

// ---------------------------------------------------------------------------
// Shared parameter blocks.

std::vector<ParamSpec> with_common(std::vector<ParamSpec> own) {
  const std::vector<ParamSpec> common = {
      {"tol", "1e-4", "relative residual tolerance of the Krylov solver"},
      {"restart_length", "20", "blocks per Krylov cycle"},
      {"gamma_factor", "0.1", "shift-and-invert shift as a fraction of the subinterval length"},
      {"gamma", "0", "fixed shift (overrides gamma_factor when > 0)"},
      {"max_krylov_dim", "4000", "basis vectors allowed per solve, summed over restarts"},
      {"node_kind", "chebyshev", "sample nodes per subinterval: chebyshev | uniform"},
      {"timing", "emulated", "emulated | threaded"},
      {"threads", "0", "worker threads in threaded mode (0: PEBK_NUM_THREADS or hardware)"},
      {"seed", "1", "seed for randomized components"},
  };
  for (const auto& c : common) {
    const bool overridden = std::any_of(own.begin(), own.end(),
                                        [&](const ParamSpec& p) { return p.key == c.key; });
    if (!overridden) own.push_back(c);
  }
  return own;
}

EbkConfig read_ebk(const ExperimentConfig& cfg) {
  EbkConfig e;
  e.tol = cfg.get_double("tol");
  e.restart_length = cfg.get_int("restart_length");
  e.gamma_factor = cfg.get_double("gamma_factor");
  e.gamma = cfg.get_double("gamma");
  e.max_krylov_dim = cfg.get_int("max_krylov_dim");
  try {
    e.validate();
  } catch (const InvalidArgument& err) {
    throw ConfigError(err.what());
  }
  return e;
}

NodeKind read_nodes(const ExperimentConfig& cfg) {
  return cfg.get_choice("node_kind", {"chebyshev", "uniform"}) == "uniform" ? NodeKind::uniform
                                                                            : NodeKind::chebyshev;
}

TimingMode read_timing(const ExperimentConfig& cfg) {
  return cfg.get_choice("timing", {"emulated", "threaded"}) == "threaded" ? TimingMode::threaded
                                                                         : TimingMode::emulated;
}

ForcingMode read_forcing(const ExperimentConfig& cfg) {
  const std::string f = cfg.get_choice("forcing", {"continuum", "discrete"});
  return f == "discrete" ? ForcingMode::discrete : ForcingMode::continuum;
}

JacobianMode read_jacobian(const ExperimentConfig& cfg) {
  return cfg.get_choice("jacobian_mode", {"averaged", "none"}) == "none" ? JacobianMode::none
                                                                        : JacobianMode::averaged;
}

/// Rank rule: fixed rank m when m > 0, relative tolerance svd_tol otherwise.
RankRule read_rank(const ExperimentConfig& cfg, int samples) {
  const int m = cfg.get_int("m");
  if (m > 0) return FixedRank{std::min(m, samples)};
  const double tau = cfg.get_double("svd_tol");
  if (!(tau >= 0.0)) throw ConfigError("parameter 'svd_tol' must be >= 0");
  return RelativeTolerance{tau};
}

int positive(const ExperimentConfig& cfg, const std::string& key) {
  const int v = cfg.get_int(key);
  if (v < 1) throw ConfigError("parameter '" + key + "' must be >= 1");
  return v;
}

double positive_double(const ExperimentConfig& cfg, const std::string& key) {
  const double v = cfg.get_double(key);
  if (!(v > 0.0)) throw ConfigError("parameter '" + key + "' must be > 0");
  return v;
}

std::vector<int> positive_list(const ExperimentConfig& cfg, const std::string& key) {
  std::vector<int> v = cfg.get_ints(key);
  for (int x : v) {
    if (x < 1) throw ConfigError("parameter '" + key + "': entries must be >= 1");
  }
  return v;
}

GridSpec grid_from(double dx, const std::string& key) {
  try {
    return GridSpec::from_spacing(dx);
  } catch (const InvalidArgument& err) {
    throw ConfigError("parameter '" + key + "': " + err.what());
  }
}

class CsvFile {
public:
  CsvFile(const RunOptions& opt, const std::string& name, ExperimentOutput& out)
      : path_(opt.out_dir / name), stream_(path_) {
    if (!stream_) throw ConfigError("cannot write '" + path_.string() + "'");
    out.files.push_back(path_);
  }
  std::ostream& operator*() { return stream_; }

private:
  std::filesystem::path path_;
  std::ofstream stream_;
};

std::string tag(const std::string& prefix, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%g", prefix.c_str(), v);
  return buf;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_superposition(const ExperimentConfig& cfg, const RunOptions& opt) {
  const AdeParams p{cfg.get_double("a"), cfg.get_double("nu")};
  const GridSpec grid = grid_from(positive_double(cfg, "dx"), "dx");
  const double horizon = positive_double(cfg, "T");
  const int s = positive(cfg, "s");
  const EbkConfig ebk = read_ebk(cfg);
  const LinearIVP ivp = pulse_ade_ivp(grid, p, horizon);
  const Vector exact = ivp.exact(horizon);

  ExperimentOutput out;
  CsvFile csv(opt, "superposition.csv", out);
  *csv << "P,error,diff_vs_first,max_tau1,max_tau2\n";
  Vector first;
  std::ostringstream summary;
  for (int pp : positive_list(cfg, "P")) {
    const Partition part = Partition::uniform(0.0, horizon, pp, s, read_nodes(cfg));
    ParaexpOptions po;
    po.rank = read_rank(cfg, s);
    po.mode = read_timing(cfg);
    po.threads = cfg.get_int("threads");
    po.clock = opt.clock;
    const ParaexpResult r = paraexp_solve(ivp, part, ebk, po);
    const Vector u = r.u.final_state() + ivp.offset;
    if (first.size() == 0) first = u;
    const double err = relative_error(u, exact);
    const double diff = relative_error(u, first);
    *csv << pp << ',' << format_sci(err) << ',' << format_sci(diff) << ','
         << format_sci(opt.no_timing ? 0.0 : r.max_tau1()) << ','
         << format_sci(opt.no_timing ? 0.0 : r.max_tau2()) << '\n';
    summary << "P=" << pp << " error " << format_sci(err) << " diff " << format_sci(diff) << '\n';
  }
  out.summary = summary.str();
  return out;
}

ExperimentOutput run_ade_convergence(const ExperimentConfig& cfg, const RunOptions& opt) {
  const std::vector<double> dxs = cfg.get_doubles("dx");
  const std::vector<double> tols = cfg.get_doubles("tols");
  const double horizon = positive_double(cfg, "T");
  const int s = positive(cfg, "s");
  const int pp = positive(cfg, "P");
  std::vector<std::pair<double, double>> cases;
  {
    std::stringstream in(cfg.get_string("cases"));
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("parameter 'cases': entries look like a:nu, got '" + item + "'");
      }
      try {
        cases.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ConfigError("parameter 'cases': cannot read '" + item + "'");
      }
    }
  }
  ExperimentOutput out;
  CsvFile csv(opt, "ade_convergence.csv", out);
  CsvFile orders(opt, "ade_convergence_order.csv", out);
  *csv << "a,nu,tol,dx,error\n";
  *orders << "a,nu,tol,order\n";
  std::ostringstream summary;
  for (const auto& [a, nu] : cases) {
    for (double tol : tols) {
      EbkConfig ebk = read_ebk(cfg);
      ebk.tol = tol;
      std::vector<double> errors;
      for (double dx : dxs) {
        const GridSpec grid = grid_from(dx, "dx");
        const LinearIVP ivp = pulse_ade_ivp(grid, {a, nu}, horizon);
        const Partition part = Partition::uniform(0.0, horizon, pp, s, read_nodes(cfg));
        ParaexpOptions po;
        po.rank = read_rank(cfg, s);
        po.clock = opt.clock;
        const ParaexpResult r = paraexp_solve(ivp, part, ebk, po);
        const double err = relative_error(r.u.final_state() + ivp.offset, ivp.exact(horizon));
        errors.push_back(err);
        *csv << format_sci(a) << ',' << format_sci(nu) << ',' << format_sci(tol) << ','
             << format_sci(dx) << ',' << format_sci(err) << '\n';
      }
      if (dxs.size() >= 3) {
        const double order = fit_convergence_order(dxs, errors);
        *orders << format_sci(a) << ',' << format_sci(nu) << ',' << format_sci(tol) << ','
                << format_sci(order) << '\n';
        summary << "a=" << a << " nu=" << nu << " tol=" << tol << " order " << format_sci(order)
                << '\n';
      }
    }
  }
  out.summary = summary.str();
  return out;
}

ExperimentOutput run_ade_efficiency(const ExperimentConfig& cfg, const RunOptions& opt) {
  const AdeParams p{cfg.get_double("a"), cfg.get_double("nu")};
  const GridSpec grid = grid_from(positive_double(cfg, "dx"), "dx");
  const double dT = positive_double(cfg, "dT");
  const int s = positive(cfg, "s");
  const double dt_cn = positive_double(cfg, "dt_cn");
  const int repeats = positive(cfg, "timing_repeats");
  const EbkConfig ebk = read_ebk(cfg);
  const ForcingMode forcing = read_forcing(cfg);
  const RankRule rank = read_rank(cfg, s);

  ExperimentOutput out;
  RunReport pebk_report, cn_report;
  CsvFile serial_csv(opt, "serial.csv", out);
  CsvFile steps_csv(opt, "cn_steps.csv", out);
  *serial_csv << "P,method,tau0,error\n";
  *steps_csv << "P,steps_per_subproblem,dt_parallel\n";
  std::ostringstream summary;
  for (int pp : positive_list(cfg, "P")) {
    const double horizon = dT * pp;
    const LinearIVP ivp = traveling_pulse_ivp(grid, p, horizon, forcing);
    const Vector exact = ivp.exact(horizon);
    const Partition part = Partition::uniform(0.0, horizon, pp, s, read_nodes(cfg));
    ParaexpOptions po;
    po.rank = rank;
    po.mode = read_timing(cfg);
    po.threads = cfg.get_int("threads");
    po.clock = opt.clock;

    double tau0_pebk = std::numeric_limits<double>::infinity();
    double tau0_cn = tau0_pebk;
    std::vector<double> t1_pebk, t2_pebk, t1_cn, t2_cn;
    double err_serial = 0.0, err_pebk = 0.0, err_cn_serial = 0.0, err_cn = 0.0;
    long steps = 0;
    double dt_par = 0.0;
    auto keep_min = [](std::vector<double>& best, const std::vector<double>& now) {
      if (best.empty()) {
        best = now;
      } else {
        for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::min(best[i], now[i]);
      }
    };
    for (int r = 0; r < repeats; ++r) {
      const SerialResult serial = serial_solve(ivp, part, ebk, rank, opt.clock);
      tau0_pebk = std::min(tau0_pebk, serial.tau0);
      err_serial = relative_error(serial.u.final_state() + ivp.offset, exact);

      const ParaexpResult par = paraexp_solve(ivp, part, ebk, po);
      keep_min(t1_pebk, par.tau1);
      keep_min(t2_pebk, par.tau2);
      err_pebk = relative_error(par.u.final_state() + ivp.offset, exact);

      const double c0 = opt.clock();
      const CnResult cn = cn_solve(ivp.a, ivp.g, ivp.u0, part.grids(), dt_cn);
      tau0_cn = std::min(tau0_cn, opt.clock() - c0);
      err_cn_serial = relative_error(cn.u.final_state() + ivp.offset, exact);

      const ParaexpCnResult pcn = paraexp_cn_solve(ivp, part, dt_cn, ebk, po);
      keep_min(t1_cn, pcn.tau1);
      keep_min(t2_cn, pcn.tau2);
      err_cn = relative_error(pcn.u.final_state() + ivp.offset, exact);
      steps = *std::max_element(pcn.steps.begin(), pcn.steps.end());
      dt_par = pcn.dt_parallel;
    }
    auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
    pebk_report.rows.push_back(
        make_report_row(pp, tau0_pebk, max_of(t1_pebk), max_of(t2_pebk), err_pebk));
    cn_report.rows.push_back(make_report_row(pp, tau0_cn, max_of(t1_cn), max_of(t2_cn), err_cn));
    auto t = [&](double v) { return format_sci(opt.no_timing ? 0.0 : v); };
    *serial_csv << pp << ",pebk," << t(tau0_pebk) << ',' << format_sci(err_serial) << '\n';
    *serial_csv << pp << ",cn," << t(tau0_cn) << ',' << format_sci(err_cn_serial) << '\n';
    *steps_csv << pp << ',' << steps << ',' << format_sci(dt_par) << '\n';
    summary << "P=" << pp << " pebk error " << format_sci(err_pebk) << " efficiency "
            << format_sci(pebk_report.rows.back().efficiency) << " | paraexp/cn error "
            << format_sci(err_cn) << " efficiency " << format_sci(cn_report.rows.back().efficiency)
            << '\n';
  }
  {
    CsvFile csv(opt, "pebk.csv", out);
    write_report_csv(*csv, pebk_report, opt.no_timing);
  }
  {
    CsvFile csv(opt, "paraexp_cn.csv", out);
    write_report_csv(*csv, cn_report, opt.no_timing);
  }
  out.summary = summary.str();
  return out;
}

ExperimentOutput run_sv_decay(const ExperimentConfig& cfg, const RunOptions& opt) {
  const AdeParams p{cfg.get_double("a"), cfg.get_double("nu")};
  const GridSpec grid = grid_from(positive_double(cfg, "dx"), "dx");
  const int s = positive(cfg, "s");
  const double dT = positive_double(cfg, "dT");
  const int halvings = cfg.get_int("halvings");
  const int jmax = positive(cfg, "jmax");
  if (halvings < 2) throw ConfigError("parameter 'halvings' must be >= 2 for a slope fit");
  const std::string which = cfg.get_choice("source", {"travelling", "pulse20"});

  SourceFn g;
  if (which == "travelling") {
    const LinearIVP ivp = traveling_pulse_ivp(grid, p, dT, read_forcing(cfg));
    const Vector au0 = ivp.a.apply(ivp.u0);
    g = [au0, f = ivp.g](double t) -> Vector { return au0 + f(t); };
  } else {
    const Vector x = grid.points();
    g = [x](double t) {
      Vector v(x.size());
      for (Index i = 0; i < x.size(); ++i) v[i] = std::pow(std::sin(std::numbers::pi * (x[i] - t)), 20);
      return v;
    };
  }
  const std::vector<DecayRow> rows = decay_report(g, SampleGrid(0.0, dT, s, read_nodes(cfg)), halvings);

  ExperimentOutput out;
  {
    CsvFile csv(opt, "sv_decay.csv", out);
    write_decay_csv(*csv, rows);
  }
  CsvFile slopes(opt, "sv_decay_slopes.csv", out);
  *slopes << "j,slope\n";
  std::ostringstream summary;
  for (int j = 1; j <= jmax; ++j) {
    std::vector<double> lengths, sigma;
    for (const auto& r : rows) {
      if (r.j == j + 1) {
        lengths.push_back(r.interval_length);
        sigma.push_back(std::max(r.sigma, std::numeric_limits<double>::min()));
      }
    }
    if (lengths.size() < 3) continue;
    const double slope = fit_convergence_order(lengths, sigma);
    *slopes << j << ',' << format_sci(slope) << '\n';
    summary << "sigma_" << j + 1 << " slope " << format_sci(slope) << '\n';
  }
  out.summary = summary.str();
  return out;
}

struct BurgersSetup {
  double nu;
  ManufacturedSolution solution;
  ForcingMode forcing;
};

WrResult run_burgers(const ExperimentConfig& cfg, const RunOptions& opt, const BurgersSetup& b,
                     double dx, double horizon, int pp, int s, NodeKind kind) {
  const GridSpec grid = grid_from(dx, "dx");
  const NonlinearIVP ivp = burgers_ivp(grid, b.nu, b.solution, b.forcing, horizon);
  const Partition part = Partition::uniform(0.0, horizon, pp, s, kind);
  WrConfig w;
  w.max_iterations = positive(cfg, "K");
  w.wr_tol = cfg.get_double("wr_tol");
  w.jacobian = read_jacobian(cfg);
  w.rank = read_rank(cfg, s);
  w.mode = read_timing(cfg);
  w.threads = cfg.get_int("threads");
  w.clock = opt.clock;
  return wr_run(ivp, part, w, read_ebk(cfg));
}

ManufacturedSolution sawtooth_from(const ExperimentConfig& cfg) {
  const double eps = positive_double(cfg, "eps");
  return sawtooth_wave(eps, positive(cfg, "kmax"));
}

ExperimentOutput run_burgers_wave(const ExperimentConfig& cfg, const RunOptions& opt) {
  const BurgersSetup b{cfg.get_double("nu"), sawtooth_from(cfg), read_forcing(cfg)};
  const double dT = positive_double(cfg, "dT");
  const int pp = positive(cfg, "P");
  const int s = positive(cfg, "s");
  ExperimentOutput out;
  CsvFile plateau(opt, "plateau.csv", out);
  *plateau << "dx,plateau\n";
  std::ostringstream summary;
  for (double dx : cfg.get_doubles("dx")) {
    const WrResult r = run_burgers(cfg, opt, b, dx, dT * pp, pp, s, read_nodes(cfg));
    CsvFile csv(opt, tag("error_history_dx", dx) + ".csv", out);
    write_error_history_header(*csv);
    write_error_history_rows(*csv, pp, r.history, opt.no_timing);
    const double final_error = r.history.back().error;
    *plateau << format_sci(dx) << ',' << format_sci(final_error) << '\n';
    summary << "dx=" << dx << " final error " << format_sci(final_error) << '\n';
  }
  out.summary = summary.str();
  return out;
}

ExperimentOutput run_burgers_scaling(const ExperimentConfig& cfg, const RunOptions& opt) {
  const BurgersSetup b{cfg.get_double("nu"), sawtooth_from(cfg), read_forcing(cfg)};
  const bool fixed_t = cfg.get_choice("mode", {"fixed_T", "fixed_dT"}) == "fixed_T";
  const double dx = positive_double(cfg, "dx");
  const int s = positive(cfg, "s");
  ExperimentOutput out;
  CsvFile history(opt, "error_history.csv", out);
  CsvFile iterations(opt, "iterations.csv", out);
  write_error_history_header(*history);
  *iterations << "P,K_P,efficiency_bound\n";
  std::ostringstream summary;
  std::vector<std::pair<int, WrResult>> runs;
  for (int pp : positive_list(cfg, "P")) {
    const double horizon = fixed_t ? positive_double(cfg, "T") : positive_double(cfg, "dT") * pp;
    runs.emplace_back(pp, run_burgers(cfg, opt, b, dx, horizon, pp, s, read_nodes(cfg)));
    write_error_history_rows(*history, pp, runs.back().second.history, opt.no_timing);
  }
  // With a fixed final time every run shares the first run's plateau;
  // otherwise each run is measured against its own final error.
  const double shared = runs.front().second.history.back().error;
  int k1 = -1;
  for (const auto& [pp, r] : runs) {
    const double plateau = fixed_t ? shared : r.history.back().error;
    const int k = iterations_to_plateau(r.history, plateau);
    if (k1 < 0) k1 = k;
    const double bound = k > 0 && k1 > 0 ? static_cast<double>(k1) / k : 0.0;
    *iterations << pp << ',' << k << ',' << format_sci(bound) << '\n';
    summary << "P=" << pp << " K_P " << k << " bound " << format_sci(bound) << '\n';
  }
  out.summary = summary.str();
  return out;
}

ExperimentOutput run_burgers_efficiency(const ExperimentConfig& cfg, const RunOptions& opt) {
  const double dx = positive_double(cfg, "dx");
  const double horizon = positive_double(cfg, "T");
  const int s_total = positive(cfg, "s_total");
  ExperimentOutput out;
  std::ostringstream summary;
  for (double nu : cfg.get_doubles("nu")) {
    const BurgersSetup b{nu, sawtooth_from(cfg), read_forcing(cfg)};
    std::vector<EfficiencyRow> rows;
    CsvFile history(opt, tag("error_history_nu", nu) + ".csv", out);
    write_error_history_header(*history);
    double base = 0.0;
    for (int pp : positive_list(cfg, "P")) {
      const int s = s_total / pp;
      if (s < 2) throw ConfigError("s_total / P must leave at least two samples per subinterval");
      const WrResult r = run_burgers(cfg, opt, b, dx, horizon, pp, s, read_nodes(cfg));
      write_error_history_rows(*history, pp, r.history, opt.no_timing);
      // Speedup is measured against the first run scaled to one processor.
      if (rows.empty()) base = r.total_time * pp;
      EfficiencyRow row{pp, r.total_time, 0.0, 0.0};
      if (r.total_time > 0.0) {
        row.speedup = base / r.total_time;
        row.efficiency = row.speedup / pp;
      }
      rows.push_back(row);
      summary << "nu=" << nu << " P=" << pp << " time " << format_sci(r.total_time)
              << " final error " << format_sci(r.history.back().error) << '\n';
    }
    CsvFile csv(opt, tag("efficiency_nu", nu) + ".csv", out);
    write_efficiency_csv(*csv, rows, opt.no_timing);
  }
  out.summary = summary.str();
  return out;
}

ExperimentOutput run_multiscale(const ExperimentConfig& cfg, const RunOptions& opt) {
  const double nu = cfg.get_double("nu");
  const double dx = positive_double(cfg, "dx");
  const double dT = positive_double(cfg, "dT");
  const int s = positive(cfg, "s");
  ExperimentOutput out;
  CsvFile iterations(opt, "iterations.csv", out);
  *iterations << "k0,P,K_plateau,final_error\n";
  std::ostringstream summary;
  for (int k0 : positive_list(cfg, "k0")) {
    if (k0 < 2) throw ConfigError("parameter 'k0' entries must be > 1");
    const BurgersSetup b{nu, multiscale_wave(k0), read_forcing(cfg)};
    CsvFile history(opt, "error_history_k0" + std::to_string(k0) + ".csv", out);
    write_error_history_header(*history);
    for (int pp : positive_list(cfg, "P")) {
      const WrResult r = run_burgers(cfg, opt, b, dx, dT * pp, pp, s, read_nodes(cfg));
      write_error_history_rows(*history, pp, r.history, opt.no_timing);
      const double final_error = r.history.back().error;
      const int k = iterations_to_plateau(r.history, final_error);
      *iterations << k0 << ',' << pp << ',' << k << ',' << format_sci(final_error) << '\n';
      summary << "k0=" << k0 << " P=" << pp << " K " << k << " final error "
              << format_sci(final_error) << '\n';
    }
  }
  out.summary = summary.str();
  return out;
}

std::vector<Experiment> build_registry() {
  const ParamSpec rank_m{"m", "0", "retained singular values (0: use svd_tol)"};
  const ParamSpec rank_tol{"svd_tol", "1e-12", "relative singular value cut when m = 0"};
  const std::vector<ParamSpec> burgers_common = {
      {"nu", "1e-2", "viscosity"},
      {"eps", "0.1", "sawtooth smoothing parameter"},
      {"kmax", "100", "sawtooth cutoff wavenumber"},
      {"forcing", "continuum", "manufactured forcing: continuum | discrete"},
      {"K", "10", "waveform relaxation sweeps"},
      {"wr_tol", "0", "stop when the iterate change drops below (0: run all K)"},
      {"jacobian_mode", "averaged", "averaged | none"},
      {"m", "12", "retained singular values"},
      {"svd_tol", "1e-12", "relative singular value cut when m = 0"},
  };
  auto burgers = [&](std::vector<ParamSpec> own) {
    for (const auto& p : burgers_common) {
      if (std::none_of(own.begin(), own.end(), [&](const ParamSpec& o) { return o.key == p.key; })) {
        own.push_back(p);
      }
    }
    return with_common(std::move(own));
  };

  std::vector<Experiment> reg;
  reg.push_back({"superposition",
                 "pulse problem split over P subintervals and superposed, compared with P = 1",
                 with_common({{"a", "1", "advection velocity"},
                              {"nu", "1e-2", "diffusivity"},
                              {"dx", "5e-3", "mesh width"},
                              {"T", "1", "final time"},
                              {"P", "1,2,4,8", "subinterval counts"},
                              {"s", "32", "samples per subinterval"},
                              {"tol", "1e-6", "relative residual tolerance"},
                              rank_m,
                              rank_tol}),
                 run_superposition});
  reg.push_back({"ade-convergence",
                 "spatial convergence of the pulse problem for three (a, nu) pairs and tolerances",
                 with_common({{"cases", "0:1e-2,1:0,1:1e-2", "a:nu pairs"},
                              {"tols", "1e-2,1e-4,1e-6", "solver tolerances"},
                              {"dx", "4e-3,2e-3,1e-3", "mesh widths"},
                              {"T", "1", "final time"},
                              {"P", "8", "subintervals"},
                              {"s", "32", "samples per subinterval"},
                              rank_m,
                              rank_tol}),
                 run_ade_convergence});
  reg.push_back({"ade-efficiency",
                 "parallel efficiency of PEBK against Paraexp with Crank-Nicolson legs, "
                 "travelling pulses, T = P * dT",
                 with_common({{"a", "1", "advection velocity"},
                              {"nu", "1e-2", "diffusivity"},
                              {"dx", "1e-3", "mesh width"},
                              {"dT", "1", "subinterval length"},
                              {"P", "2,4,8,16,32", "processor counts"},
                              {"s", "100", "samples per subinterval"},
                              {"m", "2", "retained singular values"},
                              {"svd_tol", "1e-12", "relative singular value cut when m = 0"},
                              {"dt_cn", "1e-3", "serial Crank-Nicolson step"},
                              {"forcing", "continuum", "continuum | discrete"},
                              {"timing_repeats", "1", "runs per timing, minimum kept"}}),
                 run_ade_efficiency});
  reg.push_back({"sv-decay",
                 "singular values of source samples as the subinterval shrinks",
                 with_common({{"source", "travelling", "travelling | pulse20"},
                              {"a", "1", "advection velocity"},
                              {"nu", "1e-2", "diffusivity"},
                              {"dx", "1e-3", "mesh width"},
                              {"s", "32", "samples per subinterval"},
                              {"dT", "0.2", "largest subinterval length"},
                              {"halvings", "3", "number of halvings of dT"},
                              {"jmax", "3", "fit slopes of sigma_2 .. sigma_{jmax+1}"},
                              {"forcing", "continuum", "continuum | discrete"}}),
                 run_sv_decay});
  reg.push_back({"burgers-wave",
                 "waveform relaxation on the travelling sawtooth for several mesh widths",
                 burgers({{"dx", "1e-2,5e-3,2.5e-3", "mesh widths"},
                          {"dT", "0.1", "subinterval length"},
                          {"P", "1", "subintervals"},
                          {"s", "50", "samples per subinterval"}}),
                 run_burgers_wave});
  reg.push_back({"burgers-scaling",
                 "iteration counts against P with fixed subinterval length or fixed final time",
                 burgers({{"mode", "fixed_T", "fixed_T (dT = T/P) | fixed_dT (T = P dT)"},
                          {"dx", "2.5e-3", "mesh width"},
                          {"T", "0.1", "final time in fixed_T mode"},
                          {"dT", "0.1", "subinterval length in fixed_dT mode"},
                          {"P", "1,2,4,8", "processor counts"},
                          {"s", "50", "samples per subinterval"},
                          {"K", "12", "waveform relaxation sweeps"}}),
                 run_burgers_scaling});
  reg.push_back({"burgers-efficiency",
                 "emulated parallel timings of ten sweeps with dT = T/P and s = s_total/P",
                 burgers({{"nu", "1e-1,1e-2", "viscosities"},
                          {"dx", "2e-3", "mesh width"},
                          {"T", "0.2", "final time"},
                          {"P", "1,2,4,8,16,32", "processor counts"},
                          {"s_total", "128", "samples over [0, T]"},
                          {"forcing", "discrete", "continuum | discrete"},
                          {"node_kind", "uniform", "chebyshev | uniform"}}),
                 run_burgers_efficiency});
  reg.push_back({"multiscale",
                 "two-scale manufactured Burgers solution, T = P * dT",
                 burgers({{"k0", "4,16", "small-scale wavenumbers"},
                          {"dx", "2.5e-3", "mesh width"},
                          {"dT", "0.1", "subinterval length"},
                          {"P", "1,2,4", "processor counts"},
                          {"s", "50", "samples per subinterval"},
                          {"K", "15", "waveform relaxation sweeps"}}),
                 run_multiscale});
  return reg;
}

}  // namespace

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> registry = build_registry();
  return registry;
}

const Experiment& find_experiment(const std::string& id) {
  for (const auto& e : experiments()) {
    if (e.id == id) return e;
  }
  std::string known;
  for (const auto& e : experiments()) known += (known.empty() ? "" : ", ") + e.id;
  throw ConfigError("unknown experiment '" + id + "'; known: " + known);
}

ExperimentOutput run_experiment(const std::string& id, const Config& file,
                                const std::vector<std::pair<std::string, std::string>>& overrides,
                                const RunOptions& options) {
  const Experiment& exp = find_experiment(id);
  if (const auto g = file.sections().find(""); g != file.sections().end()) {
    std::set<std::string> any;
    for (const auto& e : experiments()) {
      for (const auto& p : e.params) any.insert(p.key);
    }
    for (const auto& [k, v] : g->second) {
      if (any.count(k) == 0) throw ConfigError("unknown global parameter '" + k + "'");
    }
  }
  for (const auto& [name, sec] : file.sections()) {
    if (!name.empty()) find_experiment(name);
  }
  const ExperimentConfig cfg(id, exp.params, file, overrides);
  std::filesystem::create_directories(options.out_dir);
  return exp.run(cfg, options);
}

}  // namespace pebk
