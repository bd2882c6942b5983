// Command-line benchmark harness for the time-spectral ODE solver library:
// run solvers on registry problems, emit plot-ready series and diagnostics,
// and compare methods at equal tolerance.

#include "gwrm/diagnostics.hpp"
#include "gwrm/gwrm.hpp"
#include "gwrm/problems.hpp"
#include "gwrm/refsolvers.hpp"
#include "gwrm/serialization.hpp"
#include "gwrm/smoothing.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using gwrm::json;

// Input problems that cannot be acted on: reported on stderr, exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string registry_hint() {
  std::string s = "available problems:";
  for (const std::string& name : gwrm::problem_registry()) s += " " + name;
  return s;
}

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Config files hold `key = value` lines (# comments allowed) where each key
// names a long option of the subcommand in use. They are expanded into
// option tokens inserted ahead of the explicit flags, so precedence is
// defaults < config file < flags.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open config file '" + path + "'");
  std::vector<std::string> toks;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (val.size() >= 2 && ((val.front() == '"' && val.back() == '"') ||
                            (val.front() == '\'' && val.back() == '\'')))
      val = val.substr(1, val.size() - 2);
    if (key.empty() || val.empty())
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    if (key == "config")
      throw UsageError(path + ":" + std::to_string(lineno) + ": config files cannot nest");
    toks.push_back("--" + key);
    toks.push_back(val);
  }
  return toks;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const std::string& kv : kvs) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    try {
      std::size_t used = 0;
      const double val = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("");
      out[key] = val;
    } catch (const std::exception&) {
      throw UsageError("--param value for '" + key + "' is not a number");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError(what + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> ts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    ts[static_cast<std::size_t>(i)] =
        (i == n - 1) ? b : a + (b - a) * static_cast<double>(i) / (n - 1);
  return ts;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> ts(static_cast<std::size_t>(n));
  const double la = std::log10(a);
  const double lb = std::log10(b);
  for (int i = 0; i < n; ++i)
    ts[static_cast<std::size_t>(i)] =
        (i == n - 1) ? b : std::pow(10.0, la + (lb - la) * static_cast<double>(i) / (n - 1));
  return ts;
}

// Cubic Hermite dense output from the recorded steps of a trajectory.
Eigen::VectorXd trajectory_eval(const gwrm::Trajectory& traj, double t) {
  const std::vector<double>& ts = traj.times;
  if (ts.empty()) throw std::runtime_error("trajectory_eval: empty trajectory");
  if (t <= ts.front()) return traj.states.front();
  if (t >= ts.back()) return traj.states.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  const double t0 = ts[j - 1];
  const double t1 = ts[j];
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * traj.states[j - 1] + (h10 * h) * traj.derivs[j - 1] + h01 * traj.states[j] +
         (h11 * h) * traj.derivs[j];
}

Eigen::MatrixXd trajectory_eval_many(const gwrm::Trajectory& traj, const std::vector<double>& ts) {
  Eigen::MatrixXd out(traj.states.front().size(), static_cast<Eigen::Index>(ts.size()));
  for (std::size_t j = 0; j < ts.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = trajectory_eval(traj, ts[j]);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << content;
  if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* to_string(gwrm::GwrmStatus s) {
  return s == gwrm::GwrmStatus::completed ? "completed" : "partial";
}

// ---------------------------------------------------------------------------
// shared option bundles

struct CommonOpts {
  std::string problem;
  std::vector<std::string> params;
  std::string out = ".";
  std::uint64_t seed = 0;
  double t_start = std::numeric_limits<double>::quiet_NaN();  // NaN -> problem default
  double t_end = std::numeric_limits<double>::quiet_NaN();
};

struct GwrmOpts {
  int K = 8;
  double epsilon = 1e-3;
  double initial_dt = 0.0;  // 0 -> full span
  double min_dt = 0.0;      // 0 -> 1e-9 * span
  double max_dt = 0.0;      // 0 -> full span
  double tail_floor = 1e-6;
  std::string solver_mode = "semi_implicit";
  double solver_tol = 1e-10;
  int max_iters = 100;
  int jacobian_reuse = 3;
};

struct StepperOpts {
  double tol = 1e-6;  // relative tolerance
  double abs_tol = std::numeric_limits<double>::quiet_NaN();  // NaN -> tol * 1e-3
  double h0 = 0.0;                                            // 0 -> span / 1000
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 100000;
};

gwrm::OdeProblem load_problem(const CommonOpts& c) {
  if (c.problem.empty()) throw UsageError("--problem is required; " + registry_hint());
  gwrm::OdeProblem p;
  try {
    p = gwrm::make_problem(c.problem, parse_params(c.params));
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    if (msg.find("available") == std::string::npos) msg += "; " + registry_hint();
    throw UsageError(msg);
  }
  if (!std::isnan(c.t_start)) p.t_start = c.t_start;
  if (!std::isnan(c.t_end)) p.t_end = c.t_end;
  if (!(p.t_end > p.t_start))
    throw UsageError("--t-end must be greater than the start time");
  return p;
}

gwrm::GwrmConfig make_gwrm_config(const GwrmOpts& g) {
  gwrm::GwrmConfig cfg;
  cfg.K = g.K;
  cfg.epsilon = g.epsilon;
  cfg.initial_dt = g.initial_dt;
  cfg.min_dt = g.min_dt;
  cfg.max_dt = g.max_dt;
  cfg.tail_floor = g.tail_floor;
  if (g.solver_mode == "picard") {
    cfg.solver.mode = gwrm::SolverMode::picard;
  } else if (g.solver_mode == "newton") {
    cfg.solver.mode = gwrm::SolverMode::newton;
  } else if (g.solver_mode == "semi_implicit") {
    cfg.solver.mode = gwrm::SolverMode::semi_implicit;
  } else {
    throw UsageError("--solver-mode must be picard, newton, or semi_implicit");
  }
  cfg.solver.tol = g.solver_tol;
  cfg.solver.max_iters = g.max_iters;
  cfg.solver.jacobian_reuse = g.jacobian_reuse;
  return cfg;
}

gwrm::StepperConfig make_stepper_config(const StepperOpts& s) {
  gwrm::StepperConfig cfg;
  cfg.rel_tol = s.tol;
  cfg.abs_tol = std::isnan(s.abs_tol) ? s.tol * 1e-3 : s.abs_tol;
  cfg.h0 = s.h0;
  cfg.h_min = s.h_min;
  cfg.h_max = s.h_max;
  cfg.max_steps = s.max_steps;
  return cfg;
}

gwrm::SolverConfig implicit_inner_solver() {
  gwrm::SolverConfig cfg;
  cfg.mode = gwrm::SolverMode::newton;
  cfg.tol = 1e-12;
  cfg.max_iters = 50;
  cfg.jacobian_reuse = 1;
  return cfg;
}

json gwrm_config_json(const gwrm::GwrmConfig& cfg, const GwrmOpts& g) {
  return json{{"K", cfg.K},
              {"epsilon", cfg.epsilon},
              {"initial_dt", cfg.initial_dt},
              {"min_dt", cfg.min_dt},
              {"max_dt", cfg.max_dt},
              {"shrink", cfg.shrink},
              {"grow", cfg.grow},
              {"grow_threshold", cfg.grow_threshold},
              {"tail_floor", cfg.tail_floor},
              {"solver",
               {{"mode", g.solver_mode},
                {"tol", cfg.solver.tol},
                {"max_iters", cfg.solver.max_iters},
                {"jacobian_reuse", cfg.solver.jacobian_reuse}}}};
}

json stepper_config_json(const gwrm::StepperConfig& cfg) {
  return json{{"rel_tol", cfg.rel_tol}, {"abs_tol", cfg.abs_tol},      {"h0", cfg.h0},
              {"h_min", cfg.h_min},     {"h_max", cfg.h_max},          {"max_steps", cfg.max_steps}};
}

json gwrm_stats_json(const gwrm::GwrmSolution& sol) {
  return json{{"status", to_string(sol.status)},
              {"interval_count", sol.interval_count},
              {"total_iterations", sol.total_iterations},
              {"resolve_count", sol.resolve_count},
              {"total_modes", sol.total_modes()},
              {"t_reached", sol.t_end()},
              {"message", sol.message}};
}

json trajectory_stats_json(const gwrm::Trajectory& traj) {
  return json{{"status", gwrm::to_string(traj.status)},
              {"steps_taken", traj.steps_taken},
              {"steps_rejected", traj.steps_rejected},
              {"t_reached", traj.times.back()}};
}

std::vector<gwrm::ExtraColumn> extra_columns_for(const std::string& problem) {
  if (problem == "robertson")
    return {{"y_scaled", [](double, const Eigen::VectorXd& u) { return u(1) * 1e4; }}};
  return {};
}

std::vector<double> sample_times(double a, double b, int n, const std::string& spacing,
                                 double span_hint) {
  if (n < 2) throw UsageError("--samples must be at least 2");
  if (spacing == "linear") return linspace(a, b, n);
  if (spacing == "log") {
    const double lo = a > 0.0 ? a : span_hint * 1e-9;
    if (!(b > lo)) throw UsageError("log sample spacing needs a positive time range");
    return logspace(lo, b, n);
  }
  throw UsageError("--sample-spacing must be linear or log");
}

// ---------------------------------------------------------------------------
// solve

struct SolveOpts {
  CommonOpts common;
  std::string method = "gwrm";
  GwrmOpts gwrm;
  StepperOpts stepper;
  int samples = 1000;
  std::string spacing = "linear";
  std::string smoothing = "none";
  std::string ti_A = "0";  // comma list or "auto"
  double ta_delta = 0.0;
};

int cmd_solve(const SolveOpts& opt) {
  gwrm::OdeProblem p = load_problem(opt.common);
  const std::filesystem::path out(opt.common.out);
  std::filesystem::create_directories(out);

  if (opt.method != "gwrm" && opt.method != "rk4" && opt.method != "trapezoid")
    throw UsageError("--method must be gwrm, rk4, or trapezoid");
  if (opt.smoothing != "none" && opt.method != "gwrm")
    throw UsageError("--smoothing requires --method gwrm");

  gwrm::RunRecord rec;
  rec.problem = opt.common.problem;
  rec.params = p.params;
  rec.method = opt.method;

  int exit_code = 0;
  const auto t0 = std::chrono::steady_clock::now();

  if (opt.method == "gwrm") {
    gwrm::GwrmConfig cfg = make_gwrm_config(opt.gwrm);
    rec.config = gwrm_config_json(cfg, opt.gwrm);
    rec.config["method"] = opt.method;
    rec.config["smoothing"] = opt.smoothing;
    rec.config["samples"] = opt.samples;
    rec.config["t_start"] = p.t_start;
    rec.config["t_end"] = p.t_end;

    gwrm::GwrmSolution sol;          // the solved (possibly transformed) system
    const gwrm::GwrmSolution* out_series = nullptr;  // what lands in the CSV
    gwrm::GwrmSolution recovered;

    if (opt.smoothing == "none") {
      sol = gwrm::solve_adaptive(p, cfg);
      out_series = &sol;
    } else if (opt.smoothing == "ti") {
      Eigen::VectorXd A;
      if (opt.ti_A == "auto") {
        A = gwrm::ti_auto_offsets(p);
      } else {
        std::vector<double> vals = parse_double_list(opt.ti_A, "--ti-A");
        if (vals.size() == 1) {
          A = Eigen::VectorXd::Constant(p.dim, vals[0]);
        } else if (static_cast<int>(vals.size()) == p.dim) {
          A = Eigen::Map<Eigen::VectorXd>(vals.data(), p.dim);
        } else {
          throw UsageError("--ti-A needs 1 value, one value per variable, or 'auto'");
        }
      }
      sol = gwrm::solve_adaptive(gwrm::transform_ti(p, A), cfg);
      recovered = gwrm::recover_from_ti(sol, A).u;
      out_series = &recovered;
      rec.config["ti_A"] = std::vector<double>(A.data(), A.data() + A.size());
    } else if (opt.smoothing == "ta") {
      if (!(opt.ta_delta > 0.0)) throw UsageError("--smoothing ta requires --ta-delta > 0");
      gwrm::TaTransform ta;
      try {
        ta = gwrm::transform_ta(p, opt.ta_delta);
      } catch (const std::domain_error& e) {
        throw UsageError(e.what());
      }
      sol = gwrm::solve_adaptive(ta.problem, cfg);
      recovered = gwrm::recover_ta_average(sol, ta);
      out_series = &recovered;
      rec.config["ta_delta"] = opt.ta_delta;
    } else {
      throw UsageError("--smoothing must be none, ti, or ta");
    }

    rec.wall_time = seconds_since(t0);
    rec.stats = gwrm_stats_json(sol);
    rec.stats["smoothing"] = opt.smoothing;
    exit_code = (sol.status == gwrm::GwrmStatus::completed) ? 0 : 2;

    const std::vector<double> ts =
        sample_times(out_series->t_start(), out_series->t_end(), opt.samples, opt.spacing,
                     p.t_end - p.t_start);
    const Eigen::MatrixXd states = out_series->eval_many(ts);

    std::ostringstream csv;
    gwrm::write_series_csv(csv, ts, states, p.labels, extra_columns_for(opt.common.problem));
    write_file(out / "series.csv", csv.str());
    write_json_file(out / "coeffs.json", gwrm::to_json(*out_series));
    write_json_file(out / "stats.json", rec.stats);
    rec.outputs = {"series.csv", "coeffs.json", "stats.json"};
  } else {
    gwrm::StepperConfig cfg = make_stepper_config(opt.stepper);
    rec.config = stepper_config_json(cfg);
    rec.config["method"] = opt.method;
    rec.config["samples"] = opt.samples;
    rec.config["t_start"] = p.t_start;
    rec.config["t_end"] = p.t_end;

    const gwrm::Trajectory traj = (opt.method == "rk4")
                                      ? gwrm::rk4_adaptive(p, cfg)
                                      : gwrm::trapezoid_adaptive(p, cfg, implicit_inner_solver());
    rec.wall_time = seconds_since(t0);
    rec.stats = trajectory_stats_json(traj);
    exit_code = (traj.status == gwrm::RunStatus::completed) ? 0 : 2;

    const std::vector<double> ts = sample_times(traj.times.front(), traj.times.back(),
                                                opt.samples, opt.spacing, p.t_end - p.t_start);
    const Eigen::MatrixXd states = trajectory_eval_many(traj, ts);

    std::ostringstream csv;
    gwrm::write_series_csv(csv, ts, states, p.labels, extra_columns_for(opt.common.problem));
    write_file(out / "series.csv", csv.str());
    write_json_file(out / "stats.json", rec.stats);
    rec.outputs = {"series.csv", "stats.json"};
  }

  rec.outputs.push_back("run.json");
  write_json_file(out / "run.json", gwrm::to_json(rec));

  std::cout << opt.common.problem << " " << opt.method << ": " << rec.stats["status"].get<std::string>();
  if (rec.stats.contains("interval_count"))
    std::cout << ", " << rec.stats["interval_count"].get<int>() << " intervals";
  if (rec.stats.contains("steps_taken"))
    std::cout << ", " << rec.stats["steps_taken"].get<long>() << " steps";
  std::cout << ", t reached " << gwrm::format_double(rec.stats["t_reached"].get<double>())
            << "\n";
  return exit_code;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOpts {
  CommonOpts common;
  std::vector<std::string> methods{"gwrm", "rk4", "trapezoid"};
  double tol = 1e-3;
  GwrmOpts gwrm;       // epsilon is overridden by --tol
  StepperOpts stepper; // rel tol overridden by --tol
  int samples = 1000;
};

struct MethodResult {
  std::string method;
  std::string status;
  long work = 0;  // intervals or accepted steps
  double wall_time = 0.0;
  double max_err = std::numeric_limits<double>::quiet_NaN();
  double t_reached = 0.0;
  json stats;
  json config;
};

int cmd_compare(const CompareOpts& opt) {
  if (opt.methods.size() < 2) throw UsageError("compare needs at least 2 --methods");
  for (const std::string& m : opt.methods)
    if (m != "gwrm" && m != "rk4" && m != "trapezoid")
      throw UsageError("unknown method '" + m + "' (gwrm, rk4, trapezoid)");

  gwrm::OdeProblem p = load_problem(opt.common);
  const std::filesystem::path out(opt.common.out);
  std::filesystem::create_directories(out);

  // tightest-tolerance reference: implicit for the stiff problem and the
  // linear test, high-accuracy explicit for the chaotic one
  const bool stiff_ref = (opt.common.problem != "lorenz84");
  gwrm::StepperConfig ref_cfg;
  ref_cfg.rel_tol = stiff_ref ? 1e-6 : 1e-10;
  ref_cfg.abs_tol = stiff_ref ? 1e-12 : 1e-13;
  const gwrm::Trajectory ref = stiff_ref
                                   ? gwrm::trapezoid_adaptive(p, ref_cfg, implicit_inner_solver())
                                   : gwrm::rk4_adaptive(p, ref_cfg);
  if (ref.status != gwrm::RunStatus::completed) {
    std::cerr << "compare: reference run (" << (stiff_ref ? "trapezoid" : "rk4")
              << ", rel_tol=" << ref_cfg.rel_tol
              << ") did not complete: " << gwrm::to_string(ref.status) << " at t="
              << gwrm::format_double(ref.times.back()) << "\n";
    return 3;
  }

  std::vector<MethodResult> rows;
  for (const std::string& method : opt.methods) {
    MethodResult r;
    r.method = method;
    const auto t0 = std::chrono::steady_clock::now();

    double t_lo = p.t_start;
    double t_hi = p.t_end;
    std::function<Eigen::VectorXd(double)> eval;

    if (method == "gwrm") {
      GwrmOpts g = opt.gwrm;
      g.epsilon = opt.tol;
      gwrm::GwrmConfig cfg = make_gwrm_config(g);
      gwrm::GwrmSolution sol = gwrm::solve_adaptive(p, cfg);
      r.wall_time = seconds_since(t0);
      r.status = to_string(sol.status);
      r.work = sol.interval_count;
      r.t_reached = sol.t_end();
      r.stats = gwrm_stats_json(sol);
      r.config = gwrm_config_json(cfg, g);
      t_hi = sol.t_end();
      auto shared = std::make_shared<gwrm::GwrmSolution>(std::move(sol));
      eval = [shared](double t) { return shared->eval(t); };
    } else {
      StepperOpts s = opt.stepper;
      s.tol = opt.tol;
      gwrm::StepperConfig cfg = make_stepper_config(s);
      gwrm::Trajectory traj = (method == "rk4")
                                  ? gwrm::rk4_adaptive(p, cfg)
                                  : gwrm::trapezoid_adaptive(p, cfg, implicit_inner_solver());
      r.wall_time = seconds_since(t0);
      r.status = gwrm::to_string(traj.status);
      r.work = traj.steps_taken;
      r.t_reached = traj.times.back();
      r.stats = trajectory_stats_json(traj);
      r.config = stepper_config_json(cfg);
      t_hi = traj.times.back();
      auto shared = std::make_shared<gwrm::Trajectory>(std::move(traj));
      eval = [shared](double t) { return trajectory_eval(*shared, t); };
    }

    if (t_hi > t_lo) {
      double err = 0.0;
      for (double t : linspace(t_lo, t_hi, opt.samples)) {
        const Eigen::VectorXd diff = eval(t) - trajectory_eval(ref, t);
        err = std::max(err, diff.lpNorm<Eigen::Infinity>());
      }
      r.max_err = err;
    }
    rows.push_back(std::move(r));
  }

  // aligned text table
  std::ostringstream tbl;
  tbl << std::left << std::setw(11) << "method" << std::setw(11) << "status" << std::right
      << std::setw(10) << "work" << std::setw(13) << "wall_time" << std::setw(14) << "max_err"
      << "\n";
  for (const MethodResult& r : rows) {
    std::ostringstream werr;
    werr << std::scientific << std::setprecision(3) << r.max_err;
    std::ostringstream wtime;
    wtime << std::fixed << std::setprecision(4) << r.wall_time;
    tbl << std::left << std::setw(11) << r.method << std::setw(11) << r.status << std::right
        << std::setw(10) << r.work << std::setw(13) << wtime.str() << std::setw(14) << werr.str()
        << "\n";
  }
  std::cout << tbl.str();

  // CSV table
  std::ostringstream csv;
  csv << "method,status,work,wall_time,max_err,t_reached\n";
  for (const MethodResult& r : rows)
    csv << r.method << "," << r.status << "," << r.work << ","
        << gwrm::format_double(r.wall_time) << "," << gwrm::format_double(r.max_err) << ","
        << gwrm::format_double(r.t_reached) << "\n";
  write_file(out / "compare.csv", csv.str());

  // one run record per method, so the table is reconstructible
  for (const MethodResult& r : rows) {
    gwrm::RunRecord rec;
    rec.problem = opt.common.problem;
    rec.params = p.params;
    rec.method = r.method;
    rec.config = r.config;
    rec.config["method"] = r.method;
    rec.config["t_start"] = p.t_start;
    rec.config["t_end"] = p.t_end;
    rec.wall_time = r.wall_time;
    rec.stats = r.stats;
    rec.stats["max_err"] = r.max_err;
    rec.stats["work"] = r.work;
    rec.outputs = {"compare.csv", "run-" + r.method + ".json"};
    write_json_file(out / ("run-" + r.method + ".json"), gwrm::to_json(rec));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// lle / modes / steepness

struct LleOpts {
  CommonOpts common;
  double at = std::numeric_limits<double>::quiet_NaN();  // NaN -> problem start
  std::string state;                                     // empty -> problem u0
  double dt = 0.0;
  gwrm::ClassifyConfig classify;
};

int cmd_lle(const LleOpts& opt) {
  gwrm::OdeProblem p = load_problem(opt.common);
  const std::filesystem::path out(opt.common.out);
  std::filesystem::create_directories(out);

  const double t = std::isnan(opt.at) ? p.t_start : opt.at;
  Eigen::VectorXd state = p.u0;
  if (!opt.state.empty()) {
    std::vector<double> vals = parse_double_list(opt.state, "--state");
    if (static_cast<int>(vals.size()) != p.dim)
      throw UsageError("--state needs exactly " + std::to_string(p.dim) + " values");
    state = Eigen::Map<Eigen::VectorXd>(vals.data(), p.dim);
  }

  const auto t0 = std::chrono::steady_clock::now();
  gwrm::LleReport rep;
  try {
    rep = gwrm::lle(p, t, state, opt.dt, opt.classify);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const double wall = seconds_since(t0);

  json j;
  j["problem"] = opt.common.problem;
  j["t"] = rep.t;
  j["state"] = std::vector<double>(rep.state.data(), rep.state.data() + rep.state.size());
  json jac = json::array();
  for (Eigen::Index i = 0; i < rep.jacobian.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < rep.jacobian.cols(); ++k) row.push_back(rep.jacobian(i, k));
    jac.push_back(std::move(row));
  }
  j["jacobian"] = std::move(jac);
  json eigs = json::array();
  for (const auto& g : rep.eigenvalues) eigs.push_back({{"re", g.real()}, {"im", g.imag()}});
  j["eigenvalues"] = std::move(eigs);
  j["classification"] = gwrm::to_string(rep.classification);
  j["gamma_dt"] = rep.gamma_dt;
  write_json_file(out / "lle.json", j);

  gwrm::RunRecord rec;
  rec.problem = opt.common.problem;
  rec.params = p.params;
  rec.method = "lle";
  rec.config = {{"t", t},
                {"dt", opt.dt},
                {"chaos_threshold", opt.classify.chaos_threshold},
                {"stiff_threshold", opt.classify.stiff_threshold},
                {"spread", opt.classify.spread}};
  rec.wall_time = wall;
  rec.stats = {{"classification", gwrm::to_string(rep.classification)}};
  rec.outputs = {"lle.json", "run.json"};
  write_json_file(out / "run.json", gwrm::to_json(rec));

  std::cout << "exponents at t=" << gwrm::format_double(t) << ":";
  for (const auto& g : rep.eigenvalues) {
    std::cout << " " << gwrm::format_double(g.real());
    if (g.imag() != 0.0) std::cout << (g.imag() > 0 ? "+" : "") << gwrm::format_double(g.imag()) << "i";
  }
  std::cout << "\nclassification: " << gwrm::to_string(rep.classification) << "\n";
  return 0;
}

struct ModesOpts {
  std::string out = ".";
  std::uint64_t seed = 0;
  double extrema = 0.0;
  double epsilon = 0.01;
  int order = 0;
};

int cmd_modes(const ModesOpts& opt) {
  gwrm::ModeEstimate est;
  try {
    est = gwrm::estimate_modes(opt.extrema, opt.epsilon, opt.order);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::filesystem::path out(opt.out);
  std::filesystem::create_directories(out);

  json j{{"N_e", est.N_e}, {"epsilon", est.epsilon}, {"O_t", est.O_t}, {"K_a", est.K_a}};
  write_json_file(out / "modes.json", j);

  gwrm::RunRecord rec;
  rec.problem = "";
  rec.method = "modes";
  rec.config = {{"extrema", opt.extrema}, {"epsilon", opt.epsilon}, {"order", opt.order}};
  rec.stats = j;
  rec.outputs = {"modes.json", "run.json"};
  write_json_file(out / "run.json", gwrm::to_json(rec));

  std::cout << "estimated modes K_a = " << est.K_a << "\n";
  return 0;
}

struct SteepnessOpts {
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string input;
  std::string column;  // empty -> first variable column
};

int cmd_steepness(const SteepnessOpts& opt) {
  if (opt.input.empty()) throw UsageError("--input CSV file is required");
  std::ifstream is(opt.input);
  if (!is) throw UsageError("cannot open '" + opt.input + "'");

  std::string header;
  if (!std::getline(is, header)) throw UsageError("'" + opt.input + "' is empty");
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string item;
    while (std::getline(ss, item, ',')) cols.push_back(item);
  }
  if (cols.size() < 2 || cols[0] != "t")
    throw UsageError("'" + opt.input + "' is not a series CSV (expected header t,<labels...>)");

  std::size_t col = 1;
  if (!opt.column.empty()) {
    const auto it = std::find(cols.begin(), cols.end(), opt.column);
    if (it == cols.end() || it == cols.begin())
      throw UsageError("column '" + opt.column + "' not found in '" + opt.input + "'");
    col = static_cast<std::size_t>(it - cols.begin());
  }

  std::vector<double> times, values;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::vector<std::string> fields;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    if (fields.size() != cols.size())
      throw UsageError("malformed CSV row in '" + opt.input + "'");
    times.push_back(std::strtod(fields[0].c_str(), nullptr));
    values.push_back(std::strtod(fields[col].c_str(), nullptr));
  }

  gwrm::SteepnessReport rep;
  try {
    rep = gwrm::steepness(times, values);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const std::filesystem::path out(opt.out);
  std::filesystem::create_directories(out);
  json j{{"input", opt.input}, {"column", cols[col]},   {"S", rep.S},
         {"argmax_t", rep.argmax_t}, {"u_max", rep.u_max}, {"u_min", rep.u_min}};
  write_json_file(out / "steepness.json", j);

  gwrm::RunRecord rec;
  rec.problem = "";
  rec.method = "steepness";
  rec.config = {{"input", opt.input}, {"column", cols[col]}};
  rec.stats = j;
  rec.outputs = {"steepness.json", "run.json"};
  write_json_file(out / "run.json", gwrm::to_json(rec));

  std::cout << "steepness S = " << gwrm::format_double(rep.S) << " (column " << cols[col]
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* cmd, CommonOpts& c, bool with_problem = true) {
  if (with_problem) {
    cmd->add_option("--problem", c.problem, "Problem name from the registry");
    cmd->add_option("--param", c.params, "Problem parameter override key=value (repeatable)");
    cmd->add_option("--t-start", c.t_start, "Override the problem start time");
    cmd->add_option("--t-end", c.t_end, "Override the problem end time");
  }
  cmd->add_option("--out", c.out, "Output directory for artifacts")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed recorded with the run")->capture_default_str();
}

void add_gwrm(CLI::App* cmd, GwrmOpts& g, bool with_epsilon = true) {
  cmd->add_option("--K", g.K, "Chebyshev order per interval")->capture_default_str();
  if (with_epsilon)
    cmd->add_option("--epsilon", g.epsilon, "Tail-ratio acceptance threshold")
        ->capture_default_str();
  cmd->add_option("--initial-dt", g.initial_dt, "First interval length (0 = full span)")
      ->capture_default_str();
  cmd->add_option("--min-dt", g.min_dt, "Smallest interval length (0 = 1e-9 of span)")
      ->capture_default_str();
  cmd->add_option("--max-dt", g.max_dt, "Largest interval length (0 = full span)")
      ->capture_default_str();
  cmd->add_option("--tail-floor", g.tail_floor,
                  "Relative floor below which tails count as resolved")
      ->capture_default_str();
  cmd->add_option("--solver-mode", g.solver_mode, "picard | newton | semi_implicit")
      ->capture_default_str();
  cmd->add_option("--solver-tol", g.solver_tol, "Nonlinear solver residual tolerance")
      ->capture_default_str();
  cmd->add_option("--max-iters", g.max_iters, "Nonlinear solver iteration cap")
      ->capture_default_str();
  cmd->add_option("--jacobian-reuse", g.jacobian_reuse, "Iterations between Jacobian refreshes")
      ->capture_default_str();
}

void add_stepper(CLI::App* cmd, StepperOpts& s, bool with_tol = true) {
  if (with_tol)
    cmd->add_option("--tol", s.tol, "Stepper relative tolerance")->capture_default_str();
  cmd->add_option("--abs-tol", s.abs_tol, "Stepper absolute tolerance (default tol*1e-3)");
  cmd->add_option("--h0", s.h0, "Initial step (0 = span/1000)")->capture_default_str();
  cmd->add_option("--h-min", s.h_min, "Smallest step")->capture_default_str();
  cmd->add_option("--h-max", s.h_max, "Largest step");
  cmd->add_option("--max-steps", s.max_steps, "Accepted-step budget")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-spectral ODE solver benchmark harness"};
  app.require_subcommand(1);

  SolveOpts solve_opts;
  CLI::App* solve = app.add_subcommand("solve", "Run one solver on one problem");
  add_common(solve, solve_opts.common);
  solve->add_option("--method", solve_opts.method, "gwrm | rk4 | trapezoid")
      ->capture_default_str();
  add_gwrm(solve, solve_opts.gwrm);
  add_stepper(solve, solve_opts.stepper);
  solve->add_option("--samples", solve_opts.samples, "Series CSV sample count")
      ->capture_default_str();
  solve->add_option("--sample-spacing", solve_opts.spacing, "linear | log")
      ->capture_default_str();
  solve->add_option("--smoothing", solve_opts.smoothing, "none | ti | ta")
      ->capture_default_str();
  solve->add_option("--ti-A", solve_opts.ti_A,
                    "Integral-transform offsets: value list or 'auto'")
      ->capture_default_str();
  solve->add_option("--ta-delta", solve_opts.ta_delta, "Window half-width for --smoothing ta");

  CompareOpts cmp_opts;
  CLI::App* cmp = app.add_subcommand("compare", "Run several methods at equal tolerance");
  add_common(cmp, cmp_opts.common);
  cmp->add_option("--methods", cmp_opts.methods, "Methods to compare (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  cmp->add_option("--tol", cmp_opts.tol,
                  "Shared accuracy target (tail-ratio threshold / stepper rel tol)")
      ->capture_default_str();
  add_gwrm(cmp, cmp_opts.gwrm, /*with_epsilon=*/false);
  add_stepper(cmp, cmp_opts.stepper, /*with_tol=*/false);
  cmp->add_option("--samples", cmp_opts.samples, "Error-scan sample count")
      ->capture_default_str();

  LleOpts lle_opts;
  CLI::App* lle_cmd = app.add_subcommand("lle", "Frozen-Jacobian exponents at a state");
  add_common(lle_cmd, lle_opts.common);
  lle_cmd->add_option("--at", lle_opts.at, "Evaluation time (default: problem start)");
  lle_cmd->add_option("--state", lle_opts.state,
                      "Comma-separated state (default: initial condition)");
  lle_cmd->add_option("--dt", lle_opts.dt, "Interval length for |Re gamma|*dt products")
      ->capture_default_str();
  lle_cmd->add_option("--chaos-threshold", lle_opts.classify.chaos_threshold,
                      "Growth-rate threshold")
      ->capture_default_str();
  lle_cmd->add_option("--stiff-threshold", lle_opts.classify.stiff_threshold,
                      "Decay-magnitude threshold")
      ->capture_default_str();
  lle_cmd->add_option("--spread", lle_opts.classify.spread, "Fast/slow separation factor")
      ->capture_default_str();

  ModesOpts modes_opts;
  CLI::App* modes = app.add_subcommand("modes", "Estimate required Chebyshev modes");
  modes->add_option("--extrema", modes_opts.extrema, "Extrema count of the signal")
      ->required();
  modes->add_option("--epsilon", modes_opts.epsilon, "Target accuracy (0.01 or 0.001)")
      ->capture_default_str();
  modes->add_option("--order", modes_opts.order, "Temporal system order correction")
      ->capture_default_str();
  modes->add_option("--out", modes_opts.out, "Output directory")->capture_default_str();
  modes->add_option("--seed", modes_opts.seed, "Random seed recorded with the run");

  SteepnessOpts steep_opts;
  CLI::App* steep = app.add_subcommand("steepness", "Normalized maximum slope of a series");
  steep->add_option("--input", steep_opts.input, "Series CSV produced by solve");
  steep->add_option("--column", steep_opts.column, "Column label (default: first variable)");
  steep->add_option("--out", steep_opts.out, "Output directory")->capture_default_str();
  steep->add_option("--seed", steep_opts.seed, "Random seed recorded with the run");

  int rc = 0;
  solve->callback([&] { rc = cmd_solve(solve_opts); });
  cmp->callback([&] { rc = cmd_compare(cmp_opts); });
  lle_cmd->callback([&] { rc = cmd_lle(lle_opts); });
  modes->callback([&] { rc = cmd_modes(modes_opts); });
  steep->callback([&] { rc = cmd_steepness(steep_opts); });

  std::string config_file;
  for (CLI::App* cmd : {solve, cmp, lle_cmd, modes, steep}) {
    cmd->add_option("--config", config_file,
                    "File of key = value lines naming this subcommand's options "
                    "(defaults < file < flags)");
    // a later flag overrides an earlier (config-injected) value
    for (CLI::Option* o : cmd->get_options([](CLI::Option* o) { return o->nonpositional(); }))
      if (o->get_expected_max() == 1)
        o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty() && app.get_subcommand_no_throw(args[0]) != nullptr) {
      std::string cfg_path;
      for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
          cfg_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
          cfg_path = args[i].substr(9);
      }
      if (!cfg_path.empty()) {
        const std::vector<std::string> toks = config_tokens(cfg_path);
        args.insert(args.begin() + 1, toks.begin(), toks.end());
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
