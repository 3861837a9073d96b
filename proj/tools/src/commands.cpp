#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "gvs/error.hpp"
#include "gvs/estimation.hpp"
#include "gvs/kinematics.hpp"
#include "gvs/reduction_io.hpp"

namespace gvs::app {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Context {
  const ScenarioConfig& cfg;
  const RunOptions& opts;
  std::uint64_t seed;
  fs::path out;
  FileHeader header;

  Context(const ScenarioConfig& c, const RunOptions& o)
      : cfg(c), opts(o), seed(o.seed.value_or(c.seed)), out(o.out.value_or(c.output)) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
    header = {robot_hash(c), seed};
  }

  std::string path(const std::string& name) const { return (out / name).string(); }

  void log(const std::string& msg) const {
    if (!opts.quiet) std::cerr << msg << '\n';
  }
};

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Eigen::VectorXd> tension_sets(const ReductionConfig& r) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& t : r.tension_sets) out.push_back(to_vector(t));
  return out;
}

StaticsOptions statics_options(const ScenarioConfig& cfg) {
  StaticsOptions o;
  o.tolerance = cfg.simulation.tolerance;
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ModeFile load_modes(const Context& ctx) {
  const std::string path = !ctx.opts.inputs.empty() && ctx.opts.inputs[0].ends_with(".gvsmodes")
                               ? ctx.opts.inputs[0]
                               : ctx.path("modes.gvsmodes");
  return read_modes(path);
}

// Test input for compare/bench: the reduction test signal if present,
// otherwise the simulation signal.
std::pair<ActuationSignal, double> test_input(const Context& ctx, int channels) {
  const auto& r = ctx.cfg.reduction;
  if (r.test_signal) {
    const double horizon = r.test_horizon > 0 ? r.test_horizon : ctx.cfg.simulation.horizon;
    return {build_signal(*r.test_signal, channels, horizon, ctx.seed + 1), horizon};
  }
  const double horizon = ctx.cfg.simulation.horizon;
  return {build_signal(ctx.cfg.simulation.signal, channels, horizon, ctx.seed), horizon};
}

void write_trajectory(const std::string& path, const Model& model, const Trajectory& traj) {
  CsvWriter csv(path);
  csv.cell("time");
  for (int i = 0; i < model.dof(); ++i) csv.cell("q" + std::to_string(i + 1));
  for (int i = 0; i < model.dof(); ++i) csv.cell("qd" + std::to_string(i + 1));
  csv.cell("tip_x").cell("tip_y").cell("tip_z");
  csv.end();
  const auto tips = tip_trajectory(model, traj);
  for (std::size_t k = 0; k < traj.time.size(); ++k) {
    csv.cell(traj.time[k]).cells(traj.q[k]).cells(traj.qd[k]);
    csv.cell(tips[k].x()).cell(tips[k].y()).cell(tips[k].z());
    csv.end();
  }
}

void simulate_statics(const Context& ctx, const Model& model) {
  const auto cases = static_cases(ctx.cfg.simulation, model.actuator_count());
  const SnapshotLayout layout = snapshot_layout(ctx.cfg.reduction);
  ctx.log("statics: " + std::to_string(cases.size()) + " cases, " + std::to_string(model.dof()) + " dof");
  const auto t0 = Clock::now();
  SweepResult sweep = collect_static_sweep(model, cases, layout, ctx.opts.jobs, statics_options(ctx.cfg));
  ctx.log("statics: solved in " + brief(seconds_since(t0)) + " s");

  CsvWriter csv(ctx.path("statics.csv"));
  csv.cell("case");
  for (int a = 0; a < model.actuator_count(); ++a) csv.cell("T" + std::to_string(a + 1));
  csv.cell("status");
  for (int i = 0; i < model.dof(); ++i) csv.cell("q" + std::to_string(i + 1));
  csv.cell("tip_x").cell("tip_y").cell("tip_z");
  csv.end();
  for (std::size_t c = 0; c < cases.size(); ++c) {
    csv.cell(static_cast<long>(c)).cells(cases[c]);
    const Eigen::VectorXd& q = sweep.solutions[c];
    if (q.size() == 0) {
      csv.cell("failed");
      for (int i = 0; i < model.dof() + 3; ++i) csv.cell("nan");
    } else {
      const Vec3 tip = tip_position(model, q);
      csv.cell("ok").cells(q).cell(tip.x()).cell(tip.y()).cell(tip.z());
    }
    csv.end();
  }
  sweep.snapshots.metadata["scenario"] = ctx.cfg.name.empty() ? "-" : ctx.cfg.name;
  write_snapshots(ctx.path("snapshots.gvssnap"), sweep.snapshots, ctx.header);
  if (!sweep.failed.empty())
    throw SolverError(std::to_string(sweep.failed.size()) + " of " + std::to_string(cases.size()) +
                      " static cases did not converge (first: case " + std::to_string(sweep.failed.front()) + ")");
}

void simulate_dynamics(const Context& ctx, const Model& model) {
  const auto& sim = ctx.cfg.simulation;
  const ActuationSignal signal = build_signal(sim.signal, model.actuator_count(), sim.horizon, ctx.seed);
  DynamicsOptions options = dynamics_options(sim);
  options.include_initial = true;
  ctx.log("dynamics: " + brief(sim.horizon) + " s, " + std::to_string(model.dof()) + " dof");
  const auto t0 = Clock::now();
  const Trajectory traj = solve_dynamics(model, signal, sim.horizon, options);
  ctx.log("dynamics: " + std::to_string(traj.steps) + " steps in " + brief(seconds_since(t0)) + " s");
  write_trajectory(ctx.path("trajectory.csv"), model, traj);

  // Snapshots exclude the initial state.
  Trajectory tail = traj;
  if (!tail.time.empty()) {
    tail.time.erase(tail.time.begin());
    tail.q.erase(tail.q.begin());
    tail.qd.erase(tail.qd.begin());
  }
  SnapshotMatrix snaps = snapshots_from_trajectory(model, tail, snapshot_layout(ctx.cfg.reduction));
  snaps.metadata["scenario"] = ctx.cfg.name.empty() ? "-" : ctx.cfg.name;
  write_snapshots(ctx.path("snapshots.gvssnap"), snaps, ctx.header);

  const int markers = static_cast<int>(model.robot().markers.size());
  if (markers > 0) {
    std::vector<int> all(markers);
    for (int m = 0; m < markers; ++m) all[m] = m;
    MarkerSeries series;
    for (std::size_t k = 0; k < traj.time.size(); ++k) {
      series.time.push_back(traj.time[k]);
      series.positions.push_back(predict_markers(model, traj.q[k], all));
    }
    write_marker_csv(ctx.path("markers.csv"), series);
  }
}

}  // namespace

void simulate(const ScenarioConfig& cfg, const RunOptions& opts) {
  const Context ctx(cfg, opts);
  const Model model = build_model(cfg.robot);
  if (cfg.simulation.kind == "statics")
    simulate_statics(ctx, model);
  else
    simulate_dynamics(ctx, model);
}

void reduce(const ScenarioConfig& cfg, const RunOptions& opts) {
  const Context ctx(cfg, opts);
  std::vector<std::string> inputs = opts.inputs;
  if (inputs.empty()) inputs.push_back(ctx.path("snapshots.gvssnap"));
  SnapshotMatrix all;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    SnapshotMatrix s = read_snapshots(inputs[i]);
    if (i == 0) {
      all = std::move(s);
      continue;
    }
    if (s.layout != all.layout || s.data.rows() != all.data.rows() || s.abscissae != all.abscissae)
      throw IoError(inputs[i] + ": snapshot layout differs from " + inputs[0]);
    Eigen::MatrixXd joined(all.data.rows(), all.data.cols() + s.data.cols());
    joined << all.data, s.data;
    all.data = std::move(joined);
  }
  if (all.data.cols() == 0) throw IoError("no snapshots in " + inputs[0]);
  ctx.log("reduce: " + std::to_string(all.data.rows()) + " x " + std::to_string(all.data.cols()) + " snapshots");

  const auto t0 = Clock::now();
  const PodResult result = pod(all);
  ctx.log("reduce: decomposition in " + brief(seconds_since(t0)) + " s");
  const int m = static_cast<int>(result.sigma.size());
  const int rank = std::max(1, numerical_rank(result));
  const int n = std::min(cfg.reduction.modes > 0 ? cfg.reduction.modes : m, rank);
  if (n < std::min(cfg.reduction.modes > 0 ? cfg.reduction.modes : m, m))
    ctx.log("reduce: keeping " + std::to_string(n) + " modes, the numerical rank of the snapshots");

  ModeFile modes;
  modes.basis = build_reduced_basis(result, n);
  modes.sigma_all = result.sigma;
  modes.header = ctx.header;
  modes.metadata["snapshots"] = std::to_string(all.data.cols());
  modes.metadata["scenario"] = cfg.name.empty() ? "-" : cfg.name;
  write_modes(ctx.path("modes.gvsmodes"), modes);

  CsvWriter sigma(ctx.path("sigma.csv"));
  sigma.cell("index").cell("sigma").end();
  for (int i = 0; i < m; ++i) sigma.cell(i + 1).cell(result.sigma[i]).end();
  CsvWriter energy(ctx.path("energy.csv"));
  energy.cell("r").cell("epsilon").end();
  for (int r = 1; r <= m; ++r) energy.cell(r).cell(energy_fraction(result, r)).end();
  for (int r = 1; r <= std::min(m, 10); ++r) ctx.log("  eps(" + std::to_string(r) + ") = " + brief(energy_fraction(result, r)));
}

void compare(const ScenarioConfig& cfg, const RunOptions& opts) {
  const Context ctx(cfg, opts);
  const ModeFile modes = load_modes(ctx);
  const Robot robot = build_robot(cfg.robot);
  const Model hom = make_full_model(robot, build_bases(cfg.robot));
  std::vector<int> n_list = cfg.reduction.n_list;
  if (n_list.empty())
    for (int n = 1; n <= modes.basis.dof(); ++n) n_list.push_back(n);

  std::vector<TruncationRow> rows;
  double hom_seconds = 0.0;
  if (!cfg.reduction.tension_sets.empty()) {
    const auto sets = tension_sets(cfg.reduction);
    std::vector<Vec3> tips;
    for (const auto& t : sets) {
      const auto t0 = Clock::now();
      const auto sol = solve_statics(hom, t, Eigen::VectorXd(), statics_options(cfg));
      hom_seconds += seconds_since(t0);
      tips.push_back(tip_position(hom, sol.q));
    }
    rows = static_truncation_sweep(robot, modes.basis, sets, n_list, tips, hom_seconds, statics_options(cfg));
  } else {
    if (cfg.simulation.kind != "dynamics") throw ConfigError("reduction: compare needs tension_sets or a dynamic run");
    const auto [signal, horizon] = test_input(ctx, hom.actuator_count());
    DynamicsOptions options = dynamics_options(cfg.simulation);
    const auto t0 = Clock::now();
    const Trajectory ref = solve_dynamics(hom, signal, horizon, options);
    hom_seconds = seconds_since(t0);
    rows = truncation_sweep(robot, modes.basis, signal, horizon, options, n_list, tip_trajectory(hom, ref), hom_seconds);
  }

  CsvWriter csv(ctx.path("compare.csv"));
  csv.cell("n").cell("mean_error").cell("std_error").cell("max_error").cell("total_error").cell("status").end();
  CsvWriter timing(ctx.path("compare_timing.csv"));
  timing.cell("n").cell("seconds").cell("normalized_time").cell("speedup").end();
  timing.cell("hom").cell(hom_seconds).cell(1.0).cell(1.0).end();
  for (const auto& r : rows) {
    csv.cell(r.n).cell(r.mean_error).cell(r.std_error).cell(r.max_error).cell(r.total_error);
    csv.cell(r.ok ? std::string("ok") : "failed: " + r.message).end();
    timing.cell(r.n).cell(r.seconds).cell(r.normalized_time);
    timing.cell(r.normalized_time > 0 ? 1.0 / r.normalized_time : 0.0).end();
    ctx.log("  n=" + std::to_string(r.n) + " mean tip error " + brief(r.mean_error) + " m, normalized time " +
            brief(r.normalized_time) + (r.ok ? "" : " (failed: " + r.message + ")"));
  }
}

void estimate(const ScenarioConfig& cfg, const RunOptions& opts) {
  const Context ctx(cfg, opts);
  const auto& est = cfg.estimation;
  if (est.estimation_markers.empty()) throw ConfigError("estimation.estimation_markers: must not be empty");
  const std::string modes_path = ctx.path("modes.gvsmodes");
  const ModeFile modes = read_modes(modes_path);
  const int n = std::min(est.modes, modes.basis.dof());
  const ReducedBasis basis = truncate(modes.basis, n);
  const Model rom = reduced_model(build_robot(cfg.robot), basis);
  const int markers = static_cast<int>(rom.robot().markers.size());

  std::string meas_path = !opts.inputs.empty() ? opts.inputs[0] : est.measurements;
  if (meas_path.empty()) meas_path = ctx.path("markers.csv");
  const MarkerSeries truth = read_marker_csv(meas_path, markers);
  MarkerSeries measured = truth;
  if (est.noise > 0) {
    std::mt19937_64 rng(ctx.seed);
    std::normal_distribution<double> noise(0.0, est.noise);
    for (auto& frame : measured.positions)
      for (auto& p : frame)
        for (int c = 0; c < 3; ++c) p[c] += noise(rng);
  }

  EstimationProblem problem;
  problem.model = &rom;
  problem.estimation_markers = est.estimation_markers;
  problem.evaluation_markers = est.evaluation_markers;
  problem.q_min = basis.q_min;
  problem.q_max = basis.q_max;
  EstimationOptions options;
  options.analytic_jacobian = est.analytic_jacobian;
  ctx.log("estimate: " + std::to_string(measured.time.size()) + " frames, " + std::to_string(n) + " modes");
  const auto estimates = estimate_sequence(problem, measured.positions, options);

  std::vector<int> all(markers);
  for (int m = 0; m < markers; ++m) all[m] = m;
  CsvWriter csv(ctx.path("estimation.csv"));
  csv.cell("time");
  for (int i = 0; i < n; ++i) csv.cell("q" + std::to_string(i + 1));
  for (int m = 0; m < markers; ++m) csv.cell("error_m" + std::to_string(m));
  csv.end();
  for (std::size_t f = 0; f < estimates.size(); ++f) {
    csv.cell(measured.time[f]).cells(estimates[f].q);
    const auto p = predict_markers(rom, estimates[f].q, all);
    for (int m = 0; m < markers; ++m) csv.cell((p[m] - truth.positions[f][m]).norm());
    csv.end();
  }

  const auto stats = evaluate_heldout(rom, estimates, all, truth.positions);
  CsvWriter summary(ctx.path("estimation_summary.csv"));
  summary.cell("marker").cell("role").cell("mean_error").cell("max_error").end();
  for (const auto& s : stats) {
    const bool used = std::count(est.estimation_markers.begin(), est.estimation_markers.end(), s.marker) > 0;
    const bool held = std::count(est.evaluation_markers.begin(), est.evaluation_markers.end(), s.marker) > 0;
    const std::string role = used ? "estimation" : held ? "evaluation" : "other";
    summary.cell(s.marker).cell(role).cell(s.mean).cell(s.max).end();
    ctx.log("  marker " + std::to_string(s.marker) + " (" + role + "): mean " + brief(s.mean) + " m, max " + brief(s.max) + " m");
  }
  CsvWriter timing(ctx.path("estimation_timing.csv"));
  timing.cell("frame").cell("seconds").cell("iterations").cell("converged").end();
  double total = 0.0;
  for (std::size_t f = 0; f < estimates.size(); ++f) {
    timing.cell(static_cast<long>(f)).cell(estimates[f].seconds).cell(estimates[f].iterations);
    timing.cell(estimates[f].converged ? 1 : 0).end();
    total += estimates[f].seconds;
  }
  if (!estimates.empty()) ctx.log("  mean time per frame " + brief(total / estimates.size()) + " s");
}

void bench(const ScenarioConfig& cfg, const RunOptions& opts) {
  const Context ctx(cfg, opts);
  const ModeFile modes = load_modes(ctx);
  const Robot robot = build_robot(cfg.robot);
  const Model hom = make_full_model(robot, build_bases(cfg.robot));
  std::vector<int> n_list = cfg.reduction.n_list;
  if (n_list.empty()) n_list.push_back(modes.basis.dof());
  const int reps = cfg.bench.repetitions;

  std::function<double(const Model&)> run_once;
  if (!cfg.reduction.tension_sets.empty()) {
    const auto sets = tension_sets(cfg.reduction);
    run_once = [sets, &cfg](const Model& m) {
      const auto t0 = Clock::now();
      for (const auto& t : sets) solve_statics(m, t, Eigen::VectorXd(), statics_options(cfg));
      return seconds_since(t0);
    };
  } else {
    const auto input = test_input(ctx, hom.actuator_count());
    const DynamicsOptions options = dynamics_options(cfg.simulation);
    run_once = [input, options](const Model& m) {
      const auto t0 = Clock::now();
      solve_dynamics(m, input.first, input.second, options);
      return seconds_since(t0);
    };
  }
  auto timed = [&](const Model& m) {
    run_once(m);  // warm-up
    std::vector<double> t;
    for (int r = 0; r < reps; ++r) t.push_back(run_once(m));
    return median(t);
  };

  const double hom_time = timed(hom);
  CsvWriter csv(ctx.path("bench.csv"));
  csv.cell("n").cell("hom_seconds").cell("rom_seconds").cell("speedup").cell("normalized_time").end();
  for (int n : n_list) {
    const Model rom = reduced_model(robot, truncate(modes.basis, n));
    const double rom_time = timed(rom);
    csv.cell(n).cell(hom_time).cell(rom_time).cell(hom_time / rom_time).cell(rom_time / hom_time).end();
    ctx.log("  n=" + std::to_string(n) + " speed-up " + brief(hom_time / rom_time));
  }
}

MarkerSeries read_marker_csv(const std::string& path, int markers) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open measurement file: " + path);
  MarkerSeries s;
  std::string line;
  if (!std::getline(is, line)) throw IoError(path + ": empty file");
  long row = 1;
  const std::size_t expected = 1 + 3 * static_cast<std::size_t>(markers);
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size() && tok.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw IoError(path + ": row " + std::to_string(row) + ": malformed value '" + tok + "'");
      }
    }
    if (values.size() != expected)
      throw IoError(path + ": row " + std::to_string(row) + ": expected " + std::to_string(expected) + " columns, found " +
                    std::to_string(values.size()));
    s.time.push_back(values[0]);
    std::vector<Vec3> frame;
    for (int m = 0; m < markers; ++m) frame.emplace_back(values[1 + 3 * m], values[2 + 3 * m], values[3 + 3 * m]);
    s.positions.push_back(std::move(frame));
  }
  return s;
}

void write_marker_csv(const std::string& path, const MarkerSeries& series) {
  CsvWriter csv(path);
  csv.cell("time");
  const std::size_t markers = series.positions.empty() ? 0 : series.positions.front().size();
  for (std::size_t m = 0; m < markers; ++m)
    csv.cell("m" + std::to_string(m) + "_x").cell("m" + std::to_string(m) + "_y").cell("m" + std::to_string(m) + "_z");
  csv.end();
  for (std::size_t f = 0; f < series.time.size(); ++f) {
    csv.cell(series.time[f]);
    for (const auto& p : series.positions[f]) csv.cell(p.x()).cell(p.y()).cell(p.z());
    csv.end();
  }
}

int run(const std::string& command, const std::string& config_path, const RunOptions& opts) {
  try {
    if (config_path.empty()) throw ConfigError("--config is required");
    const ScenarioConfig cfg = load_config(config_path);
    if (command == "simulate")
      simulate(cfg, opts);
    else if (command == "reduce")
      reduce(cfg, opts);
    else if (command == "compare")
      compare(cfg, opts);
    else if (command == "estimate")
      estimate(cfg, opts);
    else if (command == "bench")
      bench(cfg, opts);
    else
      throw ConfigError("unknown command '" + command + "'");
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidSpec& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what();
    if (e.residual() >= 0) std::cerr << " (residual " << e.residual() << ")";
    if (e.time() >= 0) std::cerr << " (t = " << e.time() << " s)";
    std::cerr << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace gvs::app
