#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "lpvmpc/config.hpp"
#include "lpvmpc/controller.hpp"
#include "lpvmpc/io.hpp"
#include "lpvmpc/metrics.hpp"
#include "lpvmpc/plot.hpp"
#include "lpvmpc/simulator.hpp"
#include "lpvmpc/trajectory.hpp"
#include "lpvmpc/tuner.hpp"

namespace fs = std::filesystem;
using namespace lpvmpc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAborted = 2;

ReferenceTrajectory load_trajectory(const fs::path& path, const TrajectoryOptions& opts) {
  if (!fs::exists(path)) {
    throw ConfigError("trajectory file does not exist: " + path.string());
  }
  const TrajectoryCsv csv = read_trajectory_csv(path);
  if (csv.v.empty()) {
    return ReferenceTrajectory::from_xy(csv.x, csv.y, opts);
  }
  return ReferenceTrajectory::from_xyv(csv.x, csv.y, csv.v, opts);
}

void write_plots(const fs::path& base, const ReferenceTrajectory& traj, const RunLog& log) {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> psi;
  std::vector<double> psi_ref;
  std::vector<double> e_d;
  std::vector<double> e_theta;
  t.reserve(log.rows.size());
  double psi_cont = log.rows.empty() ? 0.0 : log.rows.front().truth.psi;
  double psi_ref_cont = log.rows.empty() ? 0.0 : log.rows.front().psi_ref;
  for (const RunRecord& r : log.rows) {
    t.push_back(r.t);
    x.push_back(r.truth.x);
    y.push_back(r.truth.y);
    // Unwrap both yaw traces for readability.
    psi_cont += wrap_angle(r.truth.psi - psi_cont);
    psi_ref_cont += wrap_angle(r.psi_ref - psi_ref_cont);
    psi.push_back(psi_cont);
    psi_ref.push_back(psi_ref_cont);
    e_d.push_back(r.e_d);
    e_theta.push_back(r.e_theta);
  }
  std::vector<double> rx;
  std::vector<double> ry;
  for (const PathPoint& p : traj.points()) {
    rx.push_back(p.x);
    ry.push_back(p.y);
  }
  if (traj.closed() && !rx.empty()) {
    rx.push_back(rx.front());
    ry.push_back(ry.front());
  }

  plot::Figure overlay;
  overlay.title = "Trajectory tracking";
  overlay.xlabel = "X [m]";
  overlay.ylabel = "Y [m]";
  overlay.equal_aspect = true;
  overlay.series.push_back({"reference", rx, ry, "#888888", 1.5, true});
  overlay.series.push_back({"vehicle", x, y, "#d62728", 1.5, false});
  overlay.save(base.string() + "_trajectory.svg");

  plot::Figure yaw;
  yaw.title = "Yaw tracking";
  yaw.xlabel = "t [s]";
  yaw.ylabel = "psi [rad]";
  yaw.series.push_back({"reference", t, psi_ref, "#888888", 1.5, true});
  yaw.series.push_back({"vehicle", t, psi, "#1f77b4", 1.5, false});
  yaw.save(base.string() + "_yaw.svg");

  plot::Figure lat;
  lat.title = "Lateral error";
  lat.xlabel = "t [s]";
  lat.ylabel = "e_d [m]";
  lat.series.push_back({"e_d", t, e_d, "#2ca02c", 1.5, false});
  lat.save(base.string() + "_lateral_error.svg");

  plot::Figure ori;
  ori.title = "Orientation error";
  ori.xlabel = "t [s]";
  ori.ylabel = "e_theta [rad]";
  ori.series.push_back({"e_theta", t, e_theta, "#9467bd", 1.5, false});
  ori.save(base.string() + "_orientation_error.svg");
}

int run_one_simulation(const fs::path& config_path, const std::string& out_dir_override,
                       long seed_override, bool lockstep) {
  RunConfig cfg;
  ReferenceTrajectory traj;
  try {
    cfg = parse_run_config(config_path);
    if (cfg.trajectory_file.empty()) {
      throw ConfigError(config_path.string() + ": trajectory.file is required");
    }
    if (!out_dir_override.empty()) {
      cfg.out_dir = out_dir_override;
    }
    if (seed_override >= 0) {
      cfg.sim.noise.seed = static_cast<std::uint64_t>(seed_override);
    }
    cfg.sim.lockstep = cfg.sim.lockstep || lockstep;
    traj = load_trajectory(cfg.trajectory_file, cfg.traj_opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }

  try {
    fs::create_directories(cfg.out_dir);
    const RunLog log = run_closed_loop(traj, cfg.vehicle, cfg.controller, cfg.sim);
    const fs::path base = cfg.out_dir / cfg.prefix;
    write_run_log_csv(base.string() + ".csv", log);
    if (!log.rows.empty()) {
      const MetricsSummary summary = summarize(log);
      write_text_file(base.string() + ".summary",
                      format_summary_record(summary, static_cast<long>(log.rows.size()),
                                            log.finished, log.aborted));
      std::printf("%s", format_metrics_table({{cfg.prefix, summary}}).c_str());
    } else {
      write_text_file(base.string() + ".summary",
                      format_summary_record(MetricsSummary{}, 0, log.finished, log.aborted));
    }
    write_plots(base, traj, log);
    if (log.aborted) {
      std::fprintf(stderr, "run aborted: %s\n", log.abort_reason.c_str());
      return kExitAborted;
    }
    std::printf("wrote %s.csv (%zu cycles, finished=%s)\n", base.string().c_str(),
                log.rows.size(), log.finished ? "true" : "false");
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAborted;
  }
}

int cmd_simulate(const std::vector<std::string>& configs, const std::string& out_dir,
                 long seed, bool lockstep, int jobs) {
  if (configs.empty()) {
    std::fprintf(stderr, "error: simulate needs at least one --config file\n");
    return kExitConfig;
  }
  std::vector<int> codes(configs.size(), kExitOk);
  if (jobs <= 1 || configs.size() == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      codes[i] = run_one_simulation(configs[i], out_dir, seed, lockstep);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(jobs, static_cast<int>(configs.size()));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1)) {
          codes[i] = run_one_simulation(configs[i], out_dir, seed, lockstep);
        }
      });
    }
    for (std::thread& th : pool) {
      th.join();
    }
  }
  int result = kExitOk;
  for (int c : codes) {
    if (c == kExitConfig) {
      return kExitConfig;
    }
    if (c != kExitOk) {
      result = c;
    }
  }
  return result;
}

int cmd_tune(const std::string& traj_path, int smoothing) {
  try {
    TrajectoryOptions opts;
    opts.smoothing_window = smoothing;
    const ReferenceTrajectory traj = load_trajectory(traj_path, opts);
    const TuningTable table = TuningTable::defaults();
    const PathAnalysis analysis = analyze_path(traj, table);
    const WeightSet w = select_weights(analysis.kappa_max, table);
    std::printf("trajectory:      %s\n", traj_path.c_str());
    std::printf("points:          %zu (%s)\n", traj.points().size(),
                traj.closed() ? "closed" : "open");
    std::printf("length:          %.3f m\n", traj.total_length());
    std::printf("max curvature:   %.6f 1/m\n", analysis.kappa_max);
    std::printf("total curvature: %.6f\n", analysis.total_curvature);
    std::printf("selected tier:   %zu of %zu\n", analysis.tier, table.tiers.size());
    std::printf("Q diag:          %g, %g, %g, %g\n", w.q(0), w.q(1), w.q(2), w.q(3));
    std::printf("S diag:          %g, %g, %g, %g\n", w.s(0), w.s(1), w.s(2), w.s(3));
    std::printf("R diag:          %g, %g\n", w.r(0), w.r(1));
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}

int cmd_metrics(const std::string& log_path, const std::string& traj_path) {
  try {
    const RunLog log = read_run_log_csv(log_path);
    if (log.rows.empty()) {
      std::fprintf(stderr, "error: run log has no rows: %s\n", log_path.c_str());
      return kExitConfig;
    }
    const ReferenceTrajectory traj = load_trajectory(traj_path, TrajectoryOptions{});
    const MetricsSummary summary = summarize_against(log, traj);
    std::printf("%s", format_metrics_table({{fs::path(log_path).stem().string(), summary}})
                          .c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}

int cmd_gen_trajectory(const std::string& shape, double length, double radius, double scale,
                       double amplitude, double ds, double speed, const std::string& output) {
  try {
    Xy xy;
    if (shape == "line") {
      xy = gen_line(length, ds);
    } else if (shape == "circle") {
      xy = gen_circle(radius, ds);
    } else if (shape == "figure_eight") {
      xy = gen_figure_eight(scale, ds);
    } else if (shape == "s_curve") {
      xy = gen_s_curve(length, amplitude, ds);
    } else {
      std::fprintf(stderr, "error: unknown shape '%s' (valid: line, circle, figure_eight, "
                           "s_curve)\n",
                   shape.c_str());
      return kExitConfig;
    }
    std::vector<double> v;
    if (speed > 0.0) {
      v.assign(xy.x.size(), speed);
    }
    write_trajectory_csv(output, xy, v);
    std::printf("wrote %s (%zu points)\n", output.c_str(), xy.x.size());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LPV-MPC trajectory tracking toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::vector<std::string> configs;
  std::string out_dir;
  long seed = -1;
  bool lockstep = false;
  int jobs = 1;
  app.add_option("--config", configs, "run configuration file(s)");
  app.add_option("--out-dir", out_dir, "output directory override");
  app.add_option("--seed", seed, "noise seed override");
  app.add_flag("--lockstep", lockstep, "deterministic serial mode with zeroed timing columns");
  app.add_option("--jobs", jobs, "parallel workers for independent runs")
      ->check(CLI::PositiveNumber);

  CLI::App* simulate = app.add_subcommand("simulate", "run a closed-loop simulation");

  CLI::App* tune = app.add_subcommand("tune", "curvature analysis and weight selection");
  std::string tune_traj;
  int tune_smoothing = 1;
  tune->add_option("trajectory", tune_traj, "trajectory CSV")->required();
  tune->add_option("--smoothing", tune_smoothing, "odd moving-average window for curvature");

  CLI::App* metrics = app.add_subcommand("metrics", "recompute metrics from a run log");
  std::string metrics_log;
  std::string metrics_traj;
  metrics->add_option("runlog", metrics_log, "run-log CSV")->required();
  metrics->add_option("trajectory", metrics_traj, "trajectory CSV")->required();

  CLI::App* gen = app.add_subcommand("gen-trajectory", "write a trajectory CSV");
  std::string shape;
  std::string gen_out = "trajectory.csv";
  double length = 100.0;
  double radius = 20.0;
  double scale = 40.0;
  double amplitude = 5.0;
  double ds = 0.5;
  double speed = 0.0;
  gen->add_option("--shape", shape, "line, circle, figure_eight, or s_curve")->required();
  gen->add_option("--length", length, "line/s_curve length [m]");
  gen->add_option("--radius", radius, "circle radius [m]");
  gen->add_option("--scale", scale, "figure-eight scale [m]; max curvature ~= 4.79/scale");
  gen->add_option("--amplitude", amplitude, "s_curve amplitude [m]");
  gen->add_option("--ds", ds, "sample spacing [m]");
  gen->add_option("--speed", speed, "write a constant v column [m/s]");
  gen->add_option("-o,--output", gen_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    return cmd_simulate(configs, out_dir, seed, lockstep, jobs);
  }
  if (tune->parsed()) {
    return cmd_tune(tune_traj, tune_smoothing);
  }
  if (metrics->parsed()) {
    return cmd_metrics(metrics_log, metrics_traj);
  }
  if (gen->parsed()) {
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      gen_out = (fs::path(out_dir) / gen_out).string();
    }
    return cmd_gen_trajectory(shape, length, radius, scale, amplitude, ds, speed, gen_out);
  }
  return kExitConfig;
}
