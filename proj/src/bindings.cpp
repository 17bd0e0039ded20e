#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lpvmpc/config.hpp"
#include "lpvmpc/controller.hpp"
#include "lpvmpc/io.hpp"
#include "lpvmpc/metrics.hpp"
#include "lpvmpc/mpc.hpp"
#include "lpvmpc/qp.hpp"
#include "lpvmpc/simulator.hpp"
#include "lpvmpc/trajectory.hpp"
#include "lpvmpc/tuner.hpp"
#include "lpvmpc/vehicle.hpp"

namespace py = pybind11;
using namespace lpvmpc;

namespace {

ReferenceTrajectory build_trajectory(const std::vector<double>& x, const std::vector<double>& y,
                                     const std::vector<double>& v, const std::string& closed,
                                     int smoothing_window, const std::string& speed_mode,
                                     const SpeedLimits& limits) {
  TrajectoryOptions opts;
  if (closed == "auto") {
    opts.closure = PathClosure::automatic;
  } else if (closed == "open") {
    opts.closure = PathClosure::open;
  } else if (closed == "closed") {
    opts.closure = PathClosure::closed;
  } else {
    throw std::invalid_argument("closed must be 'auto', 'open', or 'closed'");
  }
  opts.smoothing_window = smoothing_window;
  if (speed_mode == "fixed") {
    opts.speed_mode = SpeedMode::fixed;
  } else if (speed_mode == "curvature_limited") {
    opts.speed_mode = SpeedMode::curvature_limited;
  } else {
    throw std::invalid_argument("speed_mode must be 'fixed' or 'curvature_limited'");
  }
  opts.limits = limits;
  if (v.empty()) {
    return ReferenceTrajectory::from_xy(x, y, opts);
  }
  return ReferenceTrajectory::from_xyv(x, y, v, opts);
}

template <typename Getter>
std::vector<double> column(const RunLog& log, Getter get) {
  std::vector<double> out;
  out.reserve(log.rows.size());
  for (const RunRecord& r : log.rows) {
    out.push_back(get(r));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LPV-MPC trajectory tracking: vehicle model, condensed MPC, dense QP solver, "
            "closed-loop simulator, and tracking metrics";

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("m", &VehicleParams::m)
      .def_readwrite("iz", &VehicleParams::iz)
      .def_readwrite("lf", &VehicleParams::lf)
      .def_readwrite("lr", &VehicleParams::lr)
      .def_readwrite("c_alpha_f", &VehicleParams::c_alpha_f)
      .def_readwrite("c_alpha_r", &VehicleParams::c_alpha_r)
      .def_readwrite("mu", &VehicleParams::mu)
      .def_readwrite("g", &VehicleParams::g)
      .def("validate", &VehicleParams::validate);

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init([](double vx, double vy, double psi, double psi_dot, double x, double y) {
             return VehicleState{vx, vy, psi, psi_dot, x, y};
           }),
           py::arg("vx") = 0.0, py::arg("vy") = 0.0, py::arg("psi") = 0.0,
           py::arg("psi_dot") = 0.0, py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def_readwrite("vx", &VehicleState::vx)
      .def_readwrite("vy", &VehicleState::vy)
      .def_readwrite("psi", &VehicleState::psi)
      .def_readwrite("psi_dot", &VehicleState::psi_dot)
      .def_readwrite("x", &VehicleState::x)
      .def_readwrite("y", &VehicleState::y)
      .def("vec", &VehicleState::vec)
      .def_static("from_vec", &VehicleState::from_vec);

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init([](double a, double delta) { return ControlInput{a, delta}; }),
           py::arg("a") = 0.0, py::arg("delta") = 0.0)
      .def_readwrite("a", &ControlInput::a)
      .def_readwrite("delta", &ControlInput::delta);

  m.def("wrap_angle", &wrap_angle, py::arg("angle"), "Wrap an angle into (-pi, pi].");
  m.def(
      "lateral_tire_forces",
      [](const VehicleState& s, double delta, const VehicleParams& p) {
        const TireForces f = lateral_tire_forces(s, delta, p);
        return py::make_tuple(f.front, f.rear);
      },
      py::arg("state"), py::arg("delta"), py::arg("params") = VehicleParams{},
      "Front and rear lateral tire forces [N].");
  m.def("nonlinear_derivative", &nonlinear_derivative, py::arg("state"), py::arg("input"),
        py::arg("params") = VehicleParams{},
        "Nonlinear bicycle-model state derivative as a 6-vector.");
  m.def(
      "lpv_matrices",
      [](const VehicleState& s, const ControlInput& u, const VehicleParams& p) {
        const LpvMatrices lpv = lpv_matrices(s, u, p);
        return py::make_tuple(Eigen::MatrixXd(lpv.a), Eigen::MatrixXd(lpv.b),
                              Eigen::MatrixXd(lpv.c));
      },
      py::arg("state"), py::arg("input"), py::arg("params") = VehicleParams{},
      "Exact LPV embedding (A, B, C) scheduled at the given state and input.");
  m.def(
      "discretize",
      [](const Matrix6d& a, const Matrix62d& b, double ts) {
        LpvMatrices lpv;
        lpv.a = a;
        lpv.b = b;
        const DiscreteModel d = discretize(lpv, ts);
        return py::make_tuple(Eigen::MatrixXd(d.a), Eigen::MatrixXd(d.b));
      },
      py::arg("a"), py::arg("b"), py::arg("ts"), "Forward-Euler discretization (A_d, B_d).");

  m.def(
      "arc_length",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return arc_length(x, y);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "curvature",
      [](const std::vector<double>& x, const std::vector<double>& y, bool closed,
         int smoothing_window) { return curvature(x, y, closed, smoothing_window); },
      py::arg("x"), py::arg("y"), py::arg("closed") = false, py::arg("smoothing_window") = 1,
      "Signed curvature per point [1/m].");
  m.def(
      "heading",
      [](const std::vector<double>& x, const std::vector<double>& y, bool closed) {
        return heading(x, y, closed);
      },
      py::arg("x"), py::arg("y"), py::arg("closed") = false);

  py::class_<SpeedLimits>(m, "SpeedLimits")
      .def(py::init<>())
      .def_readwrite("v_fixed", &SpeedLimits::v_fixed)
      .def_readwrite("v_min", &SpeedLimits::v_min)
      .def_readwrite("v_max", &SpeedLimits::v_max)
      .def_readwrite("a_lat_max", &SpeedLimits::a_lat_max)
      .def_readwrite("a_long_max", &SpeedLimits::a_long_max);

  m.def(
      "speed_profile",
      [](const std::vector<double>& kappa, const std::vector<double>& s,
         const std::string& mode, const SpeedLimits& limits) {
        return speed_profile(kappa, s,
                             mode == "fixed" ? SpeedMode::fixed : SpeedMode::curvature_limited,
                             limits);
      },
      py::arg("kappa"), py::arg("s"), py::arg("mode") = "fixed",
      py::arg("limits") = SpeedLimits{});

  py::class_<PathPoint>(m, "PathPoint")
      .def_readonly("x", &PathPoint::x)
      .def_readonly("y", &PathPoint::y)
      .def_readonly("s", &PathPoint::s)
      .def_readonly("kappa", &PathPoint::kappa)
      .def_readonly("psi_r", &PathPoint::psi_r)
      .def_readonly("v_r", &PathPoint::v_r);

  py::class_<OutputRef>(m, "OutputRef")
      .def_readonly("vx", &OutputRef::vx)
      .def_readonly("psi", &OutputRef::psi)
      .def_readonly("x", &OutputRef::x)
      .def_readonly("y", &OutputRef::y);

  py::class_<ReferenceWindow>(m, "ReferenceWindow")
      .def_readonly("anchor", &ReferenceWindow::anchor)
      .def_readonly("now", &ReferenceWindow::now)
      .def_readonly("refs", &ReferenceWindow::refs);

  py::class_<ReferenceTrajectory>(m, "ReferenceTrajectory")
      .def_static("from_points", &build_trajectory, py::arg("x"), py::arg("y"),
                  py::arg("v") = std::vector<double>{}, py::arg("closed") = "auto",
                  py::arg("smoothing_window") = 1, py::arg("speed_mode") = "fixed",
                  py::arg("limits") = SpeedLimits{})
      .def_static(
          "from_csv",
          [](const std::filesystem::path& path, const std::string& closed,
             int smoothing_window, const std::string& speed_mode, const SpeedLimits& limits) {
            const TrajectoryCsv csv = read_trajectory_csv(path);
            return build_trajectory(csv.x, csv.y, csv.v, closed, smoothing_window, speed_mode,
                                    limits);
          },
          py::arg("path"), py::arg("closed") = "auto", py::arg("smoothing_window") = 1,
          py::arg("speed_mode") = "fixed", py::arg("limits") = SpeedLimits{})
      .def_property_readonly("points", &ReferenceTrajectory::points)
      .def_property_readonly("closed", &ReferenceTrajectory::closed)
      .def_property_readonly("kappa_max", &ReferenceTrajectory::kappa_max)
      .def_property_readonly("total_curvature", &ReferenceTrajectory::total_curvature)
      .def_property_readonly("total_length", &ReferenceTrajectory::total_length)
      .def("nearest_index", &ReferenceTrajectory::nearest_index, py::arg("x"), py::arg("y"))
      .def("sample_at", &ReferenceTrajectory::sample_at, py::arg("s"))
      .def("reference_window", &ReferenceTrajectory::reference_window, py::arg("state"),
           py::arg("n"), py::arg("ts"));

  m.def("gen_line", &gen_line, py::arg("length"), py::arg("ds"));
  m.def("gen_circle", &gen_circle, py::arg("radius"), py::arg("ds"));
  m.def("gen_figure_eight", &gen_figure_eight, py::arg("scale"), py::arg("ds"));
  m.def("gen_s_curve", &gen_s_curve, py::arg("length"), py::arg("amplitude"), py::arg("ds"));
  m.attr("GERONO_KAPPA_MAX") = kGeronoKappaMax;
  py::class_<Xy>(m, "Xy").def_readonly("x", &Xy::x).def_readonly("y", &Xy::y);

  py::class_<WeightSet>(m, "WeightSet")
      .def(py::init<>())
      .def(py::init([](const Eigen::Vector4d& q, const Eigen::Vector4d& s,
                       const Eigen::Vector2d& r) {
             WeightSet w;
             w.q = q;
             w.s = s;
             w.r = r;
             return w;
           }),
           py::arg("q"), py::arg("s"), py::arg("r"))
      .def_readwrite("q", &WeightSet::q)
      .def_readwrite("s", &WeightSet::s)
      .def_readwrite("r", &WeightSet::r)
      .def("validate", &WeightSet::validate);

  m.def(
      "build_prediction",
      [](const Matrix6d& ad, const Matrix62d& bd, int n) {
        const PredictionMatrices pred = build_prediction(ad, bd, n);
        return py::make_tuple(pred.phi, pred.gamma);
      },
      py::arg("a_d"), py::arg("b_d"), py::arg("n"),
      "Batch prediction matrices (Phi, Gamma) for the horizon.");

  py::class_<TuningTier>(m, "TuningTier")
      .def(py::init<>())
      .def_readwrite("kappa_threshold", &TuningTier::kappa_threshold)
      .def_readwrite("q", &TuningTier::q)
      .def_readwrite("s", &TuningTier::s);

  py::class_<TuningTable>(m, "TuningTable")
      .def(py::init<>())
      .def_static("defaults", &TuningTable::defaults)
      .def_readwrite("tiers", &TuningTable::tiers)
      .def_readwrite("r", &TuningTable::r)
      .def("validate", &TuningTable::validate);

  m.def("select_weights", &select_weights, py::arg("kappa_max"),
        py::arg("table") = TuningTable::defaults());

  py::class_<PathAnalysis>(m, "PathAnalysis")
      .def_readonly("kappa_max", &PathAnalysis::kappa_max)
      .def_readonly("total_curvature", &PathAnalysis::total_curvature)
      .def_readonly("tier", &PathAnalysis::tier)
      .def_readonly("point_tier", &PathAnalysis::point_tier);

  m.def("analyze_path", &analyze_path, py::arg("trajectory"),
        py::arg("table") = TuningTable::defaults());

  py::enum_<QpStatus>(m, "QpStatus")
      .value("solved", QpStatus::solved)
      .value("max_iterations", QpStatus::max_iterations)
      .value("infeasible", QpStatus::infeasible);

  py::class_<QpSolution>(m, "QpSolution")
      .def_readonly("z", &QpSolution::z)
      .def_readonly("y", &QpSolution::y)
      .def_readonly("status", &QpSolution::status)
      .def_readonly("iterations", &QpSolution::iterations)
      .def_readonly("primal_residual", &QpSolution::primal_residual)
      .def_readonly("dual_residual", &QpSolution::dual_residual)
      .def_readonly("objective", &QpSolution::objective)
      .def_readonly("polished", &QpSolution::polished);

  m.def(
      "solve_qp",
      [](const Eigen::MatrixXd& h, const Eigen::VectorXd& g, const Eigen::MatrixXd& a,
         const Eigen::VectorXd& lb, const Eigen::VectorXd& ub, double tol, int max_iter,
         std::optional<Eigen::VectorXd> warm_z) {
        QpSettings settings;
        settings.tol = tol;
        settings.max_iter = max_iter;
        QpSolver solver(settings);
        std::optional<QpWarmStart> warm;
        if (warm_z) {
          warm = QpWarmStart{*warm_z, Eigen::VectorXd()};
        }
        return solver.solve(h, g, a, lb, ub, warm);
      },
      py::arg("h"), py::arg("g"), py::arg("a"), py::arg("lb"), py::arg("ub"),
      py::arg("tol") = 1e-6, py::arg("max_iter") = 4000, py::arg("warm_start") = std::nullopt,
      "Solve min 1/2 z'Hz + g'z s.t. lb <= A z <= ub.");

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &ControllerConfig::horizon)
      .def_readwrite("ts", &ControllerConfig::ts)
      .def_readwrite("weights", &ControllerConfig::weights)
      .def_readwrite("tuning", &ControllerConfig::tuning)
      .def_readwrite("soft_state_constraints", &ControllerConfig::soft_state_constraints)
      .def_readwrite("finish_radius", &ControllerConfig::finish_radius)
      .def("validate", &ControllerConfig::validate);

  py::class_<ControlCommand::Diagnostics>(m, "CommandDiagnostics")
      .def_readonly("cost", &ControlCommand::Diagnostics::cost)
      .def_readonly("solver_status", &ControlCommand::Diagnostics::solver_status)
      .def_readonly("primal_residual", &ControlCommand::Diagnostics::primal_residual)
      .def_readonly("dual_residual", &ControlCommand::Diagnostics::dual_residual)
      .def_readonly("iterations", &ControlCommand::Diagnostics::iterations)
      .def_readonly("cycle_s", &ControlCommand::Diagnostics::cycle_s)
      .def_readonly("degraded", &ControlCommand::Diagnostics::degraded)
      .def_readonly("softened", &ControlCommand::Diagnostics::softened)
      .def_readonly("finished", &ControlCommand::Diagnostics::finished)
      .def_readonly("anchor", &ControlCommand::Diagnostics::anchor)
      .def_readonly("predicted_states", &ControlCommand::Diagnostics::predicted_states)
      .def_readonly("solution", &ControlCommand::Diagnostics::solution);

  py::class_<ControlCommand>(m, "ControlCommand")
      .def_readonly("a", &ControlCommand::a)
      .def_readonly("delta", &ControlCommand::delta)
      .def_readonly("diag", &ControlCommand::diag);

  py::class_<MpcController>(m, "MpcController")
      .def(py::init<ReferenceTrajectory, const VehicleParams&, ControllerConfig>(),
           py::arg("trajectory"), py::arg("params") = VehicleParams{},
           py::arg("config") = ControllerConfig{})
      .def("step", &MpcController::step, py::arg("measured"), py::arg("prev"))
      .def("reset", &MpcController::reset)
      .def_property_readonly("weights", &MpcController::weights);

  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init<>())
      .def_readwrite("pos", &NoiseConfig::pos)
      .def_readwrite("heading", &NoiseConfig::heading)
      .def_readwrite("vel", &NoiseConfig::vel)
      .def_readwrite("seed", &NoiseConfig::seed);

  py::enum_<Integrator>(m, "Integrator")
      .value("rk4", Integrator::rk4)
      .value("euler", Integrator::euler);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("ts_sim", &SimConfig::ts_sim)
      .def_readwrite("integrator", &SimConfig::integrator)
      .def_readwrite("noise", &SimConfig::noise)
      .def_readwrite("x0_auto", &SimConfig::x0_auto)
      .def_readwrite("x0", &SimConfig::x0)
      .def_readwrite("max_steps", &SimConfig::max_steps)
      .def_readwrite("lockstep", &SimConfig::lockstep);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("t", &RunRecord::t)
      .def_readonly("truth", &RunRecord::truth)
      .def_readonly("measured", &RunRecord::measured)
      .def_readonly("a_cmd", &RunRecord::a_cmd)
      .def_readonly("delta_cmd", &RunRecord::delta_cmd)
      .def_readonly("e_d", &RunRecord::e_d)
      .def_readonly("e_theta", &RunRecord::e_theta)
      .def_readonly("cte", &RunRecord::cte)
      .def_readonly("cost", &RunRecord::cost)
      .def_readonly("solver_status", &RunRecord::solver_status)
      .def_readonly("cycle_ms", &RunRecord::cycle_ms);

  py::class_<RunLog>(m, "RunLog")
      .def_readonly("rows", &RunLog::rows)
      .def_readonly("finished", &RunLog::finished)
      .def_readonly("aborted", &RunLog::aborted)
      .def_readonly("abort_reason", &RunLog::abort_reason)
      .def_property_readonly(
          "t", [](const RunLog& l) { return column(l, [](const RunRecord& r) { return r.t; }); })
      .def_property_readonly(
          "x",
          [](const RunLog& l) { return column(l, [](const RunRecord& r) { return r.truth.x; }); })
      .def_property_readonly(
          "y",
          [](const RunLog& l) { return column(l, [](const RunRecord& r) { return r.truth.y; }); })
      .def_property_readonly("psi",
                             [](const RunLog& l) {
                               return column(l, [](const RunRecord& r) { return r.truth.psi; });
                             })
      .def_property_readonly(
          "e_d",
          [](const RunLog& l) { return column(l, [](const RunRecord& r) { return r.e_d; }); })
      .def_property_readonly("e_theta",
                             [](const RunLog& l) {
                               return column(l, [](const RunRecord& r) { return r.e_theta; });
                             })
      .def_property_readonly(
          "cte",
          [](const RunLog& l) { return column(l, [](const RunRecord& r) { return r.cte; }); })
      .def("to_csv", &run_log_to_csv)
      .def("save_csv", &write_run_log_csv, py::arg("path"));

  m.def("integrate_plant", &integrate_plant, py::arg("state"), py::arg("input"),
        py::arg("params") = VehicleParams{}, py::arg("ts_sim") = 0.01,
        py::arg("method") = Integrator::rk4);
  m.def("run_closed_loop", &run_closed_loop, py::arg("trajectory"),
        py::arg("params") = VehicleParams{}, py::arg("controller") = ControllerConfig{},
        py::arg("sim") = SimConfig{},
        "Simulate the controller against the nonlinear plant; returns the run log.");

  py::class_<MetricsSummary>(m, "MetricsSummary")
      .def_readonly("max_cte", &MetricsSummary::max_cte)
      .def_readonly("mean_cte", &MetricsSummary::mean_cte)
      .def_readonly("mle", &MetricsSummary::mle)
      .def_readonly("ale", &MetricsSummary::ale)
      .def_readonly("moe", &MetricsSummary::moe)
      .def_readonly("aoe", &MetricsSummary::aoe)
      .def("as_dict", [](const MetricsSummary& s) {
        py::dict d;
        d["max_cte"] = s.max_cte;
        d["mean_cte"] = s.mean_cte;
        d["mle"] = s.mle;
        d["ale"] = s.ale;
        d["moe"] = s.moe;
        d["aoe"] = s.aoe;
        return d;
      });

  m.def("cte_line", &cte_line, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("x_v"),
        py::arg("y_v"));
  m.def("cte_function", &cte_function, py::arg("f"), py::arg("x_v"), py::arg("y_v"));
  m.def("cte_parametric", &cte_parametric, py::arg("x_v"), py::arg("y_v"), py::arg("x_r"),
        py::arg("y_r"), py::arg("theta_r"));
  m.def("summarize", &summarize, py::arg("log"));
  m.def("summarize_against", &summarize_against, py::arg("log"), py::arg("trajectory"));
  m.def("format_metrics_table", &format_metrics_table, py::arg("rows"));
}
