#pragma once

#include <optional>

#include "lpvmpc/mpc.hpp"
#include "lpvmpc/qp.hpp"
#include "lpvmpc/trajectory.hpp"
#include "lpvmpc/tuner.hpp"
#include "lpvmpc/vehicle.hpp"

namespace lpvmpc {

struct ControllerConfig {
  int horizon = 15;
  double ts = 0.05;                      ///< control period [s]
  std::optional<WeightSet> weights;      ///< explicit weights; empty = auto-tune
  TuningTable tuning = TuningTable::defaults();
  QpSettings solver;
  bool soft_state_constraints = true;    ///< retry infeasible QPs with a shared slack
  double soft_weight = 1e4;              ///< quadratic penalty on the slack
  double usable_residual = 1e-4;         ///< max_iterations results below this still drive
  double finish_radius = 2.0;            ///< open-path termination distance [m]

  void validate() const;
};

struct ControlCommand {
  double a = 0.0;
  double delta = 0.0;

  struct Diagnostics {
    double cost = 0.0;                 ///< tracking cost of the solution
    QpStatus solver_status = QpStatus::solved;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    double cycle_s = 0.0;              ///< wall time of this step
    bool degraded = false;             ///< fallback or low-accuracy solution
    bool softened = false;             ///< state rows relaxed through a slack
    bool finished = false;             ///< open path exhausted
    std::size_t anchor = 0;
    OutputRef ref_now;
    Eigen::MatrixXd predicted_states;  ///< N x 6 predicted state stack
    Eigen::VectorXd solution;          ///< full input stack u_0..u_{N-1}
    Eigen::VectorXd warm_start;        ///< the initial iterate handed to the solver
  } diag;
};

/// Receding-horizon tracker: freezes the LPV model at the measured state,
/// assembles the condensed QP, solves it, applies the first input, and keeps
/// the shifted solution as the next warm start.
class MpcController {
 public:
  MpcController(ReferenceTrajectory traj, const VehicleParams& params, ControllerConfig cfg);

  ControlCommand step(const VehicleState& measured, const ControlInput& prev);

  /// Drops the warm start and cached solver state.
  void reset();

  const ReferenceTrajectory& trajectory() const { return traj_; }
  const ControllerConfig& config() const { return cfg_; }
  const VehicleParams& params() const { return params_; }
  const WeightSet& weights() const { return weights_; }

 private:
  MpcProblem assemble(const VehicleState& state, const ControlInput& prev,
                      const ReferenceWindow& win, PredictionMatrices& pred) const;
  QpSolution solve_soft(const MpcProblem& prob, const std::optional<QpWarmStart>& warm);

  ReferenceTrajectory traj_;
  VehicleParams params_;
  ControllerConfig cfg_;
  WeightSet weights_;
  QpSolver solver_;
  Eigen::VectorXd warm_z_;
  Eigen::VectorXd warm_y_;
};

}  // namespace lpvmpc
