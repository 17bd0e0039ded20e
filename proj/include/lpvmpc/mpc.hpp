#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "lpvmpc/trajectory.hpp"
#include "lpvmpc/vehicle.hpp"

namespace lpvmpc {

/// Input/state limits applied every horizon step.
namespace limits {
inline constexpr double steer_max = std::numbers::pi / 6.0;        ///< |delta| [rad]
inline constexpr double steer_rate_max = std::numbers::pi / 300.0; ///< |d delta| per step [rad]
inline constexpr double accel_rate_max = 0.1;                      ///< |d a| per step [m/s^2]
inline constexpr double xddot_min = -4.0;                          ///< net acceleration [m/s^2]
inline constexpr double xddot_max = 2.0;
inline constexpr double vx_min = 1.0;                              ///< [m/s]
inline constexpr double vx_max = 30.0;
inline constexpr double vy_ratio = 0.17;                           ///< |vy| <= ratio * vx
}  // namespace limits

/// Diagonal stage/terminal/input weights. Q and S act on the output error
/// e = [e_vx, e_psi, e_X, e_Y]; R acts on u = [a, delta].
struct WeightSet {
  Eigen::Vector4d q = Eigen::Vector4d::Zero();
  Eigen::Vector4d s = Eigen::Vector4d::Zero();
  Eigen::Vector2d r = Eigen::Vector2d::Zero();

  /// Throws std::invalid_argument when a weight is negative or all of Q and S
  /// are zero.
  void validate() const;
};

/// Batch propagation matrices: x_stack = phi * x0 + gamma * u_stack, where
/// x_stack holds x_1..x_N and u_stack holds u_0..u_{N-1}.
struct PredictionMatrices {
  Eigen::MatrixXd phi;   ///< (6N) x 6
  Eigen::MatrixXd gamma; ///< (6N) x (2N)
  int n = 0;
};

PredictionMatrices build_prediction(const Matrix6d& ad, const Matrix62d& bd, int n);

/// Condensed quadratic: J = 1/2 u' h u + grad' u + constant.
struct QuadraticCost {
  Eigen::MatrixXd h;
  Eigen::VectorXd grad;
  double constant = 0.0;
};

/// Condenses the tracking cost over the horizon. `refs` are the references
/// for the predicted steps 1..N; `ref_now` is the reference at the current
/// step, whose stage error is constant in u but part of the reported cost.
QuadraticCost build_cost(const PredictionMatrices& pred, const WeightSet& weights,
                         const Matrix46d& c, const Vector6d& x0, const OutputRef& ref_now,
                         std::span<const OutputRef> refs);

enum class ConstraintKind {
  steer_abs,
  accel_env,
  accel_rate,
  steer_rate,
  vx_state,
  vy_state,
};

/// lb <= a * u_stack <= ub with one kind label per row.
struct InequalitySystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  std::vector<ConstraintKind> kind;
  bool consistent = true; ///< false when some lb > ub after scheduling
};

/// Scheduled acceleration envelope at the frozen state/input:
/// [xddot_min + shift, xddot_max + shift] with
/// shift = F_yf sin(delta)/m + mu g - psi_dot vy.
std::pair<double, double> accel_envelope(const VehicleState& state, const ControlInput& input,
                                         const VehicleParams& params);

/// All horizon constraints: steering bound, input rate bounds (step 0
/// measured against prev_input), the scheduled acceleration envelope, and
/// vx/vy bounds imposed on the predicted states through (phi, gamma) rows.
InequalitySystem build_constraints(const VehicleState& state, const ControlInput& prev_input,
                                   const PredictionMatrices& pred, const VehicleParams& params);

/// Condensed QP for one control cycle.
struct MpcProblem {
  Eigen::MatrixXd h;
  Eigen::VectorXd grad;
  Eigen::MatrixXd a_ineq;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  std::vector<ConstraintKind> kind;
  double cost_constant = 0.0;
  int n = 0;
  double ts = 0.0;
  bool consistent = true; ///< lb <= ub on every row after scheduling
};

}  // namespace lpvmpc
