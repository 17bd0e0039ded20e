#pragma once

#include <Eigen/Dense>

namespace lpvmpc {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix62d = Eigen::Matrix<double, 6, 2>;
using Matrix46d = Eigen::Matrix<double, 4, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

/// Below this longitudinal speed the 1/vx scheduling entries are rejected.
inline constexpr double kMinLpvSpeed = 0.5;
/// The plant integrator never lets vx fall below this.
inline constexpr double kMinPlantSpeed = 0.1;

/// Physical constants of the dynamic bicycle model.
struct VehicleParams {
  double m = 1500.0;          ///< mass [kg]
  double iz = 2500.0;         ///< yaw inertia [kg m^2]
  double lf = 1.2;            ///< CoG to front axle [m]
  double lr = 1.6;            ///< CoG to rear axle [m]
  double c_alpha_f = 60000.0; ///< front cornering stiffness [N/rad]
  double c_alpha_r = 60000.0; ///< rear cornering stiffness [N/rad]
  double mu = 0.02;           ///< friction coefficient (rolling-resistance scale)
  double g = 9.81;            ///< gravitational acceleration [m/s^2]

  /// Throws std::invalid_argument if any value is out of range.
  void validate() const;
};

/// Body-frame velocities plus pose: x = [vx, vy, psi, psi_dot, X, Y].
struct VehicleState {
  double vx = 0.0;      ///< longitudinal body velocity [m/s]
  double vy = 0.0;      ///< lateral body velocity [m/s]
  double psi = 0.0;     ///< heading [rad], wrapped to (-pi, pi]
  double psi_dot = 0.0; ///< yaw rate [rad/s]
  double x = 0.0;       ///< global X [m]
  double y = 0.0;       ///< global Y [m]

  Vector6d vec() const;
  static VehicleState from_vec(const Vector6d& v);
};

/// Commanded acceleration and front steering angle, u = [a, delta].
struct ControlInput {
  double a = 0.0;     ///< [m/s^2]
  double delta = 0.0; ///< [rad]

  Eigen::Vector2d vec() const { return {a, delta}; }
};

/// Continuous-time LPV system: x_dot = A x + B u, y = C x with
/// y = [vx, psi, X, Y].
struct LpvMatrices {
  Matrix6d a;
  Matrix62d b;
  Matrix46d c;
};

struct TireForces {
  double front = 0.0; ///< F_yf [N]
  double rear = 0.0;  ///< F_yr [N]
};

/// Linear tire forces from the front/rear slip angles.
/// Requires state.vx > 0 (throws std::domain_error otherwise).
TireForces lateral_tire_forces(const VehicleState& state, double delta,
                               const VehicleParams& params);

/// Nonlinear bicycle-model derivative [ax, ay, psi_dot, psi_ddot, Xdot, Ydot].
Vector6d nonlinear_derivative(const VehicleState& state, const ControlInput& input,
                              const VehicleParams& params);

/// Exact LPV embedding scheduled at (state, input): A x + B u reproduces
/// nonlinear_derivative for the same arguments. Requires
/// state.vx >= kMinLpvSpeed (throws std::domain_error otherwise).
LpvMatrices lpv_matrices(const VehicleState& state, const ControlInput& input,
                         const VehicleParams& params);

struct DiscreteModel {
  Matrix6d a;
  Matrix62d b;
};

/// Forward-Euler discretization: A_d = I + Ts A, B_d = Ts B. Ts must be > 0.
DiscreteModel discretize(const LpvMatrices& lpv, double ts);

}  // namespace lpvmpc
