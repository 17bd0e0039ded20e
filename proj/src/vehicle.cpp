#include "lpvmpc/vehicle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lpvmpc {

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::fmod(a + pi, 2.0 * pi);
  if (a <= 0.0) {
    a += 2.0 * pi;
  }
  return a - pi;
}

void VehicleParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("vehicle parameter must be > 0: ") + name);
    }
  };
  positive(m, "m");
  positive(iz, "iz");
  positive(lf, "lf");
  positive(lr, "lr");
  positive(c_alpha_f, "c_alpha_f");
  positive(c_alpha_r, "c_alpha_r");
  positive(g, "g");
  if (!(mu >= 0.0 && mu <= 1.5)) {
    throw std::invalid_argument("vehicle parameter mu must lie in [0, 1.5]");
  }
}

Vector6d VehicleState::vec() const {
  Vector6d v;
  v << vx, vy, psi, psi_dot, x, y;
  return v;
}

VehicleState VehicleState::from_vec(const Vector6d& v) {
  return VehicleState{v(0), v(1), v(2), v(3), v(4), v(5)};
}

TireForces lateral_tire_forces(const VehicleState& state, double delta,
                               const VehicleParams& params) {
  if (!(state.vx > 0.0)) {
    throw std::domain_error("lateral_tire_forces: vx must be positive");
  }
  const double inv_vx = 1.0 / state.vx;
  TireForces f;
  f.front = params.c_alpha_f * (delta - state.vy * inv_vx - state.psi_dot * params.lf * inv_vx);
  f.rear = params.c_alpha_r * (-state.vy * inv_vx + state.psi_dot * params.lr * inv_vx);
  return f;
}

Vector6d nonlinear_derivative(const VehicleState& state, const ControlInput& input,
                              const VehicleParams& params) {
  const TireForces f = lateral_tire_forces(state, input.delta, params);
  const double sin_d = std::sin(input.delta);
  const double cos_d = std::cos(input.delta);
  const double sin_psi = std::sin(state.psi);
  const double cos_psi = std::cos(state.psi);

  Vector6d dx;
  dx(0) = input.a - params.mu * params.g - f.front * sin_d / params.m +
          state.psi_dot * state.vy;
  dx(1) = f.rear / params.m + f.front * cos_d / params.m - state.psi_dot * state.vx;
  dx(2) = state.psi_dot;
  dx(3) = (f.front * cos_d * params.lf - f.rear * params.lr) / params.iz;
  dx(4) = state.vx * cos_psi - state.vy * sin_psi;
  dx(5) = state.vx * sin_psi + state.vy * cos_psi;
  return dx;
}

LpvMatrices lpv_matrices(const VehicleState& state, const ControlInput& input,
                         const VehicleParams& params) {
  if (!(state.vx >= kMinLpvSpeed)) {
    throw std::domain_error("lpv_matrices: vx below the scheduling floor");
  }
  const double vx = state.vx;
  const double inv_vx = 1.0 / vx;
  const double sin_d = std::sin(input.delta);
  const double cos_d = std::cos(input.delta);
  const double sin_psi = std::sin(state.psi);
  const double cos_psi = std::cos(state.psi);
  const double caf = params.c_alpha_f;
  const double car = params.c_alpha_r;
  const double m = params.m;
  const double iz = params.iz;
  const double lf = params.lf;
  const double lr = params.lr;

  LpvMatrices lpv;
  lpv.a.setZero();
  lpv.b.setZero();
  lpv.c.setZero();

  lpv.a(0, 0) = -params.mu * params.g * inv_vx;
  lpv.a(0, 1) = caf * sin_d / m * inv_vx;
  lpv.a(0, 3) = caf * lf * sin_d / m * inv_vx + state.vy;

  lpv.a(1, 1) = -(car + caf * cos_d) / m * inv_vx;
  lpv.a(1, 3) = -(caf * lf * cos_d - car * lr) / m * inv_vx - vx;

  lpv.a(2, 3) = 1.0;

  lpv.a(3, 1) = -(caf * lf * cos_d - car * lr) / iz * inv_vx;
  lpv.a(3, 3) = -(caf * lf * lf * cos_d + car * lr * lr) / iz * inv_vx;

  lpv.a(4, 0) = cos_psi;
  lpv.a(4, 1) = -sin_psi;
  lpv.a(5, 0) = sin_psi;
  lpv.a(5, 1) = cos_psi;

  // Column 0 multiplies a, column 1 multiplies delta.
  lpv.b(0, 0) = 1.0;
  lpv.b(0, 1) = -caf * sin_d / m;
  lpv.b(1, 1) = caf * cos_d / m;
  lpv.b(3, 1) = caf * lf * cos_d / iz;

  lpv.c(0, 0) = 1.0;
  lpv.c(1, 2) = 1.0;
  lpv.c(2, 4) = 1.0;
  lpv.c(3, 5) = 1.0;
  return lpv;
}

DiscreteModel discretize(const LpvMatrices& lpv, double ts) {
  if (!(ts > 0.0)) {
    throw std::invalid_argument("discretize: sampling period must be > 0");
  }
  DiscreteModel d;
  d.a = Matrix6d::Identity() + ts * lpv.a;
  d.b = ts * lpv.b;
  return d;
}

}  // namespace lpvmpc
