#include "lpvmpc/mpc.hpp"

#include <cmath>
#include <stdexcept>

namespace lpvmpc {

void WeightSet::validate() const {
  if ((q.array() < 0.0).any() || (s.array() < 0.0).any() || (r.array() < 0.0).any()) {
    throw std::invalid_argument("weights must be non-negative");
  }
  if (q.maxCoeff() <= 0.0 && s.maxCoeff() <= 0.0) {
    throw std::invalid_argument("at least one Q or S entry must be positive");
  }
}

PredictionMatrices build_prediction(const Matrix6d& ad, const Matrix62d& bd, int n) {
  if (n < 1) {
    throw std::invalid_argument("build_prediction: horizon must be >= 1");
  }
  PredictionMatrices pred;
  pred.n = n;
  pred.phi.setZero(6 * n, 6);
  pred.gamma.setZero(6 * n, 2 * n);

  // pow_b[j] = A^j B, filled incrementally.
  std::vector<Matrix62d> pow_b(static_cast<std::size_t>(n));
  pow_b[0] = bd;
  for (int j = 1; j < n; ++j) {
    pow_b[static_cast<std::size_t>(j)] = ad * pow_b[static_cast<std::size_t>(j - 1)];
  }

  Matrix6d a_pow = ad;
  for (int r = 0; r < n; ++r) {
    pred.phi.block<6, 6>(6 * r, 0) = a_pow;
    a_pow = ad * a_pow;
    for (int i = 0; i <= r; ++i) {
      pred.gamma.block<6, 2>(6 * r, 2 * i) = pow_b[static_cast<std::size_t>(r - i)];
    }
  }
  return pred;
}

QuadraticCost build_cost(const PredictionMatrices& pred, const WeightSet& weights,
                         const Matrix46d& c, const Vector6d& x0, const OutputRef& ref_now,
                         std::span<const OutputRef> refs) {
  const int n = pred.n;
  if (static_cast<int>(refs.size()) != n) {
    throw std::invalid_argument("build_cost: need exactly N references");
  }
  weights.validate();

  // Stage weights for y_1..y_{N-1} use Q, the terminal block uses S.
  Eigen::VectorXd q_bar(4 * n);
  Eigen::VectorXd y_ref(4 * n);
  for (int k = 0; k < n; ++k) {
    q_bar.segment<4>(4 * k) = (k == n - 1) ? weights.s : weights.q;
    y_ref.segment<4>(4 * k) = refs[static_cast<std::size_t>(k)].vec();
  }
  Eigen::VectorXd r_bar(2 * n);
  for (int k = 0; k < n; ++k) {
    r_bar.segment<2>(2 * k) = weights.r;
  }

  // cg = C_bar * gamma, built block-row-wise (C picks rows of each state block).
  Eigen::MatrixXd cg(4 * n, 2 * n);
  Eigen::MatrixXd cphi(4 * n, 6);
  for (int k = 0; k < n; ++k) {
    cg.middleRows<4>(4 * k) = c * pred.gamma.middleRows<6>(6 * k);
    cphi.middleRows<4>(4 * k) = c * pred.phi.middleRows<6>(6 * k);
  }

  const Eigen::VectorXd d = y_ref - cphi * x0;  // error stack at u = 0

  QuadraticCost cost;
  cost.h = cg.transpose() * q_bar.asDiagonal() * cg;
  cost.h += Eigen::MatrixXd(r_bar.asDiagonal());
  cost.h = 0.5 * (cost.h + cost.h.transpose()).eval();
  cost.grad = -cg.transpose() * (q_bar.asDiagonal() * d);
  const Eigen::Vector4d e_now = ref_now.vec() - c * x0;
  cost.constant = 0.5 * d.dot(q_bar.asDiagonal() * d) +
                  0.5 * e_now.dot(weights.q.asDiagonal() * e_now);
  return cost;
}

std::pair<double, double> accel_envelope(const VehicleState& state, const ControlInput& input,
                                         const VehicleParams& params) {
  const TireForces f = lateral_tire_forces(state, input.delta, params);
  const double shift = f.front * std::sin(input.delta) / params.m + params.mu * params.g -
                       state.psi_dot * state.vy;
  return {limits::xddot_min + shift, limits::xddot_max + shift};
}

InequalitySystem build_constraints(const VehicleState& state, const ControlInput& prev_input,
                                   const PredictionMatrices& pred, const VehicleParams& params) {
  const Vector6d x0 = state.vec();
  const int n = pred.n;
  const int nu = 2 * n;
  const int rows = 6 * n;
  InequalitySystem sys;
  sys.a.setZero(rows, nu);
  sys.lb.resize(rows);
  sys.ub.resize(rows);
  sys.kind.resize(static_cast<std::size_t>(rows));

  const auto [a_lo, a_hi] = accel_envelope(state, prev_input, params);
  int row = 0;

  for (int k = 0; k < n; ++k, ++row) {
    sys.a(row, 2 * k + 1) = 1.0;
    sys.lb(row) = -limits::steer_max;
    sys.ub(row) = limits::steer_max;
    sys.kind[static_cast<std::size_t>(row)] = ConstraintKind::steer_abs;
  }
  for (int k = 0; k < n; ++k, ++row) {
    sys.a(row, 2 * k) = 1.0;
    sys.lb(row) = a_lo;
    sys.ub(row) = a_hi;
    sys.kind[static_cast<std::size_t>(row)] = ConstraintKind::accel_env;
  }
  for (int k = 0; k < n; ++k, ++row) {
    sys.a(row, 2 * k) = 1.0;
    if (k > 0) {
      sys.a(row, 2 * (k - 1)) = -1.0;
      sys.lb(row) = -limits::accel_rate_max;
      sys.ub(row) = limits::accel_rate_max;
    } else {
      sys.lb(row) = prev_input.a - limits::accel_rate_max;
      sys.ub(row) = prev_input.a + limits::accel_rate_max;
    }
    sys.kind[static_cast<std::size_t>(row)] = ConstraintKind::accel_rate;
  }
  for (int k = 0; k < n; ++k, ++row) {
    sys.a(row, 2 * k + 1) = 1.0;
    if (k > 0) {
      sys.a(row, 2 * (k - 1) + 1) = -1.0;
      sys.lb(row) = -limits::steer_rate_max;
      sys.ub(row) = limits::steer_rate_max;
    } else {
      sys.lb(row) = prev_input.delta - limits::steer_rate_max;
      sys.ub(row) = prev_input.delta + limits::steer_rate_max;
    }
    sys.kind[static_cast<std::size_t>(row)] = ConstraintKind::steer_rate;
  }

  // State bounds go on the predicted vx/vy components through (phi, gamma).
  const Eigen::VectorXd free_response = pred.phi * x0;
  const double vy_bound = limits::vy_ratio * state.vx;
  for (int k = 0; k < n; ++k, ++row) {
    sys.a.row(row) = pred.gamma.row(6 * k + 0);
    sys.lb(row) = limits::vx_min - free_response(6 * k + 0);
    sys.ub(row) = limits::vx_max - free_response(6 * k + 0);
    sys.kind[static_cast<std::size_t>(row)] = ConstraintKind::vx_state;
  }
  for (int k = 0; k < n; ++k, ++row) {
    sys.a.row(row) = pred.gamma.row(6 * k + 1);
    sys.lb(row) = -vy_bound - free_response(6 * k + 1);
    sys.ub(row) = vy_bound - free_response(6 * k + 1);
    sys.kind[static_cast<std::size_t>(row)] = ConstraintKind::vy_state;
  }

  sys.consistent = (sys.lb.array() <= sys.ub.array()).all();
  return sys;
}

}  // namespace lpvmpc
