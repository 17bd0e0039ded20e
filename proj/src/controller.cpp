#include "lpvmpc/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lpvmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_rate(double value, double previous, double rate) {
  return std::clamp(value, previous - rate, previous + rate);
}

Eigen::VectorXd shift_solution(const Eigen::VectorXd& z) {
  Eigen::VectorXd shifted(z.size());
  shifted.head(z.size() - 2) = z.tail(z.size() - 2);
  shifted.tail<2>() = z.tail<2>();
  return shifted;
}

}  // namespace

void ControllerConfig::validate() const {
  if (horizon < 2) {
    throw std::invalid_argument("controller horizon must be >= 2");
  }
  if (!(ts > 0.0)) {
    throw std::invalid_argument("controller period must be > 0");
  }
  if (weights) {
    weights->validate();
  } else {
    tuning.validate();
  }
  if (!(soft_weight > 0.0)) {
    throw std::invalid_argument("soft constraint weight must be > 0");
  }
}

MpcController::MpcController(ReferenceTrajectory traj, const VehicleParams& params,
                             ControllerConfig cfg)
    : traj_(std::move(traj)), params_(params), cfg_(std::move(cfg)), solver_(cfg_.solver) {
  params_.validate();
  cfg_.validate();
  weights_ = cfg_.weights ? *cfg_.weights : select_weights(traj_.kappa_max(), cfg_.tuning);
}

void MpcController::reset() {
  warm_z_.resize(0);
  warm_y_.resize(0);
}

MpcProblem MpcController::assemble(const VehicleState& state, const ControlInput& prev,
                                   const ReferenceWindow& win, PredictionMatrices& pred) const {
  const LpvMatrices lpv = lpv_matrices(state, prev, params_);
  const DiscreteModel disc = discretize(lpv, cfg_.ts);
  pred = build_prediction(disc.a, disc.b, cfg_.horizon);
  const Vector6d x0 = state.vec();

  // Unwrap reference headings progressively from the measured heading so the
  // linear error terms never see a 2 pi jump.
  OutputRef ref_now = win.now;
  std::vector<OutputRef> refs = win.refs;
  double base = state.psi;
  ref_now.psi = base + wrap_angle(ref_now.psi - base);
  base = ref_now.psi;
  for (OutputRef& r : refs) {
    r.psi = base + wrap_angle(r.psi - base);
    base = r.psi;
  }

  const QuadraticCost cost = build_cost(pred, weights_, lpv.c, x0, ref_now, refs);
  InequalitySystem cons = build_constraints(state, prev, pred, params_);

  MpcProblem prob;
  prob.h = cost.h;
  prob.grad = cost.grad;
  prob.cost_constant = cost.constant;
  prob.a_ineq = std::move(cons.a);
  prob.lb = std::move(cons.lb);
  prob.ub = std::move(cons.ub);
  prob.kind = std::move(cons.kind);
  prob.n = cfg_.horizon;
  prob.ts = cfg_.ts;
  prob.consistent = cons.consistent;
  return prob;
}

QpSolution MpcController::solve_soft(const MpcProblem& prob,
                                     const std::optional<QpWarmStart>& warm) {
  const Eigen::Index nu = prob.h.rows();
  const Eigen::Index m = prob.a_ineq.rows();
  Eigen::Index soft_rows = 0;
  for (ConstraintKind k : prob.kind) {
    if (k == ConstraintKind::vx_state || k == ConstraintKind::vy_state) {
      ++soft_rows;
    }
  }

  Eigen::MatrixXd h2 = Eigen::MatrixXd::Zero(nu + 1, nu + 1);
  h2.topLeftCorner(nu, nu) = prob.h;
  h2(nu, nu) = 2.0 * cfg_.soft_weight;
  Eigen::VectorXd g2 = Eigen::VectorXd::Zero(nu + 1);
  g2.head(nu) = prob.grad;

  const Eigen::Index m2 = m + soft_rows + 1;
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(m2, nu + 1);
  Eigen::VectorXd lb2(m2);
  Eigen::VectorXd ub2(m2);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool soft = prob.kind[static_cast<std::size_t>(i)] == ConstraintKind::vx_state ||
                      prob.kind[static_cast<std::size_t>(i)] == ConstraintKind::vy_state;
    if (soft) {
      a2.block(row, 0, 1, nu) = prob.a_ineq.row(i);
      a2(row, nu) = 1.0;
      lb2(row) = prob.lb(i);
      ub2(row) = kInf;
      ++row;
      a2.block(row, 0, 1, nu) = prob.a_ineq.row(i);
      a2(row, nu) = -1.0;
      lb2(row) = -kInf;
      ub2(row) = prob.ub(i);
      ++row;
    } else {
      a2.block(row, 0, 1, nu) = prob.a_ineq.row(i);
      lb2(row) = prob.lb(i);
      ub2(row) = prob.ub(i);
      ++row;
    }
  }
  a2(row, nu) = 1.0;
  lb2(row) = 0.0;
  ub2(row) = kInf;

  std::optional<QpWarmStart> warm2;
  if (warm && warm->z.size() == nu) {
    QpWarmStart w;
    w.z = Eigen::VectorXd::Zero(nu + 1);
    w.z.head(nu) = warm->z;
    warm2 = std::move(w);
  }
  return solver_.solve(h2, g2, a2, lb2, ub2, warm2);
}

ControlCommand MpcController::step(const VehicleState& measured, const ControlInput& prev) {
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  VehicleState state = measured;
  state.psi = wrap_angle(state.psi);
  state.vx = std::max(state.vx, kMinLpvSpeed);

  ControlCommand cmd;
  const ReferenceWindow win = traj_.reference_window(state, cfg_.horizon, cfg_.ts);
  cmd.diag.anchor = win.anchor;
  cmd.diag.ref_now = win.now;

  const auto [a_lo, a_hi] = accel_envelope(state, prev, params_);

  // Open path exhausted: brake toward standstill and flag the run finished.
  if (!traj_.closed() && win.anchor + 1 == traj_.points().size()) {
    const PathPoint& last = traj_.points().back();
    const double dist = std::hypot(state.x - last.x, state.y - last.y);
    if (dist < cfg_.finish_radius) {
      cmd.a = std::min(clamp_rate(a_lo, prev.a, limits::accel_rate_max), a_hi);
      cmd.delta = clamp_rate(0.0, prev.delta, limits::steer_rate_max);
      cmd.delta = std::clamp(cmd.delta, -limits::steer_max, limits::steer_max);
      cmd.diag.finished = true;
      cmd.diag.cycle_s = elapsed();
      return cmd;
    }
  }

  PredictionMatrices pred;
  const MpcProblem prob = assemble(state, prev, win, pred);
  const Eigen::Index nu = prob.h.rows();

  std::optional<QpWarmStart> warm;
  if (warm_z_.size() == nu) {
    QpWarmStart w;
    w.z = shift_solution(warm_z_);
    if (warm_y_.size() == prob.a_ineq.rows()) {
      w.y = warm_y_;
    }
    warm = std::move(w);
  }
  cmd.diag.warm_start = warm ? warm->z : Eigen::VectorXd::Zero(nu);

  // Scheduled state bounds can cross (lb > ub); such cycles skip straight to
  // the slack retry, where the crossing rows are split one-sided.
  QpSolution qs;
  qs.status = QpStatus::infeasible;
  if (prob.consistent) {
    qs = solver_.solve(prob.h, prob.grad, prob.a_ineq, prob.lb, prob.ub, warm);
  }
  auto usable = [this](const QpSolution& s) {
    return s.status == QpStatus::solved ||
           (s.status == QpStatus::max_iterations &&
            std::max(s.primal_residual, s.dual_residual) <= cfg_.usable_residual);
  };

  bool softened = false;
  if (!usable(qs) && cfg_.soft_state_constraints) {
    QpSolution soft = solve_soft(prob, warm);
    if (usable(soft)) {
      soft.z.conservativeResize(nu);
      soft.y.resize(0);
      qs = std::move(soft);
      softened = true;
    }
  }

  cmd.diag.solver_status = qs.status;
  cmd.diag.primal_residual = qs.primal_residual;
  cmd.diag.dual_residual = qs.dual_residual;
  cmd.diag.iterations = qs.iterations;
  cmd.diag.softened = softened;

  if (!usable(qs)) {
    // Fallback: hold the steering, bleed speed as hard as comfort allows.
    cmd.a = std::clamp(prev.a - limits::accel_rate_max, a_lo, a_hi);
    cmd.delta = std::clamp(prev.delta, -limits::steer_max, limits::steer_max);
    cmd.diag.degraded = true;
    reset();
    cmd.diag.cycle_s = elapsed();
    return cmd;
  }

  cmd.a = clamp_rate(qs.z(0), prev.a, limits::accel_rate_max);
  cmd.a = std::clamp(cmd.a, a_lo, a_hi);
  cmd.delta = clamp_rate(qs.z(1), prev.delta, limits::steer_rate_max);
  cmd.delta = std::clamp(cmd.delta, -limits::steer_max, limits::steer_max);
  cmd.diag.degraded = qs.status != QpStatus::solved || softened;
  cmd.diag.cost = 0.5 * qs.z.dot(prob.h * qs.z) + prob.grad.dot(qs.z) + prob.cost_constant;
  cmd.diag.solution = qs.z;

  const Eigen::VectorXd stack = pred.phi * state.vec() + pred.gamma * qs.z;
  cmd.diag.predicted_states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 6,
                                                             Eigen::RowMajor>>(
      stack.data(), cfg_.horizon, 6);

  warm_z_ = qs.z;
  warm_y_ = softened ? Eigen::VectorXd() : qs.y;
  cmd.diag.cycle_s = elapsed();
  return cmd;
}

}  // namespace lpvmpc
