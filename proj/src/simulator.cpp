#include "lpvmpc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lpvmpc/metrics.hpp"

namespace lpvmpc {

void SimConfig::validate(double controller_ts) const {
  if (!(ts_sim > 0.0)) {
    throw std::invalid_argument("sim.ts must be > 0");
  }
  const double ratio = controller_ts / ts_sim;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0 - 1e-9) {
    throw std::invalid_argument("sim.ts must divide the controller period exactly");
  }
  if (noise.pos < 0.0 || noise.heading < 0.0 || noise.vel < 0.0) {
    throw std::invalid_argument("noise standard deviations must be >= 0");
  }
  if (max_steps < 0) {
    throw std::invalid_argument("sim.max_steps must be >= 0");
  }
}

double GaussianRng::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on uniforms from the top 53 bits; u1 is kept away from 0.
  double u1;
  do {
    u1 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

namespace {

Vector6d clamped_derivative(const Vector6d& x, const ControlInput& input,
                            const VehicleParams& params) {
  VehicleState s = VehicleState::from_vec(x);
  s.vx = std::max(s.vx, kMinPlantSpeed);
  return nonlinear_derivative(s, input, params);
}

}  // namespace

VehicleState integrate_plant(const VehicleState& state, const ControlInput& input,
                             const VehicleParams& params, double ts_sim, Integrator method) {
  VehicleState s = state;
  s.vx = std::max(s.vx, kMinPlantSpeed);
  const Vector6d x0 = s.vec();
  if (!x0.allFinite()) {
    throw std::runtime_error("plant state diverged (non-finite)");
  }
  Vector6d x1;
  try {
    if (method == Integrator::euler) {
      x1 = x0 + ts_sim * clamped_derivative(x0, input, params);
    } else {
      const Vector6d k1 = clamped_derivative(x0, input, params);
      const Vector6d k2 = clamped_derivative(x0 + 0.5 * ts_sim * k1, input, params);
      const Vector6d k3 = clamped_derivative(x0 + 0.5 * ts_sim * k2, input, params);
      const Vector6d k4 = clamped_derivative(x0 + ts_sim * k3, input, params);
      x1 = x0 + ts_sim / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  } catch (const std::domain_error&) {
    // A NaN speed inside a stage means the state blew up mid-step.
    throw std::runtime_error("plant state diverged (non-finite)");
  }
  if (!x1.allFinite()) {
    throw std::runtime_error("plant state diverged (non-finite)");
  }
  VehicleState next = VehicleState::from_vec(x1);
  next.vx = std::max(next.vx, kMinPlantSpeed);
  next.psi = wrap_angle(next.psi);
  return next;
}

VehicleState measure(const VehicleState& truth, const NoiseConfig& noise, GaussianRng& rng) {
  VehicleState m = truth;
  if (noise.pos > 0.0) {
    m.x += noise.pos * rng();
    m.y += noise.pos * rng();
  }
  if (noise.heading > 0.0) {
    m.psi = wrap_angle(m.psi + noise.heading * rng());
  }
  if (noise.vel > 0.0) {
    m.vx += noise.vel * rng();
    m.vy += noise.vel * rng();
  }
  return m;
}

RunLog run_closed_loop(const ReferenceTrajectory& traj, const VehicleParams& params,
                       const ControllerConfig& ctrl_cfg, const SimConfig& sim_cfg) {
  ctrl_cfg.validate();
  sim_cfg.validate(ctrl_cfg.ts);
  const VehicleParams plant = sim_cfg.plant_params_set ? sim_cfg.plant_params : params;
  plant.validate();

  MpcController controller(traj, params, ctrl_cfg);

  VehicleState truth;
  if (sim_cfg.x0_auto) {
    const PathPoint& p0 = traj.points().front();
    truth.x = p0.x;
    truth.y = p0.y;
    truth.psi = p0.psi_r;
    truth.vx = std::max(p0.v_r, limits::vx_min);
  } else {
    truth = sim_cfg.x0;
  }

  GaussianRng rng(sim_cfg.noise.seed);
  const auto substeps = static_cast<long>(std::round(ctrl_cfg.ts / sim_cfg.ts_sim));
  ControlInput prev;

  RunLog log;
  log.rows.reserve(static_cast<std::size_t>(std::min<long>(sim_cfg.max_steps, 1 << 20)));
  double t = 0.0;
  for (long step = 0; step < sim_cfg.max_steps; ++step) {
    const VehicleState measured = measure(truth, sim_cfg.noise, rng);
    const ControlCommand cmd = controller.step(measured, prev);

    RunRecord row;
    row.t = t;
    row.truth = truth;
    row.measured = measured;
    row.a_cmd = cmd.a;
    row.delta_cmd = cmd.delta;
    // Reference and errors are logged against the true pose.
    const std::size_t anchor = traj.nearest_index(truth.x, truth.y);
    const PathPoint& ref = traj.points()[anchor];
    row.vx_ref = ref.v_r;
    row.psi_ref = ref.psi_r;
    row.x_ref = ref.x;
    row.y_ref = ref.y;
    const RowErrors err = compute_errors(traj, truth.x, truth.y, truth.psi);
    row.e_d = err.e_d;
    row.e_theta = err.e_theta;
    row.cte = err.cte;
    row.cost = cmd.diag.cost;
    row.solver_status = cmd.diag.finished ? "finished"
                        : cmd.diag.degraded && cmd.diag.solution.size() == 0
                            ? "fallback"
                            : std::string(to_string(cmd.diag.solver_status)) +
                                  (cmd.diag.softened ? "_soft" : "");
    row.cycle_ms = sim_cfg.lockstep ? 0.0 : cmd.diag.cycle_s * 1e3;
    log.rows.push_back(std::move(row));

    if (cmd.diag.finished) {
      log.finished = true;
      break;
    }

    const ControlInput input{cmd.a, cmd.delta};
    try {
      for (long k = 0; k < substeps; ++k) {
        truth = integrate_plant(truth, input, plant, sim_cfg.ts_sim, sim_cfg.integrator);
      }
    } catch (const std::runtime_error& e) {
      log.aborted = true;
      log.abort_reason = e.what();
      break;
    }
    prev = input;
    t += ctrl_cfg.ts;
  }
  return log;
}

}  // namespace lpvmpc
