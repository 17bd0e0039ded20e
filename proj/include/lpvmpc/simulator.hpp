#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lpvmpc/controller.hpp"
#include "lpvmpc/trajectory.hpp"
#include "lpvmpc/vehicle.hpp"

namespace lpvmpc {

enum class Integrator { rk4, euler };

struct NoiseConfig {
  double pos = 0.0;     ///< std dev on X and Y [m]
  double heading = 0.0; ///< std dev on psi [rad]
  double vel = 0.0;     ///< std dev on vx and vy [m/s]
  std::uint64_t seed = 0;
};

struct SimConfig {
  double ts_sim = 0.01;       ///< plant step [s]; must divide the control period
  Integrator integrator = Integrator::rk4;
  NoiseConfig noise;
  bool x0_auto = true;        ///< start on the first path point at its speed
  VehicleState x0;            ///< used when x0_auto is false
  long max_steps = 20000;     ///< control cycles
  bool lockstep = false;      ///< zero the wall-clock column for byte-stable logs
  VehicleParams plant_params; ///< plant side; may differ from the controller model
  bool plant_params_set = false;

  void validate(double controller_ts) const;
};

/// One control cycle of a closed-loop run.
struct RunRecord {
  double t = 0.0;
  VehicleState truth;
  VehicleState measured;
  double a_cmd = 0.0;
  double delta_cmd = 0.0;
  double vx_ref = 0.0;
  double psi_ref = 0.0;
  double x_ref = 0.0;
  double y_ref = 0.0;
  double e_d = 0.0;
  double e_theta = 0.0;
  double cte = 0.0;
  double cost = 0.0;
  std::string solver_status;
  double cycle_ms = 0.0;
};

struct RunLog {
  std::vector<RunRecord> rows;
  bool finished = false;
  bool aborted = false;
  std::string abort_reason;
};

/// Deterministic standard-normal stream: Box-Muller over mt19937_64, so a
/// seed reproduces the same values on any standard library.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}
  double operator()();

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// One plant step of the nonlinear model under a zero-order-held input.
/// vx is clamped at kMinPlantSpeed and psi re-wrapped. Throws
/// std::runtime_error when the state goes non-finite.
VehicleState integrate_plant(const VehicleState& state, const ControlInput& input,
                             const VehicleParams& params, double ts_sim, Integrator method);

/// Adds the configured per-channel noise to a copy of the true state.
VehicleState measure(const VehicleState& truth, const NoiseConfig& noise, GaussianRng& rng);

/// Alternates controller steps and plant substeps until the path is done,
/// the step budget runs out, or the state diverges.
RunLog run_closed_loop(const ReferenceTrajectory& traj, const VehicleParams& params,
                       const ControllerConfig& ctrl_cfg, const SimConfig& sim_cfg);

}  // namespace lpvmpc
