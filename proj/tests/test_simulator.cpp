#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lpvmpc/io.hpp"
#include "lpvmpc/metrics.hpp"
#include "lpvmpc/simulator.hpp"

using namespace lpvmpc;

namespace {

ReferenceTrajectory straight_path(double length, double ds, double v) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> vs;
  for (double x = 0.0; x <= length + 1e-9; x += ds) {
    xs.push_back(x);
    ys.push_back(0.0);
    vs.push_back(v);
  }
  return ReferenceTrajectory::from_xyv(xs, ys, vs);
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("coasting advances only along X") {
  VehicleParams p;
  VehicleState s;
  s.vx = 10.0;
  ControlInput u;
  u.a = p.mu * p.g;  // cancels friction exactly
  const VehicleState next = integrate_plant(s, u, p, 0.01, Integrator::rk4);
  CHECK(next.x == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(next.vx == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(next.y == doctest::Approx(0.0));
  CHECK(next.psi == doctest::Approx(0.0));
}

TEST_CASE("RK4 at 0.01 matches fine Euler at 0.0001 over one second") {
  VehicleParams p;
  ControlInput u;
  u.a = 0.5;
  u.delta = 0.05;
  VehicleState rk;
  rk.vx = 8.0;
  VehicleState eu = rk;
  for (int i = 0; i < 100; ++i) {
    rk = integrate_plant(rk, u, p, 0.01, Integrator::rk4);
  }
  for (int i = 0; i < 10000; ++i) {
    eu = integrate_plant(eu, u, p, 0.0001, Integrator::euler);
  }
  CHECK(std::abs(rk.x - eu.x) < 1e-4);
  CHECK(std::abs(rk.y - eu.y) < 1e-4);
  CHECK(std::abs(rk.vx - eu.vx) < 1e-4);
  CHECK(std::abs(rk.vy - eu.vy) < 1e-4);
}

TEST_CASE("steady-state cornering matches the two-equation solution") {
  // With y-accel and yaw-accel zero at fixed speed, the lateral/yaw balance
  // is linear in (vy, psi_dot); the plant must settle onto that solution.
  VehicleParams p;
  const double v = 8.0;
  const double delta = 0.05;

  const double cf = p.c_alpha_f * std::cos(delta);
  Eigen::Matrix2d m;
  Eigen::Vector2d rhs;
  // rows: ay balance, yaw-moment balance
  m(0, 0) = -(p.c_alpha_r + cf) / (p.m * v);
  m(0, 1) = (p.c_alpha_r * p.lr - cf * p.lf) / (p.m * v) - v;
  m(1, 0) = -(cf * p.lf - p.c_alpha_r * p.lr) / (p.iz * v);
  m(1, 1) = -(cf * p.lf * p.lf + p.c_alpha_r * p.lr * p.lr) / (p.iz * v);
  rhs(0) = -cf * delta / p.m;
  rhs(1) = -cf * p.lf * delta / p.iz;
  const Eigen::Vector2d sol = m.colPivHouseholderQr().solve(rhs);
  const double vy_ss = sol(0);
  const double psi_dot_ss = sol(1);
  const double radius_expected = std::hypot(v, vy_ss) / std::abs(psi_dot_ss);

  VehicleState s;
  s.vx = v;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < 4000; ++i) {
    // Small speed hold so vx stays at v while the lateral states settle.
    ControlInput u;
    u.delta = delta;
    const TireForces f = lateral_tire_forces(s, delta, p);
    u.a = p.mu * p.g + f.front * std::sin(delta) / p.m - s.psi_dot * s.vy +
          2.0 * (v - s.vx);
    s = integrate_plant(s, u, p, 0.01, Integrator::rk4);
    if (i > 1000) {
      xs.push_back(s.x);
      ys.push_back(s.y);
    }
  }
  CHECK(s.psi_dot == doctest::Approx(psi_dot_ss).epsilon(0.02));
  CHECK(s.vy == doctest::Approx(vy_ss).epsilon(0.05));

  // Geometric radius via an algebraic circle fit of the settled arc:
  // x^2 + y^2 + D x + E y + F = 0 solved in least squares.
  Eigen::MatrixXd a_fit(xs.size(), 3);
  Eigen::VectorXd b_fit(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    a_fit(static_cast<Eigen::Index>(i), 0) = xs[i];
    a_fit(static_cast<Eigen::Index>(i), 1) = ys[i];
    a_fit(static_cast<Eigen::Index>(i), 2) = 1.0;
    b_fit(static_cast<Eigen::Index>(i)) = -(xs[i] * xs[i] + ys[i] * ys[i]);
  }
  const Eigen::Vector3d def = a_fit.colPivHouseholderQr().solve(b_fit);
  const double radius_measured =
      std::sqrt(0.25 * (def(0) * def(0) + def(1) * def(1)) - def(2));
  CHECK(radius_measured == doctest::Approx(radius_expected).epsilon(0.02));
}

TEST_CASE("with zero commanded acceleration the speed bleeds off") {
  VehicleParams p;
  VehicleState s;
  s.vx = 6.0;
  ControlInput u;  // a = 0, delta = 0
  double prev = s.vx;
  for (int i = 0; i < 200; ++i) {
    s = integrate_plant(s, u, p, 0.01, Integrator::rk4);
    CHECK(s.vx <= prev + 1e-12);
    prev = s.vx;
  }
}

TEST_CASE("non-finite states abort") {
  VehicleParams p;
  VehicleState s;
  s.vx = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(integrate_plant(s, ControlInput{}, p, 0.01, Integrator::rk4),
                  std::runtime_error);
}

TEST_CASE("measurement noise switches off and reproduces by seed") {
  VehicleState s;
  s.vx = 5.0;
  s.x = 2.0;
  NoiseConfig off;
  GaussianRng rng0(1);
  const VehicleState m0 = measure(s, off, rng0);
  CHECK(m0.x == s.x);
  CHECK(m0.psi == s.psi);
  CHECK(m0.vx == s.vx);

  NoiseConfig noisy;
  noisy.pos = 0.1;
  noisy.heading = 0.02;
  noisy.vel = 0.05;
  GaussianRng a(42);
  GaussianRng b(42);
  for (int i = 0; i < 100; ++i) {
    const VehicleState ma = measure(s, noisy, a);
    const VehicleState mb = measure(s, noisy, b);
    CHECK(ma.x == mb.x);
    CHECK(ma.y == mb.y);
    CHECK(ma.psi == mb.psi);
    CHECK(ma.vx == mb.vx);
    CHECK(ma.vy == mb.vy);
  }
}

TEST_CASE("sampled noise std matches the configuration") {
  NoiseConfig noisy;
  noisy.pos = 0.1;
  GaussianRng rng(7);
  VehicleState s;
  s.vx = 5.0;
  double sum = 0.0;
  double sum2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const VehicleState m = measure(s, noisy, rng);
    sum += m.x;
    sum2 += m.x * m.x;
  }
  const double mean = sum / n;
  const double stddev = std::sqrt(sum2 / n - mean * mean);
  CHECK(stddev == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("closed-loop straight run tracks tightly and finishes") {
  const ReferenceTrajectory traj = straight_path(100.0, 1.0, 8.0);
  ControllerConfig ctrl;
  SimConfig sim;
  sim.max_steps = 4000;
  const RunLog log = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  REQUIRE_FALSE(log.rows.empty());
  CHECK(log.finished);
  CHECK_FALSE(log.aborted);
  const MetricsSummary m = summarize(log);
  CHECK(m.mean_cte < 0.05);
}

TEST_CASE("zero step budget gives an empty unfinished log") {
  const ReferenceTrajectory traj = straight_path(50.0, 1.0, 5.0);
  ControllerConfig ctrl;
  SimConfig sim;
  sim.max_steps = 0;
  const RunLog log = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  CHECK(log.rows.empty());
  CHECK_FALSE(log.finished);
}

TEST_CASE("lockstep runs are byte-identical") {
  const ReferenceTrajectory traj = straight_path(40.0, 1.0, 6.0);
  ControllerConfig ctrl;
  SimConfig sim;
  sim.max_steps = 120;
  sim.lockstep = true;
  sim.noise.pos = 0.02;
  sim.noise.heading = 0.005;
  sim.noise.vel = 0.01;
  sim.noise.seed = 99;
  const RunLog a = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  const RunLog b = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  CHECK(run_log_to_csv(a) == run_log_to_csv(b));
}

TEST_CASE("commands in noisy runs still satisfy the input limits") {
  const ReferenceTrajectory traj = straight_path(60.0, 1.0, 7.0);
  ControllerConfig ctrl;
  SimConfig sim;
  sim.max_steps = 200;
  sim.noise.pos = 0.05;
  sim.noise.heading = 0.01;
  sim.noise.vel = 0.05;
  sim.noise.seed = 5;
  const RunLog log = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  double prev_a = 0.0;
  double prev_delta = 0.0;
  for (const RunRecord& r : log.rows) {
    CHECK(std::abs(r.delta_cmd) <= std::numbers::pi / 6.0 + 1e-9);
    CHECK(std::abs(r.delta_cmd - prev_delta) <= std::numbers::pi / 300.0 + 1e-9);
    CHECK(std::abs(r.a_cmd - prev_a) <= 0.1 + 1e-9);
    prev_a = r.a_cmd;
    prev_delta = r.delta_cmd;
  }
}

TEST_CASE("noisy curved run stays inside the envelope and on the path") {
  Xy circle;
  for (int i = 0; i < 252; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / 252.0;
    circle.x.push_back(20.0 * std::sin(theta));
    circle.y.push_back(20.0 * (1.0 - std::cos(theta)));
  }
  TrajectoryOptions opts;
  opts.limits.v_fixed = 5.0;
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xy(circle.x, circle.y, opts);
  ControllerConfig ctrl;
  SimConfig sim;
  sim.max_steps = 400;
  sim.noise.pos = 0.05;
  sim.noise.heading = 0.01;
  sim.noise.vel = 0.03;
  sim.noise.seed = 21;
  const RunLog log = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  REQUIRE_FALSE(log.aborted);
  REQUIRE(log.rows.size() == 400);
  double prev_a = 0.0;
  double prev_delta = 0.0;
  for (const RunRecord& r : log.rows) {
    CHECK(std::abs(r.delta_cmd) <= std::numbers::pi / 6.0 + 1e-9);
    CHECK(std::abs(r.delta_cmd - prev_delta) <= std::numbers::pi / 300.0 + 1e-9);
    CHECK(std::abs(r.a_cmd - prev_a) <= 0.1 + 1e-9);
    prev_a = r.a_cmd;
    prev_delta = r.delta_cmd;
  }
  CHECK(summarize(log).mean_cte < 0.5);
}

TEST_CASE("logged errors equal a recomputation from the logged poses") {
  Xy circle;
  for (int i = 0; i < 160; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / 160.0;
    circle.x.push_back(15.0 * std::sin(theta));
    circle.y.push_back(15.0 * (1.0 - std::cos(theta)));
  }
  TrajectoryOptions opts;
  opts.limits.v_fixed = 4.0;
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xy(circle.x, circle.y, opts);
  ControllerConfig ctrl;
  SimConfig sim;
  sim.max_steps = 150;
  const RunLog log = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  const MetricsSummary stored = summarize(log);
  const MetricsSummary recomputed = summarize_against(log, traj);
  CHECK(stored.max_cte == doctest::Approx(recomputed.max_cte).epsilon(1e-12));
  CHECK(stored.mean_cte == doctest::Approx(recomputed.mean_cte).epsilon(1e-12));
  CHECK(stored.mle == doctest::Approx(recomputed.mle).epsilon(1e-12));
  CHECK(stored.ale == doctest::Approx(recomputed.ale).epsilon(1e-12));
  CHECK(stored.moe == doctest::Approx(recomputed.moe).epsilon(1e-12));
  CHECK(stored.aoe == doctest::Approx(recomputed.aoe).epsilon(1e-12));
}

TEST_CASE("plant mismatch knob shifts the plant parameters") {
  const ReferenceTrajectory traj = straight_path(30.0, 1.0, 5.0);
  ControllerConfig ctrl;
  SimConfig sim;
  sim.max_steps = 50;
  sim.plant_params = VehicleParams{};
  sim.plant_params.m *= 1.1;
  sim.plant_params_set = true;
  const RunLog log = run_closed_loop(traj, VehicleParams{}, ctrl, sim);
  CHECK_FALSE(log.rows.empty());
  CHECK_FALSE(log.aborted);
}

TEST_CASE("sim config validation") {
  SimConfig sim;
  sim.ts_sim = 0.03;  // does not divide 0.05
  CHECK_THROWS_AS(sim.validate(0.05), std::invalid_argument);
  sim = SimConfig{};
  sim.noise.pos = -0.1;
  CHECK_THROWS_AS(sim.validate(0.05), std::invalid_argument);
  sim = SimConfig{};
  CHECK_NOTHROW(sim.validate(0.05));
}

}  // TEST_SUITE
