#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "lpvmpc/controller.hpp"
#include "lpvmpc/pipeline.hpp"
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

Eigen::VectorXd shift_blocks(const Eigen::VectorXd& z) {
  Eigen::VectorXd out(z.size());
  out.head(z.size() - 2) = z.tail(z.size() - 2);
  out.tail<2>() = z.tail<2>();
  return out;
}

}  // namespace

TEST_SUITE("controller") {

TEST_CASE("steady cruise on a straight path holds the line") {
  VehicleParams p;
  MpcController ctrl(straight_path(200.0, 1.0, 8.0), p, ControllerConfig{});
  VehicleState s;
  s.vx = 8.0;
  ControlInput prev;
  ControlCommand cmd;
  for (int i = 0; i < 60; ++i) {
    cmd = ctrl.step(s, prev);
    prev = ControlInput{cmd.a, cmd.delta};
    for (int k = 0; k < 5; ++k) {
      s = integrate_plant(s, prev, p, 0.01, Integrator::rk4);
    }
  }
  // After the transient: negligible steering, acceleration offsets friction.
  for (int i = 0; i < 20; ++i) {
    cmd = ctrl.step(s, prev);
    prev = ControlInput{cmd.a, cmd.delta};
    for (int k = 0; k < 5; ++k) {
      s = integrate_plant(s, prev, p, 0.01, Integrator::rk4);
    }
    CHECK(std::abs(cmd.delta) < 1e-3);
    CHECK(std::abs(cmd.a - p.mu * p.g) < 0.05);
  }
}

TEST_CASE("every command respects the absolute and rate limits") {
  VehicleParams p;
  MpcController ctrl(straight_path(80.0, 1.0, 6.0), p, ControllerConfig{});
  VehicleState s;
  s.vx = 2.0;  // far below the reference speed: rate-limited ramp expected
  s.y = 0.5;
  ControlInput prev;
  for (int i = 0; i < 120; ++i) {
    const ControlCommand cmd = ctrl.step(s, prev);
    CHECK(std::abs(cmd.delta) <= std::numbers::pi / 6.0 + 1e-9);
    CHECK(std::abs(cmd.delta - prev.delta) <= std::numbers::pi / 300.0 + 1e-9);
    CHECK(std::abs(cmd.a - prev.a) <= 0.1 + 1e-9);
    const auto [lo, hi] = accel_envelope(s, prev, p);
    CHECK(cmd.a >= lo - 1e-9);
    CHECK(cmd.a <= hi + 1e-9);
    prev = ControlInput{cmd.a, cmd.delta};
    for (int k = 0; k < 5; ++k) {
      s = integrate_plant(s, prev, p, 0.01, Integrator::rk4);
    }
  }
}

TEST_CASE("a lateral offset steers back toward the path") {
  VehicleParams p;
  // Positive steering must produce positive yaw rate at positive speed.
  VehicleState probe;
  probe.vx = 8.0;
  ControlInput left;
  left.delta = 0.1;
  VehicleState after = probe;
  for (int k = 0; k < 20; ++k) {
    after = integrate_plant(after, left, p, 0.01, Integrator::rk4);
  }
  CHECK(after.psi_dot > 0.0);

  // Offset above a +x path: the first command steers negative (rightward).
  MpcController ctrl(straight_path(120.0, 1.0, 8.0), p, ControllerConfig{});
  VehicleState s;
  s.vx = 8.0;
  s.x = 20.0;
  s.y = 1.0;
  const ControlCommand cmd = ctrl.step(s, ControlInput{});
  CHECK(cmd.delta < 0.0);
}

TEST_CASE("warm start is the previous solution shifted by one block") {
  VehicleParams p;
  MpcController ctrl(straight_path(150.0, 1.0, 8.0), p, ControllerConfig{});
  VehicleState s;
  s.vx = 8.0;
  s.y = 0.4;
  ControlInput prev;
  const ControlCommand first = ctrl.step(s, prev);
  REQUIRE(first.diag.solution.size() > 0);
  prev = ControlInput{first.a, first.delta};
  s.x += 0.4;
  const ControlCommand second = ctrl.step(s, prev);
  REQUIRE(second.diag.warm_start.size() == first.diag.solution.size());
  CHECK((second.diag.warm_start - shift_blocks(first.diag.solution)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("the applied input is the first block of the solution") {
  VehicleParams p;
  MpcController ctrl(straight_path(150.0, 1.0, 8.0), p, ControllerConfig{});
  VehicleState s;
  s.vx = 8.0;
  s.y = 0.2;
  const ControlCommand cmd = ctrl.step(s, ControlInput{});
  REQUIRE(cmd.diag.solution.size() >= 2);
  // Up to the exact clamp of solver-tolerance overshoot, the applied input
  // is block 0 of the solution.
  CHECK(std::abs(cmd.a - cmd.diag.solution(0)) <= 2e-6);
  CHECK(std::abs(cmd.delta - cmd.diag.solution(1)) <= 2e-6);
  CHECK(cmd.diag.predicted_states.rows() == ctrl.config().horizon);
  CHECK(cmd.diag.predicted_states.cols() == 6);
}

TEST_CASE("infeasible cycles soften the state rows") {
  VehicleParams p;
  ControllerConfig cfg;
  cfg.soft_state_constraints = true;
  MpcController ctrl(straight_path(100.0, 1.0, 8.0), p, cfg);
  // vx far below the hard floor of 1 m/s: the vx >= 1 rows cannot be met
  // within one step under the acceleration rate limit.
  VehicleState s;
  s.vx = 0.4;
  const ControlCommand cmd = ctrl.step(s, ControlInput{});
  CHECK(cmd.diag.softened);
  CHECK(cmd.diag.degraded);
  CHECK(std::abs(cmd.delta) <= std::numbers::pi / 6.0 + 1e-9);
  CHECK(std::abs(cmd.a) <= 0.1 + 1e-9);
}

TEST_CASE("with soft constraints off the fallback command is used") {
  VehicleParams p;
  ControllerConfig cfg;
  cfg.soft_state_constraints = false;
  MpcController ctrl(straight_path(100.0, 1.0, 8.0), p, cfg);
  VehicleState s;
  s.vx = 0.4;
  ControlInput prev;
  prev.a = 0.05;
  prev.delta = 0.01;
  const ControlCommand cmd = ctrl.step(s, prev);
  CHECK(cmd.diag.degraded);
  CHECK_FALSE(cmd.diag.softened);
  CHECK(cmd.delta == doctest::Approx(prev.delta));
  CHECK(cmd.a == doctest::Approx(prev.a - 0.1));
}

TEST_CASE("an exhausted open path yields a finished hold command") {
  VehicleParams p;
  MpcController ctrl(straight_path(50.0, 1.0, 5.0), p, ControllerConfig{});
  VehicleState s;
  s.vx = 5.0;
  s.x = 49.6;  // anchored on the last point, within the finish radius
  ControlInput prev;
  prev.delta = 0.05;
  const ControlCommand cmd = ctrl.step(s, prev);
  CHECK(cmd.diag.finished);
  // Steering relaxes toward zero within the rate bound, braking engages.
  CHECK(cmd.delta == doctest::Approx(prev.delta - std::numbers::pi / 300.0));
  CHECK(cmd.a < 0.0);
}

TEST_CASE("config validation") {
  ControllerConfig cfg;
  cfg.horizon = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ControllerConfig{};
  cfg.ts = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ControllerConfig{};
  WeightSet w;
  w.q = Eigen::Vector4d(-1.0, 0.0, 0.0, 0.0);
  cfg.weights = w;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(ControllerConfig{}.validate());
}

TEST_CASE("lockstep pipeline is reproducible") {
  VehicleParams p;
  auto make_source = [&] {
    auto counter = std::make_shared<int>(0);
    return [counter]() -> std::optional<StateSample> {
      if (*counter >= 40) {
        return std::nullopt;
      }
      StateSample s;
      s.t = 0.05 * (*counter);
      s.state.vx = 8.0;
      s.state.x = 0.4 * (*counter);
      s.state.y = 0.3;
      ++(*counter);
      return s;
    };
  };
  auto run_once = [&] {
    MpcController ctrl(straight_path(100.0, 1.0, 8.0), p, ControllerConfig{});
    std::vector<double> out;
    const PipelineSummary sum = run_pipeline(
        make_source(),
        [&](const TimedCommand& c) {
          out.push_back(c.command.a);
          out.push_back(c.command.delta);
        },
        ctrl, ControlInput{}, PipelineMode::lockstep);
    CHECK(sum.cycles == 40);
    CHECK(sum.held == 0);
    return out;
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("stale states are held, fresh ones computed") {
  VehicleParams p;
  MpcController ctrl(straight_path(100.0, 1.0, 8.0), p, ControllerConfig{});
  // Timestamps: normal, then one far in the past relative to the stream.
  const std::vector<double> stamps{0.0, 0.05, 0.10, 0.10 - 0.2, 0.15};
  auto idx = std::make_shared<std::size_t>(0);
  auto source = [idx, &stamps]() -> std::optional<StateSample> {
    if (*idx >= stamps.size()) {
      return std::nullopt;
    }
    StateSample s;
    s.t = stamps[*idx];
    s.state.vx = 8.0;
    s.state.x = 1.0 * static_cast<double>(*idx);
    ++(*idx);
    return s;
  };
  std::vector<TimedCommand> out;
  const PipelineSummary sum = run_pipeline(
      source, [&](const TimedCommand& c) { out.push_back(c); }, ctrl, ControlInput{},
      PipelineMode::lockstep);
  CHECK(sum.cycles == 5);
  CHECK(sum.held == 1);
  REQUIRE(out.size() == 5);
  CHECK(out[3].held);
  // The held cycle re-emits the previous command.
  CHECK(out[3].command.a == out[2].command.a);
  CHECK(out[3].command.delta == out[2].command.delta);
}

TEST_CASE("concurrent pipeline commands never use a stale state") {
  VehicleParams p;
  MpcController ctrl(straight_path(400.0, 1.0, 8.0), p, ControllerConfig{});
  const int total = 500;
  auto idx = std::make_shared<int>(0);
  auto source = [idx, total]() -> std::optional<StateSample> {
    if (*idx >= total) {
      return std::nullopt;
    }
    StateSample s;
    s.t = 0.05 * (*idx);
    s.state.vx = 8.0;
    s.state.x = 0.4 * (*idx);
    ++(*idx);
    return s;
  };
  std::vector<TimedCommand> out;
  const PipelineSummary sum = run_pipeline(
      source, [&](const TimedCommand& c) { out.push_back(c); }, ctrl, ControlInput{},
      PipelineMode::concurrent);
  CHECK(sum.cycles + sum.skipped == total);
  CHECK(sum.computed + sum.held == sum.cycles);
  CHECK(sum.computed > 0);
  for (const TimedCommand& c : out) {
    if (!c.held) {
      CHECK(c.t_latest - c.t_state <= 2.0 * 0.05 + 1e-9);
    }
  }
}

TEST_CASE("empty state stream reports zero cycles") {
  VehicleParams p;
  MpcController ctrl(straight_path(50.0, 1.0, 5.0), p, ControllerConfig{});
  const PipelineSummary sum = run_pipeline([]() -> std::optional<StateSample> { return {}; },
                                           [](const TimedCommand&) {}, ctrl, ControlInput{},
                                           PipelineMode::concurrent);
  CHECK(sum.cycles == 0);
  CHECK(sum.held == 0);
}

}  // TEST_SUITE
