#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lpvmpc/trajectory.hpp"

using namespace lpvmpc;

namespace {

constexpr double kPi = std::numbers::pi;

Xy circle_points(double radius, int n) {
  Xy out;
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * kPi * i / n;
    out.x.push_back(radius * std::cos(theta));
    out.y.push_back(radius * std::sin(theta));
  }
  return out;
}

}  // namespace

TEST_SUITE("trajectory") {

TEST_CASE("arc length of a 3-4-5 segment") {
  const std::vector<double> xs{0.0, 3.0};
  const std::vector<double> ys{0.0, 4.0};
  const std::vector<double> s = arc_length(xs, ys);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(5.0));
}

TEST_CASE("arc length around unit square corners") {
  const std::vector<double> xs{0.0, 1.0, 1.0, 0.0};
  const std::vector<double> ys{0.0, 0.0, 1.0, 1.0};
  const std::vector<double> s = arc_length(xs, ys);
  CHECK(s == std::vector<double>{0.0, 1.0, 2.0, 3.0});
}

TEST_CASE("arc length of a sampled circle matches the circumference") {
  const Xy c = circle_points(20.0, 720);
  std::vector<double> xs = c.x;
  std::vector<double> ys = c.y;
  xs.push_back(c.x.front());
  ys.push_back(c.y.front());
  const std::vector<double> s = arc_length(xs, ys);
  CHECK(s.back() == doctest::Approx(2.0 * kPi * 20.0).epsilon(1e-3));
}

TEST_CASE("arc length rejects degenerate segments") {
  const std::vector<double> xs{0.0, 1.0, 1.0};
  const std::vector<double> ys{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(arc_length(xs, ys), std::invalid_argument);
  CHECK_THROWS_AS(arc_length(std::vector<double>{0.0}, std::vector<double>{0.0}),
                  std::invalid_argument);
}

TEST_CASE("curvature of a straight line is zero") {
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(0.37 * i);
    ys.push_back(0.11 * i);
  }
  for (double k : curvature(xs, ys)) {
    CHECK(std::abs(k) < 1e-9);
  }
}

TEST_CASE("curvature of a circle is 1/R at interior points") {
  const Xy c = circle_points(20.0, 252);  // ~0.5 m spacing
  const std::vector<double> kappa = curvature(c.x, c.y);
  for (std::size_t i = 2; i + 2 < kappa.size(); ++i) {
    CHECK(std::abs(kappa[i]) == doctest::Approx(0.05).epsilon(0.01));
  }
  // Counterclockwise traversal turns left: positive sign.
  CHECK(kappa[kappa.size() / 2] > 0.0);
}

TEST_CASE("curvature at a parabola vertex converges to 2") {
  // Samples deliberately straddle the vertex asymmetrically; the estimate at
  // the nearest sample must approach the analytic kappa(0) = 2.
  auto vertex_kappa = [](double dx) {
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t nearest = 0;
    for (double x = -1.0 + 0.37 * dx; x <= 1.0; x += dx) {
      if (std::abs(x) < std::abs(xs.empty() ? 1e9 : xs[nearest])) {
        nearest = xs.size();
      }
      xs.push_back(x);
      ys.push_back(x * x);
    }
    return curvature(xs, ys)[nearest];
  };
  const double err_coarse = std::abs(vertex_kappa(0.2) - 2.0);
  const double err_fine = std::abs(vertex_kappa(0.002) - 2.0);
  CHECK(err_fine < err_coarse);
  CHECK(err_fine < 1e-3);
}

TEST_CASE("curvature needs at least 3 points") {
  CHECK_THROWS_AS(curvature(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("heading along the axes") {
  const std::vector<double> xs{0.0, 1.0, 2.0};
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  for (double h : heading(xs, zeros)) {
    CHECK(h == doctest::Approx(0.0));
  }
  for (double h : heading(zeros, xs)) {
    CHECK(h == doctest::Approx(kPi / 2.0));
  }
}

TEST_CASE("heading winds by 2 pi around a circle") {
  const Xy c = circle_points(15.0, 360);
  const std::vector<double> psi = heading(c.x, c.y, true);
  double winding = 0.0;
  for (std::size_t i = 0; i + 1 < psi.size(); ++i) {
    winding += wrap_angle(psi[i + 1] - psi[i]);
  }
  winding += wrap_angle(psi.front() - psi.back());
  CHECK(winding == doctest::Approx(2.0 * kPi).epsilon(1e-6));
}

TEST_CASE("heading-curvature consistency on a smooth path") {
  const Xy c = circle_points(30.0, 600);
  const std::vector<double> s = arc_length(c.x, c.y);
  const std::vector<double> psi = heading(c.x, c.y);
  const std::vector<double> kappa = curvature(c.x, c.y);
  for (std::size_t i = 5; i + 5 < psi.size(); ++i) {
    const double dpsi = std::abs(wrap_angle(psi[i + 1] - psi[i]));
    const double ds = s[i + 1] - s[i];
    CHECK(dpsi == doctest::Approx(std::abs(kappa[i]) * ds).epsilon(2e-3));
  }
}

TEST_CASE("fixed speed profile") {
  const std::vector<double> kappa(10, 0.1);
  const std::vector<double> s{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  SpeedLimits lim;
  lim.v_fixed = 8.0;
  for (double v : speed_profile(kappa, s, SpeedMode::fixed, lim)) {
    CHECK(v == 8.0);
  }
}

TEST_CASE("curvature-limited speed hits the cap on straights") {
  const std::vector<double> kappa(20, 0.0);
  std::vector<double> s;
  for (int i = 0; i < 20; ++i) {
    s.push_back(i);
  }
  SpeedLimits lim;
  lim.v_max = 9.0;
  const std::vector<double> v = speed_profile(kappa, s, SpeedMode::curvature_limited, lim);
  for (double vi : v) {
    CHECK(vi == doctest::Approx(9.0));
  }
}

TEST_CASE("curvature-limited speed formula before smoothing") {
  // Flat curvature, so the forward-backward pass changes nothing.
  const std::vector<double> kappa(10, 0.05);
  std::vector<double> s;
  for (int i = 0; i < 10; ++i) {
    s.push_back(2.0 * i);
  }
  SpeedLimits lim;
  lim.a_lat_max = 2.0;
  lim.v_min = 0.5;
  lim.v_max = 100.0;
  const std::vector<double> v = speed_profile(kappa, s, SpeedMode::curvature_limited, lim);
  for (double vi : v) {
    CHECK(vi == doctest::Approx(std::sqrt(40.0)).epsilon(1e-12));
  }
}

TEST_CASE("speed profile stays within limits and below the raw profile") {
  std::vector<double> kappa;
  std::vector<double> s;
  for (int i = 0; i < 200; ++i) {
    kappa.push_back(0.2 * std::sin(0.1 * i));
    s.push_back(0.5 * i);
  }
  SpeedLimits lim;
  lim.v_min = 1.0;
  lim.v_max = 12.0;
  lim.a_long_max = 0.8;
  const std::vector<double> v = speed_profile(kappa, s, SpeedMode::curvature_limited, lim);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double raw =
        std::clamp(std::sqrt(lim.a_lat_max / std::max(std::abs(kappa[i]), 1e-6)), lim.v_min,
                   lim.v_max);
    CHECK(v[i] >= lim.v_min);
    CHECK(v[i] <= lim.v_max);
    CHECK(v[i] <= raw + 1e-12);
  }
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double dv2 = std::abs(v[i + 1] * v[i + 1] - v[i] * v[i]);
    CHECK(dv2 / (2.0 * (s[i + 1] - s[i])) <= lim.a_long_max + 1e-9);
  }
}

TEST_CASE("reference window spacing on a straight path") {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> vs;
  for (int i = 0; i <= 100; ++i) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(0.0);
    vs.push_back(10.0);
  }
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xyv(xs, ys, vs);
  VehicleState state;
  state.x = 10.0;
  state.y = 0.0;
  const ReferenceWindow win = traj.reference_window(state, 5, 0.1);
  CHECK(win.anchor == 10);
  REQUIRE(win.refs.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(win.refs[static_cast<std::size_t>(k)].x == doctest::Approx(10.0 + (k + 1) * 1.0));
    CHECK(win.refs[static_cast<std::size_t>(k)].y == doctest::Approx(0.0));
    CHECK(win.refs[static_cast<std::size_t>(k)].vx == doctest::Approx(10.0));
  }
}

TEST_CASE("reference window saturates past the end of an open path") {
  std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  std::vector<double> ys{0.0, 0.0, 0.0, 0.0};
  std::vector<double> vs{5.0, 5.0, 5.0, 5.0};
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xyv(xs, ys, vs);
  VehicleState state;
  state.x = 10.0;
  const ReferenceWindow win = traj.reference_window(state, 4, 0.5);
  for (const OutputRef& r : win.refs) {
    CHECK(r.x == doctest::Approx(3.0));
    CHECK(r.y == doctest::Approx(0.0));
  }
}

TEST_CASE("reference window wraps across a closed seam without a jump") {
  const Xy c = circle_points(20.0, 252);
  TrajectoryOptions opts;
  opts.speed_mode = SpeedMode::fixed;
  opts.limits.v_fixed = 5.0;
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xy(c.x, c.y, opts);
  REQUIRE(traj.closed());
  double max_ds = 0.0;
  for (std::size_t i = 0; i + 1 < traj.points().size(); ++i) {
    max_ds = std::max(max_ds, traj.points()[i + 1].s - traj.points()[i].s);
  }
  // Query right before the seam; the window must cross it smoothly.
  VehicleState state;
  state.x = traj.points().back().x;
  state.y = traj.points().back().y;
  const ReferenceWindow win = traj.reference_window(state, 10, 0.5);
  double prev_x = win.now.x;
  double prev_y = win.now.y;
  for (const OutputRef& r : win.refs) {
    CHECK(std::hypot(r.x - prev_x, r.y - prev_y) <= 2.0 * std::max(max_ds, 5.0 * 0.5));
    prev_x = r.x;
    prev_y = r.y;
  }
}

TEST_CASE("window length is exactly N") {
  const Xy c = circle_points(10.0, 100);
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xy(c.x, c.y);
  VehicleState state;
  for (int n : {1, 7, 40}) {
    CHECK(traj.reference_window(state, n, 0.05).refs.size() == static_cast<std::size_t>(n));
  }
  CHECK_THROWS_AS(traj.reference_window(state, 0, 0.05), std::invalid_argument);
}

TEST_CASE("interior curvature is stable under 2x resampling") {
  TrajectoryOptions opts;
  const ReferenceTrajectory coarse =
      ReferenceTrajectory::from_xy(circle_points(20.0, 250).x, circle_points(20.0, 250).y, opts);
  const ReferenceTrajectory fine =
      ReferenceTrajectory::from_xy(circle_points(20.0, 500).x, circle_points(20.0, 500).y, opts);
  const double k_coarse = coarse.points()[100].kappa;
  const double k_fine = fine.points()[200].kappa;
  CHECK(std::abs(k_coarse - k_fine) / std::abs(k_fine) < 0.005);
}

TEST_CASE("closure detection") {
  const Xy c = circle_points(10.0, 100);
  CHECK(ReferenceTrajectory::from_xy(c.x, c.y).closed());
  std::vector<double> xs{0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> ys(5, 0.0);
  CHECK_FALSE(ReferenceTrajectory::from_xy(xs, ys).closed());
  TrajectoryOptions force_open;
  force_open.closure = PathClosure::open;
  CHECK_FALSE(ReferenceTrajectory::from_xy(c.x, c.y, force_open).closed());
}

TEST_CASE("an explicitly repeated first point marks a loop") {
  Xy c = circle_points(10.0, 100);
  c.x.push_back(c.x.front());
  c.y.push_back(c.y.front());
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xy(c.x, c.y);
  CHECK(traj.closed());
  CHECK(traj.points().size() == 100);
}

TEST_CASE("generated shapes") {
  const Xy line = gen_line(100.0, 1.0);
  CHECK(line.x.size() == 101);
  CHECK(line.x.back() == doctest::Approx(100.0));

  const Xy circ = gen_circle(20.0, 0.5);
  CHECK(circ.x.size() >= 250);
  CHECK(circ.x.size() <= 254);
  const double gap = std::hypot(circ.x.back() - circ.x.front(), circ.y.back() - circ.y.front());
  CHECK(gap <= 0.5 + 1e-9);

  const Xy eight = gen_figure_eight(47.9029, 0.5);
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xy(eight.x, eight.y);
  CHECK(traj.closed());
  CHECK(traj.kappa_max() == doctest::Approx(0.1).epsilon(0.02));
  // Signed curvature flips exactly twice per loop, once at each crossing
  // (one flip sits on the wrap-around pair).
  int sign_changes = 0;
  const auto& pts = traj.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = pts[i].kappa;
    const double b = pts[(i + 1) % pts.size()].kappa;
    if (std::abs(a) > 1e-6 && std::abs(b) > 1e-6 && std::signbit(a) != std::signbit(b)) {
      ++sign_changes;
    }
  }
  CHECK(sign_changes == 2);

  CHECK_THROWS_AS(gen_line(-1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(gen_circle(10.0, 0.0), std::invalid_argument);
}

TEST_CASE("trajectory summary quantities") {
  TrajectoryOptions opts;
  const Xy c = circle_points(20.0, 252);
  const ReferenceTrajectory traj = ReferenceTrajectory::from_xy(c.x, c.y, opts);
  CHECK(traj.kappa_max() == doctest::Approx(0.05).epsilon(0.01));
  CHECK(traj.total_curvature() == doctest::Approx(2.0 * kPi).epsilon(0.01));
  CHECK(traj.total_length() == doctest::Approx(2.0 * kPi * 20.0).epsilon(0.001));
}

}  // TEST_SUITE
