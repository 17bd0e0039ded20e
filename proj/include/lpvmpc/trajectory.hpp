#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lpvmpc/vehicle.hpp"

namespace lpvmpc {

/// One sample of the reference path.
struct PathPoint {
  double x = 0.0;     ///< global X [m]
  double y = 0.0;     ///< global Y [m]
  double s = 0.0;     ///< cumulative arc length [m]
  double kappa = 0.0; ///< signed curvature [1/m]
  double psi_r = 0.0; ///< tangent heading [rad], in (-pi, pi]
  double v_r = 0.0;   ///< reference speed [m/s]
};

/// Reference output at one horizon step, ordered like y = [vx, psi, X, Y].
struct OutputRef {
  double vx = 0.0;
  double psi = 0.0;
  double x = 0.0;
  double y = 0.0;

  Eigen::Vector4d vec() const { return {vx, psi, x, y}; }
};

enum class SpeedMode { fixed, curvature_limited };

struct SpeedLimits {
  double v_fixed = 8.0;
  double v_min = 1.0;
  double v_max = 30.0;
  double a_lat_max = 2.0;
  double a_long_max = 1.0;
};

enum class PathClosure { automatic, open, closed };

struct TrajectoryOptions {
  PathClosure closure = PathClosure::automatic;
  int smoothing_window = 1;     ///< odd moving-average width for kappa; 1 disables
  double kappa_abs_max = 10.0;  ///< clamp on |kappa| [1/m]
  SpeedMode speed_mode = SpeedMode::fixed;
  SpeedLimits limits;
};

/// Cumulative arc length: s0 = 0, s_i = s_{i-1} + segment length.
/// Throws std::invalid_argument on < 2 points or a degenerate segment.
std::vector<double> arc_length(std::span<const double> xs, std::span<const double> ys);

/// Signed curvature via finite differences with respect to arc length.
/// Interior points use central stencils, endpoints one-sided ones; with
/// `closed` the stencils wrap around. smoothing_window (odd, >= 1) applies a
/// moving average to the result. Needs >= 3 points.
std::vector<double> curvature(std::span<const double> xs, std::span<const double> ys,
                              bool closed = false, int smoothing_window = 1);

/// Tangent heading per point, wrapped to (-pi, pi]. Needs >= 2 points.
std::vector<double> heading(std::span<const double> xs, std::span<const double> ys,
                            bool closed = false);

/// Reference speed per point. Fixed mode returns v_fixed everywhere;
/// curvature_limited clamps sqrt(a_lat_max/|kappa|) into [v_min, v_max] and
/// then runs a forward-backward pass so |dv^2/2ds| <= a_long_max.
std::vector<double> speed_profile(std::span<const double> kappa, std::span<const double> s,
                                  SpeedMode mode, const SpeedLimits& limits);

struct ReferenceWindow {
  std::size_t anchor = 0;       ///< nearest path index to the query position
  OutputRef now;                ///< reference at the anchor sample
  std::vector<OutputRef> refs;  ///< N references at one-step spacing, k = 1..N
};

/// Immutable sampled reference path with geometry and speed attached.
class ReferenceTrajectory {
 public:
  /// Builds the path from raw samples; v_r comes from opts.speed_mode.
  static ReferenceTrajectory from_xy(std::span<const double> xs, std::span<const double> ys,
                                     const TrajectoryOptions& opts = {});
  /// Builds the path with recorded per-sample speeds.
  static ReferenceTrajectory from_xyv(std::span<const double> xs, std::span<const double> ys,
                                      std::span<const double> vs,
                                      const TrajectoryOptions& opts = {});

  const std::vector<PathPoint>& points() const { return points_; }
  bool closed() const { return closed_; }
  double kappa_max() const { return kappa_max_; }
  double total_curvature() const { return total_curvature_; }
  /// Path length; for closed paths this includes the closing segment.
  double total_length() const { return total_length_; }

  /// Index of the sample nearest to (x, y); ties resolve to the lower index.
  std::size_t nearest_index(double x, double y) const;

  /// Interpolated path point at arc length s. Open paths saturate at the
  /// endpoints, closed paths wrap modulo total_length().
  PathPoint sample_at(double s) const;

  /// N references ahead of the vehicle, spaced by ts * max(v_r(anchor),
  /// v_floor) in arc length. The anchor is the nearest sample; the lookahead
  /// starts from the continuous projection next to it.
  ReferenceWindow reference_window(const VehicleState& state, int n, double ts) const;

 private:
  double project_arc_length(double x, double y, std::size_t anchor) const;

  std::vector<PathPoint> points_;
  bool closed_ = false;
  double kappa_max_ = 0.0;
  double total_curvature_ = 0.0;
  double total_length_ = 0.0;
};

/// Lookahead speed floor used by reference_window; matches the lower
/// longitudinal-velocity bound.
inline constexpr double kLookaheadSpeedFloor = 1.0;

struct Xy {
  std::vector<double> x;
  std::vector<double> y;
};

Xy gen_line(double length, double ds);
Xy gen_circle(double radius, double ds);

/// Max |curvature| of a unit Gerono lemniscate; a scaled one has
/// kGeronoKappaMax / scale.
inline constexpr double kGeronoKappaMax = 4.790289406;

/// Gerono lemniscate (x = a sin t, y = a sin t cos t).
Xy gen_figure_eight(double scale, double ds);
/// Sine lane-change: y = amplitude * sin(2 pi x / length), x in [0, length].
Xy gen_s_curve(double length, double amplitude, double ds);

}  // namespace lpvmpc
