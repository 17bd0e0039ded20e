#include "lpvmpc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lpvmpc {

namespace {

constexpr double kPi = std::numbers::pi;

double segment_length(double x0, double y0, double x1, double y1) {
  return std::hypot(x1 - x0, y1 - y0);
}

void require_same_size(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("x and y lists must have the same length");
  }
}

// Non-uniform 3-point stencils for d/ds and d^2/ds^2 at the middle node.
struct Stencil {
  double d1;
  double d2;
};

Stencil central(double fm, double f0, double fp, double hm, double hp) {
  const double denom = hm * hp * (hm + hp);
  Stencil st;
  st.d1 = (fp * hm * hm - fm * hp * hp + f0 * (hp * hp - hm * hm)) / denom;
  st.d2 = 2.0 * (fm * hp + fp * hm - f0 * (hm + hp)) / denom;
  return st;
}

// One-sided 3-point stencil at the first of three nodes spaced h0 then h1.
Stencil one_sided(double f0, double f1, double f2, double h0, double h1) {
  const double denom = h0 * h1 * (h0 + h1);
  Stencil st;
  st.d1 = (-f0 * (2.0 * h0 + h1) * h1 + f1 * (h0 + h1) * (h0 + h1) - f2 * h0 * h0) / denom;
  st.d2 = 2.0 * (f0 * h1 - f1 * (h0 + h1) + f2 * h0) / denom;
  return st;
}

std::vector<double> moving_average(const std::vector<double>& v, int window, bool closed) {
  if (window <= 1) {
    return v;
  }
  if (window % 2 == 0) {
    throw std::invalid_argument("smoothing window must be odd");
  }
  const int n = static_cast<int>(v.size());
  const int half = window / 2;
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (int k = -half; k <= half; ++k) {
      int j = i + k;
      if (closed) {
        j = ((j % n) + n) % n;
      } else if (j < 0 || j >= n) {
        continue;
      }
      sum += v[j];
      ++count;
    }
    out[i] = sum / count;
  }
  return out;
}

}  // namespace

std::vector<double> arc_length(std::span<const double> xs, std::span<const double> ys) {
  require_same_size(xs, ys);
  if (xs.size() < 2) {
    throw std::invalid_argument("arc_length needs at least 2 points");
  }
  std::vector<double> s(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double ds = segment_length(xs[i - 1], ys[i - 1], xs[i], ys[i]);
    if (!(ds > 0.0)) {
      throw std::invalid_argument("degenerate segment: duplicate consecutive points at index " +
                                  std::to_string(i));
    }
    s[i] = s[i - 1] + ds;
  }
  return s;
}

std::vector<double> curvature(std::span<const double> xs, std::span<const double> ys,
                              bool closed, int smoothing_window) {
  require_same_size(xs, ys);
  const std::size_t n = xs.size();
  if (n < 3) {
    throw std::invalid_argument("curvature needs at least 3 points");
  }
  const std::vector<double> s = arc_length(xs, ys);
  const double wrap_h = closed ? segment_length(xs[n - 1], ys[n - 1], xs[0], ys[0]) : 0.0;
  if (closed && !(wrap_h > 0.0)) {
    throw std::invalid_argument("closed path has a degenerate closing segment");
  }

  std::vector<double> kappa(n);
  for (std::size_t i = 0; i < n; ++i) {
    Stencil x_st;
    Stencil y_st;
    if (closed) {
      const std::size_t im = (i + n - 1) % n;
      const std::size_t ip = (i + 1) % n;
      const double hm = (i == 0) ? wrap_h : s[i] - s[i - 1];
      const double hp = (i == n - 1) ? wrap_h : s[i + 1] - s[i];
      x_st = central(xs[im], xs[i], xs[ip], hm, hp);
      y_st = central(ys[im], ys[i], ys[ip], hm, hp);
    } else if (i == 0) {
      x_st = one_sided(xs[0], xs[1], xs[2], s[1] - s[0], s[2] - s[1]);
      y_st = one_sided(ys[0], ys[1], ys[2], s[1] - s[0], s[2] - s[1]);
    } else if (i == n - 1) {
      // Mirrored one-sided stencil: same nodes walked backwards.
      x_st = one_sided(xs[n - 1], xs[n - 2], xs[n - 3], s[n - 1] - s[n - 2], s[n - 2] - s[n - 3]);
      y_st = one_sided(ys[n - 1], ys[n - 2], ys[n - 3], s[n - 1] - s[n - 2], s[n - 2] - s[n - 3]);
      x_st.d1 = -x_st.d1;
      y_st.d1 = -y_st.d1;
    } else {
      x_st = central(xs[i - 1], xs[i], xs[i + 1], s[i] - s[i - 1], s[i + 1] - s[i]);
      y_st = central(ys[i - 1], ys[i], ys[i + 1], s[i] - s[i - 1], s[i + 1] - s[i]);
    }
    const double speed_sq = x_st.d1 * x_st.d1 + y_st.d1 * y_st.d1;
    const double cross = x_st.d1 * y_st.d2 - y_st.d1 * x_st.d2;
    kappa[i] = cross / std::pow(speed_sq, 1.5);
  }
  return moving_average(kappa, smoothing_window, closed);
}

std::vector<double> heading(std::span<const double> xs, std::span<const double> ys, bool closed) {
  require_same_size(xs, ys);
  const std::size_t n = xs.size();
  if (n < 2) {
    throw std::invalid_argument("heading needs at least 2 points");
  }
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dx;
    double dy;
    if (closed) {
      const std::size_t im = (i + n - 1) % n;
      const std::size_t ip = (i + 1) % n;
      dx = xs[ip] - xs[im];
      dy = ys[ip] - ys[im];
    } else if (i == 0) {
      dx = xs[1] - xs[0];
      dy = ys[1] - ys[0];
    } else if (i == n - 1) {
      dx = xs[n - 1] - xs[n - 2];
      dy = ys[n - 1] - ys[n - 2];
    } else {
      dx = xs[i + 1] - xs[i - 1];
      dy = ys[i + 1] - ys[i - 1];
    }
    if (dx == 0.0 && dy == 0.0) {
      throw std::invalid_argument("degenerate tangent at index " + std::to_string(i));
    }
    psi[i] = wrap_angle(std::atan2(dy, dx));  // maps the -pi edge onto +pi
  }
  return psi;
}

std::vector<double> speed_profile(std::span<const double> kappa, std::span<const double> s,
                                  SpeedMode mode, const SpeedLimits& limits) {
  if (kappa.size() != s.size()) {
    throw std::invalid_argument("speed_profile: kappa and s must have the same length");
  }
  if (!(limits.v_min > 0.0) || !(limits.v_max > 0.0) || !(limits.v_fixed > 0.0) ||
      !(limits.a_lat_max > 0.0) || !(limits.a_long_max > 0.0)) {
    throw std::invalid_argument("speed_profile: limits must be positive");
  }
  if (limits.v_min > limits.v_max) {
    throw std::invalid_argument("speed_profile: v_min must not exceed v_max");
  }
  const std::size_t n = kappa.size();
  std::vector<double> v(n);
  if (mode == SpeedMode::fixed) {
    std::fill(v.begin(), v.end(), limits.v_fixed);
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double k = std::max(std::abs(kappa[i]), 1e-6);
    v[i] = std::clamp(std::sqrt(limits.a_lat_max / k), limits.v_min, limits.v_max);
  }
  // Forward-backward pass: only ever lowers a point, never raises it.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double ds = s[i + 1] - s[i];
    v[i + 1] = std::min(v[i + 1], std::sqrt(v[i] * v[i] + 2.0 * limits.a_long_max * ds));
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    const double ds = s[i] - s[i - 1];
    v[i - 1] = std::min(v[i - 1], std::sqrt(v[i] * v[i] + 2.0 * limits.a_long_max * ds));
  }
  return v;
}

ReferenceTrajectory ReferenceTrajectory::from_xy(std::span<const double> xs,
                                                 std::span<const double> ys,
                                                 const TrajectoryOptions& opts) {
  return from_xyv(xs, ys, {}, opts);
}

ReferenceTrajectory ReferenceTrajectory::from_xyv(std::span<const double> xs,
                                                  std::span<const double> ys,
                                                  std::span<const double> vs,
                                                  const TrajectoryOptions& opts) {
  require_same_size(xs, ys);
  if (!vs.empty() && vs.size() != xs.size()) {
    throw std::invalid_argument("speed column length does not match the point count");
  }
  std::vector<double> x(xs.begin(), xs.end());
  std::vector<double> y(ys.begin(), ys.end());
  std::vector<double> v(vs.begin(), vs.end());
  if (x.size() < 2) {
    throw std::invalid_argument("a trajectory needs at least 2 points");
  }

  // An exactly repeated first point marks an explicit loop; drop the repeat.
  bool closed = false;
  if (x.size() > 3 &&
      segment_length(x.back(), y.back(), x.front(), y.front()) < 1e-12) {
    x.pop_back();
    y.pop_back();
    if (!v.empty()) {
      v.pop_back();
    }
    closed = true;
  }

  std::vector<double> s = arc_length(x, y);

  switch (opts.closure) {
    case PathClosure::open:
      closed = false;
      break;
    case PathClosure::closed:
      closed = true;
      break;
    case PathClosure::automatic: {
      if (!closed && x.size() >= 4) {
        std::vector<double> seg(x.size() - 1);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
          seg[i] = s[i + 1] - s[i];
        }
        std::nth_element(seg.begin(), seg.begin() + seg.size() / 2, seg.end());
        const double median = seg[seg.size() / 2];
        closed = segment_length(x.back(), y.back(), x.front(), y.front()) <= 2.0 * median;
      }
      break;
    }
  }

  std::vector<double> kappa(x.size(), 0.0);
  if (x.size() >= 3) {
    kappa = curvature(x, y, closed, opts.smoothing_window);
    for (double& k : kappa) {
      k = std::clamp(k, -opts.kappa_abs_max, opts.kappa_abs_max);
    }
  }
  const std::vector<double> psi = heading(x, y, closed);
  if (v.empty()) {
    v = speed_profile(kappa, s, opts.speed_mode, opts.limits);
  }

  ReferenceTrajectory traj;
  traj.closed_ = closed;
  traj.points_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    traj.points_[i] = PathPoint{x[i], y[i], s[i], kappa[i], psi[i], v[i]};
  }
  const double closing = closed ? segment_length(x.back(), y.back(), x.front(), y.front()) : 0.0;
  traj.total_length_ = s.back() + closing;
  traj.kappa_max_ = 0.0;
  traj.total_curvature_ = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    traj.kappa_max_ = std::max(traj.kappa_max_, std::abs(kappa[i]));
    const double ds = (i + 1 < x.size()) ? s[i + 1] - s[i] : closing;
    traj.total_curvature_ += std::abs(kappa[i]) * ds;
  }
  return traj;
}

std::size_t ReferenceTrajectory::nearest_index(double x, double y) const {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double dx = points_[i].x - x;
    const double dy = points_[i].y - y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

PathPoint ReferenceTrajectory::sample_at(double s) const {
  const double s_back = points_.back().s;
  std::size_t i;
  double frac;
  const PathPoint* p0;
  const PathPoint* p1;
  if (closed_) {
    s = std::fmod(s, total_length_);
    if (s < 0.0) {
      s += total_length_;
    }
    if (s >= s_back) {
      p0 = &points_.back();
      p1 = &points_.front();
      frac = (s - s_back) / (total_length_ - s_back);
    } else {
      i = static_cast<std::size_t>(
              std::upper_bound(points_.begin(), points_.end(), s,
                               [](double val, const PathPoint& p) { return val < p.s; }) -
              points_.begin()) -
          1;
      p0 = &points_[i];
      p1 = &points_[i + 1];
      frac = (s - p0->s) / (p1->s - p0->s);
    }
  } else {
    if (s <= 0.0) {
      PathPoint p = points_.front();
      return p;
    }
    if (s >= s_back) {
      PathPoint p = points_.back();
      return p;
    }
    i = static_cast<std::size_t>(
            std::upper_bound(points_.begin(), points_.end(), s,
                             [](double val, const PathPoint& p) { return val < p.s; }) -
            points_.begin()) -
        1;
    p0 = &points_[i];
    p1 = &points_[i + 1];
    frac = (s - p0->s) / (p1->s - p0->s);
  }
  PathPoint out;
  out.x = p0->x + frac * (p1->x - p0->x);
  out.y = p0->y + frac * (p1->y - p0->y);
  out.s = s;
  out.kappa = p0->kappa + frac * (p1->kappa - p0->kappa);
  out.psi_r = wrap_angle(p0->psi_r + frac * wrap_angle(p1->psi_r - p0->psi_r));
  out.v_r = p0->v_r + frac * (p1->v_r - p0->v_r);
  return out;
}

double ReferenceTrajectory::project_arc_length(double x, double y, std::size_t anchor) const {
  // Continuous arc-length of the foot point on the segments adjacent to the
  // anchor sample; keeps the lookahead free of sample-spacing quantization.
  const std::size_t n = points_.size();
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = points_[anchor].s;
  auto consider = [&](std::size_t i0, std::size_t i1, double s0, double seg_len) {
    const PathPoint& p0 = points_[i0];
    const PathPoint& p1 = points_[i1];
    const double vx = p1.x - p0.x;
    const double vy = p1.y - p0.y;
    const double len2 = vx * vx + vy * vy;
    if (!(len2 > 0.0)) {
      return;
    }
    const double t = std::clamp(((x - p0.x) * vx + (y - p0.y) * vy) / len2, 0.0, 1.0);
    const double px = p0.x + t * vx;
    const double py = p0.y + t * vy;
    const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = s0 + t * seg_len;
    }
  };
  if (anchor + 1 < n) {
    consider(anchor, anchor + 1, points_[anchor].s, points_[anchor + 1].s - points_[anchor].s);
  } else if (closed_) {
    consider(n - 1, 0, points_[n - 1].s, total_length_ - points_[n - 1].s);
  }
  if (anchor > 0) {
    consider(anchor - 1, anchor, points_[anchor - 1].s,
             points_[anchor].s - points_[anchor - 1].s);
  } else if (closed_) {
    consider(n - 1, 0, points_[n - 1].s, total_length_ - points_[n - 1].s);
  }
  return best_s;
}

ReferenceWindow ReferenceTrajectory::reference_window(const VehicleState& state, int n,
                                                      double ts) const {
  if (points_.empty()) {
    throw std::invalid_argument("reference_window: empty trajectory");
  }
  if (n < 1) {
    throw std::invalid_argument("reference_window: horizon must be >= 1");
  }
  ReferenceWindow win;
  win.anchor = nearest_index(state.x, state.y);
  const PathPoint& a = points_[win.anchor];
  win.now = OutputRef{a.v_r, a.psi_r, a.x, a.y};
  const double s_anchor = project_arc_length(state.x, state.y, win.anchor);
  const double v_look = std::max(a.v_r, kLookaheadSpeedFloor);
  win.refs.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const PathPoint p = sample_at(s_anchor + static_cast<double>(k) * ts * v_look);
    win.refs.push_back(OutputRef{p.v_r, p.psi_r, p.x, p.y});
  }
  return win;
}

Xy gen_line(double length, double ds) {
  if (!(length > 0.0) || !(ds > 0.0)) {
    throw std::invalid_argument("gen_line: length and ds must be positive");
  }
  Xy out;
  for (double x = 0.0; x < length - 1e-9; x += ds) {
    out.x.push_back(x);
    out.y.push_back(0.0);
  }
  out.x.push_back(length);
  out.y.push_back(0.0);
  return out;
}

Xy gen_circle(double radius, double ds) {
  if (!(radius > 0.0) || !(ds > 0.0)) {
    throw std::invalid_argument("gen_circle: radius and ds must be positive");
  }
  const double circumference = 2.0 * kPi * radius;
  const auto n = static_cast<std::size_t>(std::max(3.0, std::ceil(circumference / ds)));
  Xy out;
  out.x.reserve(n);
  out.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    out.x.push_back(radius * std::sin(theta));
    out.y.push_back(radius * (1.0 - std::cos(theta)));
  }
  return out;
}

Xy gen_figure_eight(double scale, double ds) {
  if (!(scale > 0.0) || !(ds > 0.0)) {
    throw std::invalid_argument("gen_figure_eight: scale and ds must be positive");
  }
  Xy out;
  double t = 0.0;
  while (t < 2.0 * kPi) {
    out.x.push_back(scale * std::sin(t));
    out.y.push_back(scale * std::sin(t) * std::cos(t));
    const double speed = scale * std::hypot(std::cos(t), std::cos(2.0 * t));
    t += ds / speed;
  }
  return out;
}

Xy gen_s_curve(double length, double amplitude, double ds) {
  if (!(length > 0.0) || !(amplitude > 0.0) || !(ds > 0.0)) {
    throw std::invalid_argument("gen_s_curve: length, amplitude, and ds must be positive");
  }
  const double omega = 2.0 * kPi / length;
  Xy out;
  double x = 0.0;
  while (x < length) {
    out.x.push_back(x);
    out.y.push_back(amplitude * std::sin(omega * x));
    const double slope = amplitude * omega * std::cos(omega * x);
    x += ds / std::hypot(1.0, slope);
  }
  out.x.push_back(length);
  out.y.push_back(amplitude * std::sin(omega * length));
  return out;
}

}  // namespace lpvmpc
