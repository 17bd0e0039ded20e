#include "lpvmpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "lpvmpc/simulator.hpp"

namespace lpvmpc {

double cte_line(double a, double b, double c, double x_v, double y_v) {
  const double norm = std::hypot(a, b);
  if (!(norm > 0.0)) {
    throw std::invalid_argument("cte_line: (a, b) must not both be zero");
  }
  return std::abs(a * x_v + b * y_v + c) / norm;
}

double cte_function(const std::function<double(double)>& f, double x_v, double y_v) {
  return y_v - f(x_v);
}

double cte_parametric(double x_v, double y_v, double x_r, double y_r, double theta_r) {
  return (x_v - x_r) * std::sin(theta_r) - (y_v - y_r) * std::cos(theta_r);
}

namespace {

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

}  // namespace

RowErrors compute_errors(const ReferenceTrajectory& traj, double x, double y, double psi) {
  const auto& pts = traj.points();
  RowErrors out;
  out.matched = traj.nearest_index(x, y);
  const PathPoint& ref = pts[out.matched];
  out.e_d = cte_parametric(x, y, ref.x, ref.y, ref.psi_r);
  out.e_theta = wrap_angle(ref.psi_r - psi);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    best = std::min(best, point_segment_distance(x, y, pts[i].x, pts[i].y, pts[i + 1].x,
                                                 pts[i + 1].y));
  }
  if (traj.closed()) {
    best = std::min(best, point_segment_distance(x, y, pts.back().x, pts.back().y, pts.front().x,
                                                 pts.front().y));
  }
  out.cte = best;
  return out;
}

namespace {

MetricsSummary aggregate(const std::vector<RowErrors>& rows) {
  MetricsSummary m;
  double sum_ed2 = 0.0;
  double sum_eth2 = 0.0;
  double sum_cte = 0.0;
  for (const RowErrors& r : rows) {
    m.mle = std::max(m.mle, std::abs(r.e_d));
    m.moe = std::max(m.moe, std::abs(r.e_theta));
    m.max_cte = std::max(m.max_cte, std::abs(r.cte));
    sum_ed2 += r.e_d * r.e_d;
    sum_eth2 += r.e_theta * r.e_theta;
    sum_cte += std::abs(r.cte);
  }
  const auto n = static_cast<double>(rows.size());
  m.ale = std::sqrt(sum_ed2 / n);
  m.aoe = std::sqrt(sum_eth2 / n);
  m.mean_cte = sum_cte / n;
  return m;
}

}  // namespace

MetricsSummary summarize(const RunLog& log) {
  if (log.rows.empty()) {
    throw std::invalid_argument("summarize: empty run log");
  }
  std::vector<RowErrors> rows;
  rows.reserve(log.rows.size());
  for (const RunRecord& r : log.rows) {
    RowErrors e;
    e.e_d = r.e_d;
    e.e_theta = wrap_angle(r.e_theta);
    e.cte = r.cte;
    rows.push_back(e);
  }
  return aggregate(rows);
}

MetricsSummary summarize_against(const RunLog& log, const ReferenceTrajectory& traj) {
  if (log.rows.empty()) {
    throw std::invalid_argument("summarize: empty run log");
  }
  std::vector<RowErrors> rows;
  rows.reserve(log.rows.size());
  for (const RunRecord& r : log.rows) {
    rows.push_back(compute_errors(traj, r.truth.x, r.truth.y, r.truth.psi));
  }
  return aggregate(rows);
}

std::string format_metrics_table(
    const std::vector<std::pair<std::string, MetricsSummary>>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %12s %12s %10s %10s %10s %10s\n", "Trajectory",
                "Max CTE (m)", "Mean CTE (m)", "MLE (m)", "ALE (m)", "MOE (rad)", "AOE (rad)");
  out += line;
  for (const auto& [label, m] : rows) {
    std::snprintf(line, sizeof(line), "%-16s %12.4f %12.4f %10.4f %10.4f %10.4f %10.4f\n",
                  label.c_str(), m.max_cte, m.mean_cte, m.mle, m.ale, m.moe, m.aoe);
    out += line;
  }
  return out;
}

std::string format_summary_record(const MetricsSummary& summary, long cycles, bool finished,
                                  bool aborted) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "max_cte = %.6f\n"
                "mean_cte = %.6f\n"
                "mle = %.6f\n"
                "ale = %.6f\n"
                "moe = %.6f\n"
                "aoe = %.6f\n"
                "cycles = %ld\n"
                "finished = %s\n"
                "aborted = %s\n",
                summary.max_cte, summary.mean_cte, summary.mle, summary.ale, summary.moe,
                summary.aoe, cycles, finished ? "true" : "false", aborted ? "true" : "false");
  return buf;
}

}  // namespace lpvmpc
