#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lpvmpc/trajectory.hpp"

namespace lpvmpc {

struct RunRecord;
struct RunLog;

struct MetricsSummary {
  double max_cte = 0.0;  ///< max |CTE| [m]
  double mean_cte = 0.0; ///< mean |CTE| [m]
  double mle = 0.0;      ///< max |e_d| [m]
  double ale = 0.0;      ///< RMS e_d [m]
  double moe = 0.0;      ///< max |e_theta| [rad]
  double aoe = 0.0;      ///< RMS e_theta [rad]
};

/// Distance from a point to the line a x + b y + c = 0.
double cte_line(double a, double b, double c, double x_v, double y_v);

/// Signed offset y_v - f(x_v) for a path given as y = f(x). The function may
/// throw std::domain_error for x outside its domain; it propagates.
double cte_function(const std::function<double(double)>& f, double x_v, double y_v);

/// Signed cross-track error against the matched reference sample:
/// (x_v - x_r) sin(theta_r) - (y_v - y_r) cos(theta_r).
double cte_parametric(double x_v, double y_v, double x_r, double y_r, double theta_r);

struct RowErrors {
  double e_d = 0.0;     ///< signed lateral error vs. the matched sample [m]
  double e_theta = 0.0; ///< wrapped heading error [rad]
  double cte = 0.0;     ///< unsigned distance to the path polyline [m]
  std::size_t matched = 0;
};

/// Per-pose tracking errors against the trajectory. e_d and e_theta use the
/// nearest sample (ties to the lower index); cte is the perpendicular
/// distance to the nearest segment.
RowErrors compute_errors(const ReferenceTrajectory& traj, double x, double y, double psi);

/// Aggregates a run into the six reported metrics. Throws
/// std::invalid_argument on an empty log.
MetricsSummary summarize(const RunLog& log);

/// Re-derives the per-row errors from the logged poses and summarizes them.
MetricsSummary summarize_against(const RunLog& log, const ReferenceTrajectory& traj);

/// Fixed-width report with the six metric columns, one row per run label.
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsSummary>>& rows);

/// key=value lines matching the .summary sidecar format.
std::string format_summary_record(const MetricsSummary& summary, long cycles, bool finished,
                                  bool aborted);

}  // namespace lpvmpc
