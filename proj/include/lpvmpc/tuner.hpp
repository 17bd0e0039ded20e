#pragma once

#include <vector>

#include "lpvmpc/mpc.hpp"
#include "lpvmpc/trajectory.hpp"

namespace lpvmpc {

/// One curvature tier. The tier applies for kappa_max in
/// [kappa_threshold of this tier, threshold of the next tier).
struct TuningTier {
  double kappa_threshold = 0.0; ///< inclusive lower edge [1/m]
  Eigen::Vector4d q = Eigen::Vector4d::Zero();
  Eigen::Vector4d s = Eigen::Vector4d::Zero();
};

/// Ordered curvature tiers; tier 0 is the fallback for kappa below the first
/// positive threshold. R is fixed across tiers.
struct TuningTable {
  std::vector<TuningTier> tiers;
  Eigen::Vector2d r = Eigen::Vector2d(5.0, 100.0);

  static TuningTable defaults();
  /// Throws std::invalid_argument on empty tiers, non-increasing thresholds,
  /// or negative weights.
  void validate() const;
};

/// Picks the tier whose [threshold, next) interval contains kappa_max; an
/// exact threshold value selects the sharper tier.
WeightSet select_weights(double kappa_max, const TuningTable& table);

struct PathAnalysis {
  double kappa_max = 0.0;        ///< reported as max |kappa| [1/m]
  double total_curvature = 0.0;  ///< sum |kappa_i| ds_i [1/m... m/m]
  std::size_t tier = 0;          ///< tier selected for kappa_max
  std::vector<std::size_t> point_tier; ///< tier label per path point
};

PathAnalysis analyze_path(const ReferenceTrajectory& traj,
                          const TuningTable& table = TuningTable::defaults());

}  // namespace lpvmpc
