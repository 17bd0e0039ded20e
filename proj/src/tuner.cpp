#include "lpvmpc/tuner.hpp"

#include <cmath>
#include <stdexcept>

namespace lpvmpc {

TuningTable TuningTable::defaults() {
  TuningTable table;
  table.tiers = {
      {0.0, {1.0, 10.0, 50.0, 50.0}, {5.0, 50.0, 250.0, 250.0}},
      {0.5, {1.0, 20.0, 120.0, 120.0}, {5.0, 100.0, 600.0, 600.0}},
      {2.0, {0.5, 40.0, 250.0, 250.0}, {2.5, 200.0, 1250.0, 1250.0}},
  };
  table.r = {5.0, 100.0};
  return table;
}

void TuningTable::validate() const {
  if (tiers.empty()) {
    throw std::invalid_argument("tuning table needs at least one tier");
  }
  if (tiers.front().kappa_threshold != 0.0) {
    throw std::invalid_argument("the fallback tier must have threshold 0");
  }
  for (std::size_t i = 1; i < tiers.size(); ++i) {
    if (!(tiers[i].kappa_threshold > tiers[i - 1].kappa_threshold)) {
      throw std::invalid_argument("tuning thresholds must be strictly increasing");
    }
  }
  for (const TuningTier& tier : tiers) {
    if ((tier.q.array() < 0.0).any() || (tier.s.array() < 0.0).any()) {
      throw std::invalid_argument("tuning weights must be non-negative");
    }
  }
  if ((r.array() < 0.0).any()) {
    throw std::invalid_argument("tuning weights must be non-negative");
  }
}

namespace {

std::size_t tier_for(double kappa, const TuningTable& table) {
  std::size_t tier = 0;
  for (std::size_t i = 0; i < table.tiers.size(); ++i) {
    if (kappa >= table.tiers[i].kappa_threshold) {
      tier = i;
    }
  }
  return tier;
}

}  // namespace

WeightSet select_weights(double kappa_max, const TuningTable& table) {
  if (kappa_max < 0.0) {
    throw std::invalid_argument("select_weights: kappa_max must be >= 0");
  }
  table.validate();
  const TuningTier& tier = table.tiers[tier_for(kappa_max, table)];
  WeightSet w;
  w.q = tier.q;
  w.s = tier.s;
  w.r = table.r;
  return w;
}

PathAnalysis analyze_path(const ReferenceTrajectory& traj, const TuningTable& table) {
  table.validate();
  PathAnalysis out;
  out.kappa_max = traj.kappa_max();
  out.total_curvature = traj.total_curvature();
  out.tier = tier_for(out.kappa_max, table);
  out.point_tier.reserve(traj.points().size());
  for (const PathPoint& p : traj.points()) {
    out.point_tier.push_back(tier_for(std::abs(p.kappa), table));
  }
  return out;
}

}  // namespace lpvmpc
