#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "firewatch/coordinator.hpp"

namespace firewatch {

struct CoveragePartition {
  int uav_id = -1;
  std::vector<int> spot_ids;
  TourGraph tour;
  std::optional<double> t_ub;
  int epoch = 0;
};

struct CoveragePlan {
  int planned_at = -1;           // step the partitions were last rebuilt
  std::vector<int> uav_ids;      // sorted pool the plan assumed
  std::vector<CoveragePartition> parts;
  double min_tub = 1.0;          // re-plan horizon, floored at one step
  std::deque<int> count_history;
  int next_epoch = 0;
};

// One step of the distributed-coverage planner for the unallocated pool.
// Re-clusters (k-means, k = pool size), assigns agents greedily by nearest
// centroid (id tie-break), and rebuilds tours when the plan went stale
// (t - planned_at >= min partition bound) or the pool changed (an agent was
// recruited away or released); otherwise the existing tours stand.
CoveragePlan coverage_step(std::span<const SpotTrack> tracks,
                           std::span<const UavAgent> unallocated, int t,
                           CoveragePlan prev, const PlannerParams& params,
                           RngStream& rng);

// Tracking debt this step: sum of Tr(S) over alive tracks whose true
// position (simulation ground truth, one entry per track) lies outside every
// agent's FOV disk. S is evaluated on the current covariance (a zero-step
// residual projection), so unseen tracks report their grown uncertainty.
double coverage_residual(std::span<const SpotTrack> tracks,
                         std::span<const Vec2> true_positions,
                         std::span<const UavAgent> uavs, double fov_radius);

}  // namespace firewatch
