#include "firewatch/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace firewatch {

namespace {

Vec2 estimate_of(const SpotTrack& t) {
  return {t.filter.mean[idx::kQx], t.filter.mean[idx::kQy]};
}

}  // namespace

CoveragePlan coverage_step(std::span<const SpotTrack> tracks,
                           std::span<const UavAgent> unallocated, int t,
                           CoveragePlan prev, const PlannerParams& params,
                           RngStream& rng) {
  std::vector<int> pool;
  for (const UavAgent& u : unallocated) {
    if (u.status == UavAgent::Status::kUnallocated) pool.push_back(u.id);
  }
  std::sort(pool.begin(), pool.end());

  prev.count_history.push_back(static_cast<int>(tracks.size()));
  while (static_cast<int>(prev.count_history.size()) > params.spawn_window + 1) {
    prev.count_history.pop_front();
  }

  if (tracks.empty() || pool.empty()) {
    prev.parts.clear();
    prev.uav_ids = pool;
    prev.planned_at = t;
    return prev;
  }

  const bool pool_changed = pool != prev.uav_ids;
  const bool stale =
      prev.planned_at < 0 || prev.parts.empty() ||
      (t - prev.planned_at) >= std::max(1.0, prev.min_tub);
  if (!pool_changed && !stale) return prev;

  CoveragePlan plan;
  plan.count_history = prev.count_history;
  plan.planned_at = t;
  plan.uav_ids = pool;
  plan.next_epoch = prev.next_epoch;

  std::vector<Vec2> pos;
  std::vector<int> ids;
  pos.reserve(tracks.size());
  for (const SpotTrack& tr : tracks) {
    pos.push_back(estimate_of(tr));
    ids.push_back(tr.spot_id);
  }

  const int k = std::min<int>(static_cast<int>(pool.size()),
                              static_cast<int>(pos.size()));
  const Partition part = kmeans_partition(pos, k, rng);

  // Greedy nearest-centroid matching, lowest distance first, id tie-breaks.
  std::vector<bool> uav_used(pool.size(), false);
  std::vector<int> cluster_uav(k, -1);
  for (int round = 0; round < k; ++round) {
    double best_d = std::numeric_limits<double>::infinity();
    int best_u = -1, best_c = -1;
    for (std::size_t ui = 0; ui < pool.size(); ++ui) {
      if (uav_used[ui]) continue;
      const UavAgent* agent = nullptr;
      for (const UavAgent& u : unallocated) {
        if (u.id == pool[ui]) {
          agent = &u;
          break;
        }
      }
      for (int c = 0; c < k; ++c) {
        if (cluster_uav[c] >= 0) continue;
        const double d = (agent->pose.head<2>() - part.centroids[c]).norm();
        if (d < best_d) {
          best_d = d;
          best_u = static_cast<int>(ui);
          best_c = c;
        }
      }
    }
    if (best_u < 0) break;
    uav_used[best_u] = true;
    cluster_uav[best_c] = pool[best_u];
  }

  const double w = fov_width(params.altitude, params.half_angle);
  const double delta = params.steiner_delta > 0.0 ? params.steiner_delta : w / 2.0;
  const std::vector<int> history(plan.count_history.begin(),
                                 plan.count_history.end());

  double min_tub = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    CoveragePartition cp;
    cp.uav_id = cluster_uav[c];
    cp.epoch = plan.next_epoch++;
    std::vector<Vec2> cpos;
    std::vector<int> cids;
    std::vector<FilterState> filters;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (part.assignment[i] != c) continue;
      cpos.push_back(pos[i]);
      cids.push_back(ids[i]);
      for (const SpotTrack& tr : tracks) {
        if (tr.spot_id == ids[i]) {
          filters.push_back(tr.filter);
          break;
        }
      }
    }
    cp.spot_ids = cids;
    cp.tour = build_tour(steiner_merge(std::span<const Vec2>(cpos),
                                       std::span<const int>(cids), delta,
                                       params.k_max),
                         params.two_opt_budget);

    const ScenarioCase scenario =
        classify_case(filters, history, params.eps_v, params.spawn_window);
    double zeta = 0.0;
    for (const FilterState& fs : filters) {
      zeta = std::max(zeta, zeta_alpha(fs, params.alpha, params.mc_samples, rng));
    }
    cp.t_ub = combined_tub(scenario, cp.tour.mst_length, params.v_max, zeta,
                           static_cast<int>(cp.tour.nodes.size()), w,
                           params.literal_bounds);
    if (cp.t_ub) min_tub = std::min(min_tub, *cp.t_ub);
    plan.parts.push_back(std::move(cp));
  }
  plan.min_tub = std::isfinite(min_tub) ? min_tub : 1.0;
  return plan;
}

double coverage_residual(std::span<const SpotTrack> tracks,
                         std::span<const Vec2> true_positions,
                         std::span<const UavAgent> uavs, double fov_radius) {
  double total = 0.0;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    bool covered = false;
    for (const UavAgent& u : uavs) {
      if ((u.pose.head<2>() - true_positions[i]).norm() <= fov_radius) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      total += project_residual(tracks[i].filter, 0).trace();
    }
  }
  return total;
}

}  // namespace firewatch
