#include "firewatch/sim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace firewatch {

namespace {

struct Follower {
  // Identity of the tour currently being flown; progress resets when it
  // changes under the agent.
  int source = 0;  // 0 none, 1 coordinator subgraph, 2 coverage partition
  int key = -1;    // subgraph id or partition epoch
  int tour_epoch = -1;
  std::size_t wp = 0;
};

std::size_t nearest_cycle_index(const TourGraph& tour, const Vec2& pos) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tour.cycle.size(); ++i) {
    const double d = (tour.nodes[tour.cycle[i]].pos - pos).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// One kinematic step toward a waypoint; displacement never exceeds v_max.
bool move_towards(Eigen::Vector3d& pose, const Vec2& wp, double v_max,
                  double arrival_radius) {
  const Vec2 here = pose.head<2>();
  const Vec2 d = wp - here;
  const double dist = d.norm();
  if (dist <= arrival_radius) return true;
  const double step = std::min(v_max, dist);
  pose.head<2>() = here + d * (step / dist);
  return (wp - Vec2(pose.head<2>())).norm() <= arrival_radius;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, std::uint64_t trial) {
  const std::uint64_t seed = cfg.sim.seed;
  RngStream init_rng(seed, trial, "init");
  RngStream world_rng(seed, trial, "world");
  RngStream measure_rng(seed, trial, "measure");
  RngStream planner_rng(seed, trial, "planner");
  RngStream coverage_rng(seed, trial, "coverage");

  const Terrain terrain{cfg.terrain.width, cfg.terrain.height};
  const FireModel truth_model{cfg.fire.lb_scale, cfg.fire.lb_offset};
  EnvParams env;
  env.rate = cfg.fire.r0;
  env.wind_speed = cfg.fire.u0;
  env.wind_azimuth = cfg.fire.theta0;
  env.rate_walk_std = cfg.fire.r_walk_std;
  env.wind_walk_std = cfg.fire.u_walk_std;
  env.azimuth_walk_std = cfg.fire.theta_walk_std;
  CaseParams scenario{cfg.fire.scenario, cfg.fire.spawn_prob,
                      cfg.fire.spawn_max};
  std::size_t next_evolution = 0;

  const double fov_w = fov_width(cfg.uavs.altitude, cfg.uavs.half_angle);
  const double fov_radius = fov_w / 2.0;

  FilterInit finit;
  for (int i = 0; i < kStateDim; ++i) finit.p0_diag[i] = cfg.planner.p0[i];
  finit.lambda0 = cfg.planner.lambda0;
  finit.gamma0 = cfg.planner.gamma0;
  finit.gamma_step = cfg.planner.gamma_step;

  const ObsVec noise_std =
      (ObsVec() << cfg.uavs.angle_noise_std, cfg.uavs.angle_noise_std,
       cfg.uavs.r_noise_std, cfg.uavs.u_noise_std, cfg.uavs.theta_noise_std)
          .finished();

  // Weather forecast used as the parameter prior of a fresh track.
  auto params_prior = [&](RngStream& rng) {
    return Eigen::Vector3d(env.rate + cfg.uavs.r_noise_std * rng.normal(),
                           env.wind_speed + cfg.uavs.u_noise_std * rng.normal(),
                           wrap_angle(env.wind_azimuth +
                                      cfg.uavs.theta_noise_std * rng.normal()));
  };

  std::vector<FireSpot> spots;
  std::vector<SpotTrack> tracks;
  int next_spot_id = 0;
  for (const AreaConfig& area : cfg.areas) {
    const int span = area.n_spots_max - area.n_spots_min + 1;
    const int n = area.n_spots_min + static_cast<int>(init_rng.uniform_int(span));
    for (int i = 0; i < n; ++i) {
      const double rad = area.radius * std::sqrt(init_rng.uniform());
      const double ang = init_rng.uniform(0.0, kTwoPi);
      FireSpot s;
      s.id = next_spot_id++;
      s.pos = terrain.clamp(area.center + Vec2(rad * std::sin(ang), rad * std::cos(ang)));
      s.born_at = 0;
      spots.push_back(s);

      SpotTrack t;
      t.spot_id = s.id;
      t.prioritized = area.prioritized;
      t.born_at = 0;
      t.filter = make_filter(
          s.pos, Eigen::Vector3d(s.pos.x(), s.pos.y(), cfg.uavs.altitude),
          params_prior(init_rng), finit);
      tracks.push_back(std::move(t));
    }
  }

  std::vector<UavAgent> uavs;
  for (int i = 0; i < cfg.uavs.count; ++i) {
    UavAgent u;
    u.id = i;
    // Staging grid near the launch point.
    u.pose = Eigen::Vector3d(cfg.uavs.start.x() + (i % 6),
                             cfg.uavs.start.y() + (i / 6), cfg.uavs.altitude);
    u.v_max = cfg.uavs.v_max;
    u.half_angle = cfg.uavs.half_angle;
    uavs.push_back(u);
  }

  PlannerParams pp;
  pp.alpha = cfg.planner.alpha;
  pp.mc_samples = cfg.planner.mc_samples;
  pp.two_opt_budget = cfg.planner.two_opt_budget;
  pp.steiner_delta = cfg.planner.steiner_delta;
  pp.k_max = cfg.planner.k_max;
  pp.eps_v = cfg.planner.eps_v;
  pp.spawn_window = cfg.planner.spawn_window;
  pp.dismissal_period = cfg.planner.dismissal_period;
  pp.literal_bounds = cfg.planner.literal_bounds;
  pp.v_max = cfg.uavs.v_max;
  pp.altitude = cfg.uavs.altitude;
  pp.half_angle = cfg.uavs.half_angle;

  Coordinator coordinator(pp);
  CoveragePlan coverage_plan;
  std::map<int, Follower> followers;

  BurntRaster burnt(cfg.terrain.width, cfg.terrain.height);

  RunResult result;
  double cumulative = 0.0;

  for (int t = 0; t < cfg.sim.steps; ++t) {
    // Scheduled fire-regime changes take effect at the start of their step.
    while (next_evolution < cfg.fire.evolution.size() &&
           cfg.fire.evolution[next_evolution].at <= t) {
      const EvolutionEvent& ev = cfg.fire.evolution[next_evolution];
      scenario.scenario = ev.scenario;
      if (ev.has_r0) env.rate = ev.r0;
      if (ev.has_u0) env.wind_speed = ev.u0;
      if (ev.has_spawn_prob) scenario.spawn_prob = ev.spawn_prob;
      if (ev.has_spawn_max) scenario.spawn_max = ev.spawn_max;
      ++next_evolution;
    }

    // --- planning rounds ---
    const RoundResult round = coordinator.plan_step(tracks, uavs, t, planner_rng);

    std::vector<SpotTrack> coverage_tracks;
    for (const SpotTrack& tr : tracks) {
      if (!tr.prioritized) coverage_tracks.push_back(tr);
    }
    coverage_plan = coverage_step(coverage_tracks, uavs, t,
                                  std::move(coverage_plan), pp, coverage_rng);

    // --- metrics row ---
    StepRow row;
    row.step = t;
    row.alive_spots = static_cast<int>(tracks.size());
    for (const UavAgent& u : uavs) {
      switch (u.status) {
        case UavAgent::Status::kAllocated: ++row.allocated; break;
        case UavAgent::Status::kInTransit: ++row.in_transit; break;
        case UavAgent::Status::kUnallocated: ++row.unallocated; break;
      }
    }
    const std::vector<Assignment>& assignments = coordinator.assignments();
    row.subgraphs = static_cast<int>(assignments.size());
    double tub_sum = 0.0;
    int tub_n = 0;
    for (const Assignment& a : assignments) {
      if (a.qos.t_ub) {
        const double v = *a.qos.t_ub;
        row.tub_min = std::isnan(row.tub_min) ? v : std::min(row.tub_min, v);
        row.tub_max = std::isnan(row.tub_max) ? v : std::max(row.tub_max, v);
        tub_sum += v;
        ++tub_n;
      }
      if (a.qos.urr_evaluated) {
        row.urr_max = std::isnan(row.urr_max) ? a.qos.urr_max
                                              : std::max(row.urr_max, a.qos.urr_max);
      }
    }
    if (tub_n > 0) row.tub_mean = tub_sum / tub_n;

    // spots and tracks stay index-aligned (same ids, same order).
    std::vector<Vec2> true_pos;
    true_pos.reserve(tracks.size());
    for (const FireSpot& s : spots) true_pos.push_back(s.pos);
    row.residual = coverage_residual(tracks, true_pos, uavs, fov_radius);
    cumulative += row.residual;
    row.cumulative_residual = cumulative;
    row.recruits = round.recruits;
    row.dismissals = round.dismissals;
    row.insufficient = round.insufficient;
    if (round.insufficient > 0) result.insufficient_any = true;
    result.metrics.rows.push_back(row);
    result.metrics.plan_log.insert(result.metrics.plan_log.end(),
                                   round.log.begin(), round.log.end());
    result.max_allocated = std::max(result.max_allocated, row.allocated + row.in_transit);

    // --- advance to t+1 ---
    // UAV kinematics.
    for (UavAgent& u : uavs) {
      Follower& f = followers[u.id];
      if (u.status == UavAgent::Status::kInTransit) {
        f.source = 0;
        move_towards(u.pose, u.transit_target, u.v_max, pp.arrival_radius);
        continue;
      }
      const TourGraph* tour = nullptr;
      int source = 0, key = -1, epoch = -1;
      if (u.status == UavAgent::Status::kAllocated) {
        for (const Assignment& a : assignments) {
          if (a.uav_id == u.id) {
            tour = &a.tour;
            source = 1;
            key = a.subgraph_id;
            epoch = a.tour_epoch;
            break;
          }
        }
      } else {
        for (const CoveragePartition& part : coverage_plan.parts) {
          if (part.uav_id == u.id) {
            tour = &part.tour;
            source = 2;
            key = part.epoch;
            epoch = part.epoch;
            break;
          }
        }
      }
      if (!tour || tour->cycle.empty()) {
        f.source = 0;
        continue;
      }
      if (f.source != source || f.key != key || f.tour_epoch != epoch ||
          f.wp >= tour->cycle.size()) {
        f.source = source;
        f.key = key;
        f.tour_epoch = epoch;
        f.wp = nearest_cycle_index(*tour, u.pose.head<2>());
      }
      const Vec2 wp = tour->nodes[tour->cycle[f.wp]].pos;
      if (move_towards(u.pose, wp, u.v_max, pp.arrival_radius)) {
        f.wp = (f.wp + 1) % tour->cycle.size();
      }
    }

    // Ground truth.
    step_world(spots, env, scenario, burnt, terrain, t + 1, next_spot_id,
               world_rng, truth_model);

    // New tracks for spawned spots; inherit priority from the nearest
    // existing track (in practice the parent).
    for (const FireSpot& s : spots) {
      if (s.born_at != t + 1 || !s.alive) continue;
      bool prioritized = true;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < tracks.size(); ++i) {
        const double d = (true_pos.size() > i ? (true_pos[i] - s.pos).squaredNorm()
                                              : std::numeric_limits<double>::infinity());
        if (d < best) {
          best = d;
          prioritized = tracks[i].prioritized;
        }
      }
      SpotTrack tr;
      tr.spot_id = s.id;
      tr.prioritized = prioritized;
      tr.born_at = s.born_at;
      tr.filter = make_filter(
          s.pos, Eigen::Vector3d(s.pos.x(), s.pos.y(), cfg.uavs.altitude),
          params_prior(init_rng), finit);
      tracks.push_back(std::move(tr));
    }

    // Drop dead spots and their tracks; both stay sorted and index-aligned.
    {
      std::vector<FireSpot> alive_spots;
      std::vector<SpotTrack> alive_tracks;
      alive_spots.reserve(spots.size());
      alive_tracks.reserve(tracks.size());
      std::size_t ti = 0;
      for (const FireSpot& s : spots) {
        while (ti < tracks.size() && tracks[ti].spot_id < s.id) ++ti;
        if (!s.alive) continue;
        if (ti < tracks.size() && tracks[ti].spot_id == s.id) {
          alive_spots.push_back(s);
          alive_tracks.push_back(std::move(tracks[ti]));
        }
      }
      spots = std::move(alive_spots);
      tracks = std::move(alive_tracks);
    }

    // Filter cycle: predict everywhere, then measure spots inside some FOV
    // from the nearest agent.
    for (SpotTrack& tr : tracks) predict(tr.filter, 1.0);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      const FireSpot& s = spots[i];
      const UavAgent* closest = nullptr;
      double best = std::numeric_limits<double>::infinity();
      for (const UavAgent& u : uavs) {
        const double d = (u.pose.head<2>() - s.pos).norm();
        if (d <= fov_radius && d < best) {
          best = d;
          closest = &u;
        }
      }
      if (closest) {
        const ObsVec z = measure(closest->pose, s.pos, env, noise_std, measure_rng);
        update(tracks[i].filter, z, closest->pose);
      }
    }
  }

  result.final_alive = static_cast<int>(tracks.size());
  result.final_cumulative_residual = cumulative;
  for (const UavAgent& u : uavs) {
    if (u.status != UavAgent::Status::kUnallocated) ++result.final_allocated;
  }
  return result;
}

}  // namespace firewatch
