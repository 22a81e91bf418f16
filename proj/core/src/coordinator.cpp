#include "firewatch/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace firewatch {

namespace {

// Tracks arrive sorted by spot id (the harness keeps them compacted).
const SpotTrack* find_track(std::span<const SpotTrack> tracks, int spot_id) {
  auto it = std::lower_bound(
      tracks.begin(), tracks.end(), spot_id,
      [](const SpotTrack& t, int id) { return t.spot_id < id; });
  if (it != tracks.end() && it->spot_id == spot_id) return &*it;
  return nullptr;
}

Vec2 spot_estimate(const SpotTrack& t) {
  return {t.filter.mean[idx::kQx], t.filter.mean[idx::kQy]};
}

}  // namespace

bool feasibility_test(std::span<const QosAssessment> assessments) {
  for (const QosAssessment& a : assessments) {
    if (!a.t_ub.has_value()) return false;
    if (a.urr_evaluated && a.urr_max > 1.0) return false;
  }
  return true;
}

Vec2 Coordinator::member_centroid(const Subgraph& sub,
                                  std::span<const SpotTrack> tracks) const {
  Vec2 c = Vec2::Zero();
  int n = 0;
  for (int id : sub.spot_ids) {
    if (const SpotTrack* t = find_track(tracks, id)) {
      c += spot_estimate(*t);
      ++n;
    }
  }
  return n > 0 ? Vec2(c / n) : c;
}

void Coordinator::rebuild_tour(Subgraph& sub, std::span<const SpotTrack> tracks) {
  std::vector<Vec2> pos;
  std::vector<int> ids;
  for (int id : sub.spot_ids) {
    if (const SpotTrack* t = find_track(tracks, id)) {
      pos.push_back(spot_estimate(*t));
      ids.push_back(id);
    }
  }
  const double w = fov_width(params_.altitude, params_.half_angle);
  const double delta = params_.steiner_delta > 0.0 ? params_.steiner_delta : w / 2.0;
  std::vector<TourNode> nodes = steiner_merge(std::span<const Vec2>(pos),
                                              std::span<const int>(ids), delta,
                                              params_.k_max);
  sub.tour = build_tour(std::move(nodes), params_.two_opt_budget);
  sub.dirty = false;
  ++sub.epoch;
}

void Coordinator::refresh_tour(Subgraph& sub, std::span<const SpotTrack> tracks) {
  // Keep the cycle order (the anytime contract) but track the drifting
  // estimates: node positions follow their members, and the spanning-tree
  // weight the bounds use is recomputed over the refreshed positions.
  std::vector<Vec2> pos;
  pos.reserve(sub.tour.nodes.size());
  for (TourNode& node : sub.tour.nodes) {
    Vec2 c = Vec2::Zero();
    int n = 0;
    for (int id : node.members) {
      if (const SpotTrack* t = find_track(tracks, id)) {
        c += spot_estimate(*t);
        ++n;
      }
    }
    if (n > 0) node.pos = c / n;
    pos.push_back(node.pos);
  }
  sub.tour.mst_edges = build_mst(pos);
  sub.tour.mst_length = mst_weight(sub.tour.mst_edges);
  sub.tour.length = path_length(sub.tour.cycle, pos);
}

void Coordinator::assess(Subgraph& sub, std::span<const SpotTrack> tracks,
                         const std::vector<double>& spot_zeta) {
  QosAssessment qos;

  std::vector<FilterState> member_filters;
  member_filters.reserve(sub.spot_ids.size());
  double zeta = 0.0;
  for (int id : sub.spot_ids) {
    if (const SpotTrack* t = find_track(tracks, id)) {
      member_filters.push_back(t->filter);
      if (id < static_cast<int>(spot_zeta.size())) {
        zeta = std::max(zeta, spot_zeta[id]);
      }
    }
  }
  if (member_filters.empty()) {
    sub.qos = qos;
    return;
  }

  std::vector<int> history(sub.count_history.begin(), sub.count_history.end());
  qos.scenario = classify_case(member_filters, history, params_.eps_v,
                               params_.spawn_window);
  qos.zeta = zeta;

  const double w = fov_width(params_.altitude, params_.half_angle);
  const int n_q = static_cast<int>(sub.tour.nodes.size());
  qos.t_ub = combined_tub(qos.scenario, sub.tour.mst_length, params_.v_max,
                          zeta, n_q, w, params_.literal_bounds);
  switch (qos.scenario) {
    case ScenarioCase::kStationary:
      qos.case_bound = tub_case1(sub.tour.mst_length, params_.v_max);
      break;
    case ScenarioCase::kMoving:
      qos.case_bound = tub_case2(sub.tour.mst_length, params_.v_max, zeta, n_q);
      break;
    case ScenarioCase::kMovingSpreading:
      qos.case_bound = tub_case3(sub.tour.mst_length, params_.v_max, zeta, n_q, w);
      break;
  }

  if (qos.t_ub.has_value()) {
    // URR per merged node, evaluated at the member nearest the node centroid.
    double urr_max = 0.0;
    for (const TourNode& node : sub.tour.nodes) {
      const SpotTrack* rep = nullptr;
      double best = std::numeric_limits<double>::infinity();
      for (int id : node.members) {
        if (const SpotTrack* t = find_track(tracks, id)) {
          const double d = (spot_estimate(*t) - node.pos).squaredNorm();
          if (d < best) {
            best = d;
            rep = t;
          }
        }
      }
      if (rep) {
        urr_max = std::max(urr_max, urr(rep->filter, *qos.t_ub));
      }
    }
    qos.urr_max = urr_max;
    qos.urr_evaluated = true;
  }

  qos.feasible = qos.t_ub.has_value() && (!qos.urr_evaluated || qos.urr_max <= 1.0);
  sub.qos = qos;
}

int Coordinator::recruit_nearest(std::vector<UavAgent>& uavs,
                                 const Vec2& target) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const UavAgent& u : uavs) {
    if (u.status != UavAgent::Status::kUnallocated) continue;
    const double d = (u.pose.head<2>() - target).norm();
    if (d < best_d || (d == best_d && (best == -1 || u.id < best))) {
      best_d = d;
      best = u.id;
    }
  }
  return best;
}

std::vector<int> Coordinator::managed_spot_ids() const {
  std::vector<int> ids;
  for (const Subgraph& s : subs_) {
    ids.insert(ids.end(), s.spot_ids.begin(), s.spot_ids.end());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

RoundResult Coordinator::plan_step(std::span<const SpotTrack> tracks,
                                   std::vector<UavAgent>& uavs, int step,
                                   RngStream& rng) {
  RoundResult rr;

  std::vector<int> prioritized;
  int max_spot_id = -1;
  for (const SpotTrack& t : tracks) {
    if (t.prioritized) prioritized.push_back(t.spot_id);
    max_spot_id = std::max(max_spot_id, t.spot_id);
  }
  std::sort(prioritized.begin(), prioritized.end());

  auto uav_by_id = [&uavs](int id) -> UavAgent* {
    for (UavAgent& u : uavs) {
      if (u.id == id) return &u;
    }
    return nullptr;
  };

  // Membership sync: drop vanished spots, route new ones to the nearest
  // subgraph, drop empty subgraphs (their agents go back to the pool).
  for (Subgraph& sub : subs_) {
    std::vector<int> kept;
    for (int id : sub.spot_ids) {
      if (std::binary_search(prioritized.begin(), prioritized.end(), id)) {
        kept.push_back(id);
      }
    }
    if (kept.size() != sub.spot_ids.size()) {
      sub.spot_ids = std::move(kept);
      sub.dirty = true;
    }
  }
  std::erase_if(subs_, [&](Subgraph& sub) {
    if (!sub.spot_ids.empty()) return false;
    if (UavAgent* u = uav_by_id(sub.uav_id)) {
      u->status = UavAgent::Status::kUnallocated;
      u->subgraph = -1;
    }
    return true;
  });

  std::vector<int> unrouted;
  for (int id : prioritized) {
    bool found = false;
    for (const Subgraph& sub : subs_) {
      if (std::binary_search(sub.spot_ids.begin(), sub.spot_ids.end(), id)) {
        found = true;
        break;
      }
    }
    if (!found) unrouted.push_back(id);
  }

  if (subs_.empty() && !prioritized.empty()) {
    Subgraph sub;
    sub.id = next_subgraph_id_++;
    sub.spot_ids = prioritized;
    rebuild_tour(sub, tracks);
    const int uav_id = recruit_nearest(uavs, member_centroid(sub, tracks));
    if (uav_id >= 0) {
      UavAgent* u = uav_by_id(uav_id);
      u->status = UavAgent::Status::kInTransit;
      u->subgraph = sub.id;
      u->transit_target = sub.tour.nodes.empty() ? Vec2(Vec2::Zero())
                                                 : sub.tour.nodes[sub.tour.cycle[0]].pos;
      sub.uav_id = uav_id;
      ++rr.recruits;
      PlanLogRow row;
      row.step = step;
      row.subgraph_id = sub.id;
      row.uav_id = uav_id;
      row.event = "create";
      rr.log.push_back(row);
    }
    subs_.push_back(std::move(sub));
  } else if (!unrouted.empty()) {
    for (int id : unrouted) {
      const SpotTrack* t = find_track(tracks, id);
      if (!t) continue;
      const Vec2 p = spot_estimate(*t);
      Subgraph* best = nullptr;
      double best_d = std::numeric_limits<double>::infinity();
      for (Subgraph& sub : subs_) {
        const double d = (member_centroid(sub, tracks) - p).norm();
        if (d < best_d) {
          best_d = d;
          best = &sub;
        }
      }
      if (best) {
        best->spot_ids.insert(
            std::upper_bound(best->spot_ids.begin(), best->spot_ids.end(), id), id);
        best->dirty = true;
      }
    }
  }

  // Orphaned subgraphs (created or left behind with an empty pool) retry
  // recruitment each round.
  for (Subgraph& sub : subs_) {
    if (sub.uav_id >= 0 && uav_by_id(sub.uav_id)) continue;
    const int uav_id = recruit_nearest(uavs, member_centroid(sub, tracks));
    if (uav_id < 0) {
      ++rr.insufficient;
      continue;
    }
    UavAgent* u = uav_by_id(uav_id);
    u->status = UavAgent::Status::kInTransit;
    u->subgraph = sub.id;
    u->transit_target = sub.tour.cycle.empty()
                            ? member_centroid(sub, tracks)
                            : sub.tour.nodes[sub.tour.cycle[0]].pos;
    sub.uav_id = uav_id;
    ++rr.recruits;
    PlanLogRow row;
    row.step = step;
    row.subgraph_id = sub.id;
    row.uav_id = uav_id;
    row.event = "recruit";
    rr.log.push_back(row);
  }

  // Arrival sync: transit targets follow the drifting first node.
  for (Subgraph& sub : subs_) {
    UavAgent* u = uav_by_id(sub.uav_id);
    if (!u) {
      sub.arrived = false;
      continue;
    }
    if (u->status == UavAgent::Status::kInTransit) {
      if (!sub.tour.cycle.empty()) {
        u->transit_target = sub.tour.nodes[sub.tour.cycle[0]].pos;
      }
      if ((u->pose.head<2>() - u->transit_target).norm() <= params_.arrival_radius) {
        u->status = UavAgent::Status::kAllocated;
      }
    }
    sub.arrived = u->status == UavAgent::Status::kAllocated;
  }

  // Confidence speeds, one Monte Carlo per prioritized track per round.
  std::vector<double> spot_zeta(static_cast<std::size_t>(max_spot_id + 1), 0.0);
  for (int id : prioritized) {
    if (const SpotTrack* t = find_track(tracks, id)) {
      spot_zeta[id] = zeta_alpha(t->filter, params_.alpha, params_.mc_samples, rng);
    }
  }

  std::sort(subs_.begin(), subs_.end(),
            [](const Subgraph& a, const Subgraph& b) { return a.id < b.id; });

  for (Subgraph& sub : subs_) {
    sub.blocked = false;  // re-examined every round; the pool may have refilled
    if (sub.dirty) {
      rebuild_tour(sub, tracks);
    } else {
      refresh_tour(sub, tracks);
    }
    sub.count_history.push_back(static_cast<int>(sub.spot_ids.size()));
    while (static_cast<int>(sub.count_history.size()) > params_.spawn_window + 1) {
      sub.count_history.pop_front();
    }
    assess(sub, tracks, spot_zeta);
  }

  // Split-and-recruit until every arrived subgraph passes or the pool runs
  // dry. Each split rebuilds both halves and re-assesses the retained one.
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t si = 0; si < subs_.size(); ++si) {
      Subgraph& sub = subs_[si];
      if (!sub.arrived || sub.qos.feasible || sub.blocked) continue;
      if (sub.spot_ids.size() < 2) {
        sub.blocked = true;  // a lone spot cannot be split further
        continue;
      }

      std::vector<Vec2> pos;
      std::vector<int> ids;
      for (int id : sub.spot_ids) {
        if (const SpotTrack* t = find_track(tracks, id)) {
          pos.push_back(spot_estimate(*t));
          ids.push_back(id);
        }
      }
      const Partition part = kmeans_partition(pos, 2, rng);
      std::vector<int> half_a, half_b;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        (part.assignment[i] == 0 ? half_a : half_b).push_back(ids[i]);
      }
      if (half_a.empty() || half_b.empty()) {
        sub.blocked = true;
        continue;
      }

      const UavAgent* incumbent = uav_by_id(sub.uav_id);
      const Vec2 ca = part.centroids[0];
      const Vec2 cb = part.centroids[1];
      bool keep_a = true;
      if (incumbent) {
        keep_a = (incumbent->pose.head<2>() - ca).norm() <=
                 (incumbent->pose.head<2>() - cb).norm();
      }
      const std::vector<int>& kept_ids = keep_a ? half_a : half_b;
      const std::vector<int>& new_ids = keep_a ? half_b : half_a;
      const Vec2 new_centroid = keep_a ? cb : ca;

      const int recruit_id = recruit_nearest(uavs, new_centroid);
      if (recruit_id < 0) {
        ++rr.insufficient;
        sub.blocked = true;
        PlanLogRow row;
        row.step = step;
        row.subgraph_id = sub.id;
        row.uav_id = sub.uav_id;
        row.event = "insufficient";
        rr.log.push_back(row);
        continue;
      }

      Subgraph fresh;
      fresh.id = next_subgraph_id_++;
      fresh.spot_ids = new_ids;
      fresh.uav_id = recruit_id;
      rebuild_tour(fresh, tracks);
      fresh.count_history.push_back(static_cast<int>(fresh.spot_ids.size()));

      sub.spot_ids = kept_ids;
      rebuild_tour(sub, tracks);
      sub.count_history.clear();
      sub.count_history.push_back(static_cast<int>(sub.spot_ids.size()));
      assess(sub, tracks, spot_zeta);

      UavAgent* recruit = uav_by_id(recruit_id);
      recruit->status = UavAgent::Status::kInTransit;
      recruit->subgraph = fresh.id;
      recruit->transit_target = fresh.tour.nodes.empty()
                                    ? new_centroid
                                    : fresh.tour.nodes[fresh.tour.cycle[0]].pos;
      assess(fresh, tracks, spot_zeta);
      ++rr.recruits;

      PlanLogRow row;
      row.step = step;
      row.subgraph_id = sub.id;
      row.uav_id = sub.uav_id;
      row.event = "split";
      rr.log.push_back(row);
      row.subgraph_id = fresh.id;
      row.uav_id = recruit_id;
      row.event = "recruit";
      rr.log.push_back(row);

      subs_.push_back(std::move(fresh));
      progress = true;
      break;  // subs_ may have reallocated; restart the scan
    }
  }

  // Dismissal probe every dismissal_period steps: merge the two
  // nearest-centroid subgraphs, keep the nearer agent, commit only if the
  // merged subgraph still certifies.
  const bool dismissal_tick = params_.dismissal_period > 0 && step > 0 &&
                              step % params_.dismissal_period == 0;
  int allocated = 0;
  for (const Subgraph& sub : subs_) {
    if (sub.arrived) ++allocated;
  }
  if (dismissal_tick && allocated >= 2 && rr.insufficient == 0) {
    int best_i = -1, best_j = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < subs_.size(); ++i) {
      if (!subs_[i].arrived) continue;
      for (std::size_t j = i + 1; j < subs_.size(); ++j) {
        if (!subs_[j].arrived) continue;
        const double d = (member_centroid(subs_[i], tracks) -
                          member_centroid(subs_[j], tracks))
                             .norm();
        if (d < best_d) {
          best_d = d;
          best_i = static_cast<int>(i);
          best_j = static_cast<int>(j);
        }
      }
    }
    if (best_i >= 0) {
      Subgraph merged;
      merged.id = next_subgraph_id_;
      merged.spot_ids = subs_[best_i].spot_ids;
      merged.spot_ids.insert(merged.spot_ids.end(), subs_[best_j].spot_ids.begin(),
                             subs_[best_j].spot_ids.end());
      std::sort(merged.spot_ids.begin(), merged.spot_ids.end());
      rebuild_tour(merged, tracks);
      merged.count_history.push_back(static_cast<int>(merged.spot_ids.size()));

      const Vec2 mc = member_centroid(merged, tracks);
      UavAgent* ua = uav_by_id(subs_[best_i].uav_id);
      UavAgent* ub = uav_by_id(subs_[best_j].uav_id);
      UavAgent* keep = ua;
      UavAgent* drop = ub;
      if (ua && ub && (ub->pose.head<2>() - mc).norm() < (ua->pose.head<2>() - mc).norm()) {
        keep = ub;
        drop = ua;
      }
      merged.uav_id = keep ? keep->id : -1;
      merged.arrived = keep && keep->status == UavAgent::Status::kAllocated;
      assess(merged, tracks, spot_zeta);

      if (merged.qos.feasible && merged.arrived) {
        ++next_subgraph_id_;
        keep->subgraph = merged.id;
        if (drop) {
          drop->status = UavAgent::Status::kUnallocated;
          drop->subgraph = -1;
        }
        PlanLogRow row;
        row.step = step;
        row.subgraph_id = merged.id;
        row.uav_id = drop ? drop->id : -1;
        row.event = "dismiss";
        rr.log.push_back(row);
        const int lo = std::min(best_i, best_j);
        const int hi = std::max(best_i, best_j);
        subs_.erase(subs_.begin() + hi);
        subs_.erase(subs_.begin() + lo);
        subs_.push_back(std::move(merged));
        ++rr.dismissals;
      }
    }
  }

  // Publish assignments and the per-round log.
  assignments_.clear();
  std::sort(subs_.begin(), subs_.end(),
            [](const Subgraph& a, const Subgraph& b) { return a.id < b.id; });
  for (const Subgraph& sub : subs_) {
    Assignment a;
    a.subgraph_id = sub.id;
    a.uav_id = sub.uav_id;
    a.tour = sub.tour;
    a.spot_ids = sub.spot_ids;
    a.qos = sub.qos;
    a.arrived = sub.arrived;
    a.tour_epoch = sub.epoch;
    assignments_.push_back(std::move(a));

    PlanLogRow row;
    row.step = step;
    row.subgraph_id = sub.id;
    row.uav_id = sub.uav_id;
    row.nodes = static_cast<int>(sub.tour.nodes.size());
    row.spots = static_cast<int>(sub.spot_ids.size());
    row.scenario = sub.qos.scenario;
    row.zeta = sub.qos.zeta;
    row.t_ub = sub.qos.t_ub;
    row.urr_max = sub.qos.urr_max;
    row.urr_evaluated = sub.qos.urr_evaluated;
    row.feasible = sub.qos.feasible;
    row.arrived = sub.arrived;
    if (sub.blocked) row.event = "insufficient";
    rr.log.push_back(row);
  }
  return rr;
}

}  // namespace firewatch
