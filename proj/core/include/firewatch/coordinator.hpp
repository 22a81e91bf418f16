#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "firewatch/qos_bounds.hpp"
#include "firewatch/tour_graph.hpp"

namespace firewatch {

struct UavAgent {
  enum class Status { kUnallocated, kInTransit, kAllocated };

  int id = 0;
  Eigen::Vector3d pose = Eigen::Vector3d::Zero();
  double v_max = 1.0;
  double half_angle = 0.5;
  Status status = Status::kUnallocated;
  int subgraph = -1;                  // valid when InTransit/Allocated
  Vec2 transit_target = Vec2::Zero();  // valid when InTransit
};

// Per-firespot estimate bundle the planners consume.
struct SpotTrack {
  int spot_id = 0;
  bool prioritized = true;
  int born_at = 0;
  FilterState filter;
};

struct PlannerParams {
  double alpha = 0.05;
  int mc_samples = 512;
  int two_opt_budget = 50;
  double steiner_delta = -1.0;  // <= 0: half the FOV width
  int k_max = 5;
  double eps_v = 1e-3;
  int spawn_window = 10;
  int dismissal_period = 20;
  bool literal_bounds = false;
  // Homogeneous team characteristics, used for bounds and merge radii.
  double v_max = 1.0;
  double altitude = 10.0;
  double half_angle = 0.5;
  double arrival_radius = 0.5;
};

struct Assignment {
  int subgraph_id = -1;
  int uav_id = -1;
  TourGraph tour;
  std::vector<int> spot_ids;  // sorted member spots
  QosAssessment qos;
  bool arrived = false;
  int tour_epoch = 0;  // bumped on rebuild; tour followers reset progress
};

struct PlanLogRow {
  int step = 0;
  int subgraph_id = -1;
  int uav_id = -1;
  int nodes = 0;
  int spots = 0;
  ScenarioCase scenario = ScenarioCase::kStationary;
  double zeta = 0.0;
  std::optional<double> t_ub;
  double urr_max = 0.0;
  bool urr_evaluated = false;
  bool feasible = false;
  bool arrived = false;
  std::string event;  // create / split / recruit / dismiss / insufficient
};

struct RoundResult {
  std::vector<PlanLogRow> log;
  int recruits = 0;
  int dismissals = 0;
  int insufficient = 0;  // splits blocked by an exhausted pool this round
};

// True iff every assessment certifies service: finite bound and URR <= 1
// (boundary inclusive) everywhere it was evaluated.
bool feasibility_test(std::span<const QosAssessment> assessments);

// The guaranteed-performance planning loop over prioritized spots: maintain
// subgraph membership, rebuild tours on change, compute per-subgraph bounds
// and URR, split and recruit until every arrived subgraph passes, and
// periodically try to dismiss one agent. Pending subgraphs (recruit still in
// transit) are tracked but not enforced until arrival.
class Coordinator {
 public:
  explicit Coordinator(PlannerParams params) : params_(std::move(params)) {}

  RoundResult plan_step(std::span<const SpotTrack> tracks,
                        std::vector<UavAgent>& uavs, int step, RngStream& rng);

  const std::vector<Assignment>& assignments() const { return assignments_; }

  // Sum of spot ids currently under management (test hook).
  std::vector<int> managed_spot_ids() const;

 private:
  struct Subgraph {
    int id = -1;
    int uav_id = -1;
    std::vector<int> spot_ids;  // sorted
    TourGraph tour;
    std::deque<int> count_history;
    QosAssessment qos;
    bool dirty = true;
    bool arrived = false;
    bool blocked = false;  // infeasible with an exhausted pool
    int epoch = 0;
  };

  void rebuild_tour(Subgraph& sub, std::span<const SpotTrack> tracks);
  void refresh_tour(Subgraph& sub, std::span<const SpotTrack> tracks);
  void assess(Subgraph& sub, std::span<const SpotTrack> tracks,
              const std::vector<double>& spot_zeta);
  Vec2 member_centroid(const Subgraph& sub, std::span<const SpotTrack> tracks) const;
  int recruit_nearest(std::vector<UavAgent>& uavs, const Vec2& target) const;

  PlannerParams params_;
  std::vector<Subgraph> subs_;
  std::vector<Assignment> assignments_;
  int next_subgraph_id_ = 0;
};

}  // namespace firewatch
