#pragma once

#include <Eigen/Dense>
#include <vector>

#include "firewatch/rng.hpp"

namespace firewatch {

using Vec2 = Eigen::Vector2d;

enum class ScenarioCase { kStationary, kMoving, kMovingSpreading };

const char* to_string(ScenarioCase c);

// Wraps to [0, 2*pi).
double wrap_angle(double theta);
// Wraps to [-pi, pi).
double wrap_signed(double theta);

// Ground-truth perturbation of the spread model: the length-to-breadth term
// becomes lb_scale * LB(U) + lb_offset. The estimator always runs with the
// unperturbed model, so nonzero values here create a process-model mismatch.
struct FireModel {
  double lb_scale = 1.0;
  double lb_offset = 0.0;
};

// Elliptical length-to-breadth ratio LB(U) and its wind derivative.
double length_breadth(double wind_speed);
double length_breadth_slope(double wind_speed);
// GB(U) = LB(U)^2 - 1, clamped at zero against floating error near U = 0.
double gb_term(double wind_speed);

// Firespot speed C(R, U) = R * (1 - LB / (LB + sqrt(GB))).
double spread_speed(double rate, double wind_speed, const FireModel& model = {});
// dC/dR = 1 - LB / (LB + sqrt(GB)).
double spread_speed_rate_slope(double wind_speed);
// dC/dU = R * LB' / (sqrt(GB) * (LB + sqrt(GB))^2); zero at the GB clamp.
double spread_speed_wind_slope(double rate, double wind_speed);

struct EnvParams {
  double rate = 0.0;          // R: fuel/vegetation coefficient, grid units/step
  double wind_speed = 0.0;    // U: mid-flame wind speed
  double wind_azimuth = 0.0;  // theta, radians in [0, 2*pi)
  // Std-devs of the per-step Gaussian random walks on R, U, theta.
  double rate_walk_std = 0.0;
  double wind_walk_std = 0.0;
  double azimuth_walk_std = 0.0;
};

struct CaseParams {
  ScenarioCase scenario = ScenarioCase::kStationary;
  double spawn_prob = 0.0;  // per child slot per step; only kMovingSpreading
  int spawn_max = 0;        // max children per spot per step
};

struct FireSpot {
  int id = 0;
  Vec2 pos = Vec2::Zero();
  bool alive = true;
  int born_at = 0;
};

struct Terrain {
  double width = 0.0;
  double height = 0.0;
  bool contains(const Vec2& p) const {
    return p.x() >= 0.0 && p.x() <= width && p.y() >= 0.0 && p.y() <= height;
  }
  Vec2 clamp(const Vec2& p) const {
    return {std::clamp(p.x(), 0.0, width), std::clamp(p.y(), 0.0, height)};
  }
};

// Boolean occupancy grid at 1-unit resolution; cells only flip false -> true.
class BurntRaster {
 public:
  BurntRaster(double width, double height);

  bool burnt(const Vec2& pos) const;
  void mark(const Vec2& pos);
  int burnt_count() const { return burnt_count_; }
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int cell_index(const Vec2& pos) const;
  int width_ = 0;
  int height_ = 0;
  int burnt_count_ = 0;
  std::vector<std::uint8_t> cells_;
};

// First-order firefront step: q' = q + C(R,U) * [sin(theta), cos(theta)] * dt.
Vec2 step_spot(const Vec2& pos, const EnvParams& env, double dt,
               const FireModel& model = {});

struct WorldStepStats {
  int clamped = 0;  // spots pushed back to the terrain boundary
  int pruned = 0;   // spots that entered burnt cells
  int spawned = 0;
};

// Advances the ground truth one step. Movement applies in the moving cases;
// spawn/burnt-raster pruning apply only in kMovingSpreading (in kMoving the
// spot count must stay constant, and trailing spots crossing a leader's
// burnt trail would otherwise be pruned). Env parameters random-walk first.
WorldStepStats step_world(std::vector<FireSpot>& spots, EnvParams& env,
                          const CaseParams& scenario, BurntRaster& burnt,
                          const Terrain& terrain, int step, int& next_spot_id,
                          RngStream& rng, const FireModel& model = {});

}  // namespace firewatch
