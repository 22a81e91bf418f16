#include "firewatch/fire_sim.hpp"

#include <algorithm>
#include <cmath>

namespace firewatch {

namespace {
constexpr double kGbFloor = 1e-12;
}

const char* to_string(ScenarioCase c) {
  switch (c) {
    case ScenarioCase::kStationary:
      return "stationary";
    case ScenarioCase::kMoving:
      return "moving";
    case ScenarioCase::kMovingSpreading:
      return "moving_spreading";
  }
  return "unknown";
}

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

double wrap_signed(double theta) {
  double t = std::fmod(theta + kTwoPi / 2.0, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t - kTwoPi / 2.0;
}

double length_breadth(double wind_speed) {
  return 0.936 * std::exp(0.256 * wind_speed) +
         0.461 * std::exp(-0.154 * wind_speed) - 0.397;
}

double length_breadth_slope(double wind_speed) {
  return 0.936 * 0.256 * std::exp(0.256 * wind_speed) -
         0.461 * 0.154 * std::exp(-0.154 * wind_speed);
}

double gb_term(double wind_speed) {
  const double lb = length_breadth(wind_speed);
  return std::max(lb * lb - 1.0, 0.0);
}

double spread_speed(double rate, double wind_speed, const FireModel& model) {
  const double lb = model.lb_scale * length_breadth(wind_speed) + model.lb_offset;
  const double gb = std::max(lb * lb - 1.0, 0.0);
  const double denom = lb + std::sqrt(gb);
  if (denom <= 0.0) return 0.0;  // degenerate perturbed model
  return rate * (1.0 - lb / denom);
}

double spread_speed_rate_slope(double wind_speed) {
  const double lb = length_breadth(wind_speed);
  const double gb = gb_term(wind_speed);
  return 1.0 - lb / (lb + std::sqrt(gb));
}

double spread_speed_wind_slope(double rate, double wind_speed) {
  const double gb = gb_term(wind_speed);
  if (gb <= kGbFloor) return 0.0;  // clamp region: C == 0 identically
  const double lb = length_breadth(wind_speed);
  const double root = std::sqrt(gb);
  const double denom = lb + root;
  return rate * length_breadth_slope(wind_speed) / (root * denom * denom);
}

BurntRaster::BurntRaster(double width, double height)
    : width_(std::max(1, static_cast<int>(std::ceil(width)))),
      height_(std::max(1, static_cast<int>(std::ceil(height)))),
      cells_(static_cast<std::size_t>(width_) * height_, 0) {}

int BurntRaster::cell_index(const Vec2& pos) const {
  int cx = std::clamp(static_cast<int>(std::floor(pos.x())), 0, width_ - 1);
  int cy = std::clamp(static_cast<int>(std::floor(pos.y())), 0, height_ - 1);
  return cy * width_ + cx;
}

bool BurntRaster::burnt(const Vec2& pos) const {
  return cells_[cell_index(pos)] != 0;
}

void BurntRaster::mark(const Vec2& pos) {
  std::uint8_t& cell = cells_[cell_index(pos)];
  if (cell == 0) {
    cell = 1;
    ++burnt_count_;
  }
}

Vec2 step_spot(const Vec2& pos, const EnvParams& env, double dt,
               const FireModel& model) {
  const double c = spread_speed(env.rate, env.wind_speed, model);
  return pos + Vec2(c * std::sin(env.wind_azimuth), c * std::cos(env.wind_azimuth)) * dt;
}

WorldStepStats step_world(std::vector<FireSpot>& spots, EnvParams& env,
                          const CaseParams& scenario, BurntRaster& burnt,
                          const Terrain& terrain, int step, int& next_spot_id,
                          RngStream& rng, const FireModel& model) {
  WorldStepStats stats;

  if (env.rate_walk_std > 0.0) env.rate = std::max(0.0, rng.normal(env.rate, env.rate_walk_std));
  if (env.wind_walk_std > 0.0) env.wind_speed = std::max(0.0, rng.normal(env.wind_speed, env.wind_walk_std));
  if (env.azimuth_walk_std > 0.0) env.wind_azimuth = wrap_angle(rng.normal(env.wind_azimuth, env.azimuth_walk_std));

  if (scenario.scenario == ScenarioCase::kStationary) return stats;

  const bool spreading = scenario.scenario == ScenarioCase::kMovingSpreading;

  // Phase 1: move everything, testing against the pre-step raster.
  std::vector<int> old_cells;
  old_cells.reserve(spots.size());
  struct Move {
    std::size_t idx;
    Vec2 from;
  };
  std::vector<Move> moved;
  for (std::size_t i = 0; i < spots.size(); ++i) {
    FireSpot& s = spots[i];
    if (!s.alive) continue;
    const Vec2 from = s.pos;
    Vec2 to = step_spot(from, env, 1.0, model);
    if (!terrain.contains(to)) {
      to = terrain.clamp(to);
      ++stats.clamped;
    }
    if (spreading) {
      const bool left_cell = std::floor(to.x()) != std::floor(from.x()) ||
                             std::floor(to.y()) != std::floor(from.y());
      if (left_cell && burnt.burnt(to)) {
        s.alive = false;
        ++stats.pruned;
      }
      moved.push_back({i, from});
    }
    s.pos = to;
  }

  if (!spreading) return stats;

  // Phase 2: the vacated ground is burnt fuel.
  for (const Move& m : moved) burnt.mark(m.from);

  // Phase 3: spawning. Children land radially off the parent and die on
  // arrival if the ground there is already burnt.
  std::vector<FireSpot> children;
  for (const FireSpot& s : spots) {
    if (!s.alive) continue;
    const int n = rng.binomial(scenario.spawn_max, scenario.spawn_prob);
    for (int c = 0; c < n; ++c) {
      const double dist = rng.uniform(0.5, 1.5);
      const double ang = rng.uniform(0.0, kTwoPi);
      Vec2 pos = s.pos + Vec2(dist * std::sin(ang), dist * std::cos(ang));
      if (!terrain.contains(pos)) {
        pos = terrain.clamp(pos);
        ++stats.clamped;
      }
      FireSpot child;
      child.id = next_spot_id++;
      child.pos = pos;
      child.born_at = step;
      child.alive = !burnt.burnt(pos);
      if (!child.alive) ++stats.pruned;
      if (child.alive) ++stats.spawned;
      children.push_back(child);
    }
  }
  spots.insert(spots.end(), children.begin(), children.end());
  return stats;
}

}  // namespace firewatch
