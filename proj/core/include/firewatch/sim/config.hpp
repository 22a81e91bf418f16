#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "firewatch/fire_sim.hpp"

namespace firewatch {

struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> problems_in);
  std::vector<std::string> problems;
};

struct AreaConfig {
  Vec2 center = Vec2::Zero();
  int n_spots_min = 1;
  int n_spots_max = 1;
  double radius = 5.0;
  bool prioritized = true;
};

struct TerrainConfig {
  double width = 500.0;
  double height = 500.0;
};

// Scheduled change of the fire regime mid-run (an evolving fire). Applies
// from the given step on; unset fields keep their current value.
struct EvolutionEvent {
  int at = 0;
  ScenarioCase scenario = ScenarioCase::kStationary;
  bool has_r0 = false, has_u0 = false, has_spawn_prob = false, has_spawn_max = false;
  double r0 = 0.0;
  double u0 = 0.0;
  double spawn_prob = 0.0;
  int spawn_max = 0;
};

struct FireConfig {
  ScenarioCase scenario = ScenarioCase::kStationary;
  double r0 = 0.0;      // initial spread rate
  double u0 = 0.0;      // initial wind speed
  double theta0 = 0.0;  // initial wind azimuth
  double r_walk_std = 0.0;
  double u_walk_std = 0.0;
  double theta_walk_std = 0.0;
  double spawn_prob = 0.0;
  int spawn_max = 0;
  double lb_scale = 1.0;   // ground-truth model perturbation
  double lb_offset = 0.0;
  std::vector<EvolutionEvent> evolution;  // sorted by `at`
};

struct UavConfig {
  int count = 1;
  double v_max = 1.0;
  double altitude = 10.0;
  double half_angle = 0.5;
  Vec2 start = Vec2::Zero();
  double angle_noise_std = 0.01;   // phi_x, phi_y channels
  double r_noise_std = 0.05;       // weather-equipment channels
  double u_noise_std = 0.05;
  double theta_noise_std = 0.02;
};

struct PlannerConfigBlock {
  double alpha = 0.05;
  double gamma_step = 0.95;
  int two_opt_budget = 50;
  double steiner_delta = -1.0;  // <= 0: half the FOV width
  int k_max = 5;
  double eps_v = 1e-3;
  int dismissal_period = 20;
  bool literal_bounds = false;
  int mc_samples = 512;
  int burn_in = 10;
  int spawn_window = 10;
  std::array<double, 8> p0 = {1, 1, 1, 1, 1, 1, 1, 1};
  double lambda0 = 1e-3;
  double gamma0 = 1e-2;
};

struct SimBlock {
  int steps = 100;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct ScenarioConfig {
  TerrainConfig terrain;
  std::vector<AreaConfig> areas;
  FireConfig fire;
  UavConfig uavs;
  PlannerConfigBlock planner;
  SimBlock sim;
};

// Parses and validates a scenario document. Unknown keys are rejected; all
// violations are reported together in ConfigError::problems.
ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::filesystem::path& file);

// Serializes back to JSON (stable key order), for golden files and tooling.
std::string scenario_config_to_json(const ScenarioConfig& cfg);

}  // namespace firewatch
