#include "firewatch/sim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace firewatch {

using nlohmann::ordered_json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::ostringstream os;
  os << "invalid scenario config:";
  for (const std::string& p : problems) os << "\n  - " << p;
  return os.str();
}

struct Checker {
  std::vector<std::string> problems;

  void reject_unknown(const ordered_json& obj, const std::string& where,
                      const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        problems.push_back(where + ": unknown key '" + it.key() + "'");
      }
    }
  }

  template <typename T>
  bool fetch(const ordered_json& obj, const std::string& where,
             const std::string& key, T& out, bool required = false) {
    if (!obj.contains(key)) {
      if (required) problems.push_back(where + "." + key + ": missing");
      return false;
    }
    try {
      out = obj.at(key).get<T>();
      return true;
    } catch (const nlohmann::json::exception&) {
      problems.push_back(where + "." + key + ": wrong type");
      return false;
    }
  }

  void positive(double v, const std::string& field) {
    if (!(v > 0.0)) problems.push_back(field + ": must be > 0");
  }
  void non_negative(double v, const std::string& field) {
    if (!(v >= 0.0)) problems.push_back(field + ": must be >= 0");
  }
};

ScenarioCase parse_case(const std::string& s, Checker& ck) {
  if (s == "stationary") return ScenarioCase::kStationary;
  if (s == "moving") return ScenarioCase::kMoving;
  if (s == "moving_spreading") return ScenarioCase::kMovingSpreading;
  ck.problems.push_back(
      "fire.case: expected stationary | moving | moving_spreading, got '" + s + "'");
  return ScenarioCase::kStationary;
}

Vec2 parse_vec2(const ordered_json& j, const std::string& field, Checker& ck) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    ck.problems.push_back(field + ": expected [x, y]");
    return Vec2::Zero();
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems_in)
    : std::runtime_error(join_problems(problems_in)),
      problems(std::move(problems_in)) {}

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }

  Checker ck;
  ScenarioConfig cfg;

  ck.reject_unknown(doc, "$", {"terrain", "areas", "fire", "uavs", "planner", "sim"});

  if (doc.contains("terrain") && doc["terrain"].is_object()) {
    const auto& t = doc["terrain"];
    ck.reject_unknown(t, "terrain", {"width", "height"});
    ck.fetch(t, "terrain", "width", cfg.terrain.width, true);
    ck.fetch(t, "terrain", "height", cfg.terrain.height, true);
    ck.positive(cfg.terrain.width, "terrain.width");
    ck.positive(cfg.terrain.height, "terrain.height");
  } else {
    ck.problems.push_back("terrain: missing object");
  }

  if (doc.contains("areas") && doc["areas"].is_array()) {
    int i = 0;
    for (const auto& a : doc["areas"]) {
      const std::string where = "areas[" + std::to_string(i) + "]";
      AreaConfig area;
      if (!a.is_object()) {
        ck.problems.push_back(where + ": expected object");
        ++i;
        continue;
      }
      ck.reject_unknown(a, where, {"center", "n_spots", "radius", "prioritized"});
      if (a.contains("center")) {
        area.center = parse_vec2(a["center"], where + ".center", ck);
      } else {
        ck.problems.push_back(where + ".center: missing");
      }
      if (a.contains("n_spots") && a["n_spots"].is_array() && a["n_spots"].size() == 2) {
        area.n_spots_min = a["n_spots"][0].get<int>();
        area.n_spots_max = a["n_spots"][1].get<int>();
      } else {
        ck.problems.push_back(where + ".n_spots: expected [min, max]");
      }
      ck.fetch(a, where, "radius", area.radius);
      ck.fetch(a, where, "prioritized", area.prioritized);
      if (area.n_spots_min < 1 || area.n_spots_max < area.n_spots_min) {
        ck.problems.push_back(where + ".n_spots: need 1 <= min <= max");
      }
      ck.positive(area.radius, where + ".radius");
      cfg.areas.push_back(area);
      ++i;
    }
    if (cfg.areas.empty()) ck.problems.push_back("areas: must not be empty");
  } else {
    ck.problems.push_back("areas: missing array");
  }

  if (doc.contains("fire") && doc["fire"].is_object()) {
    const auto& f = doc["fire"];
    ck.reject_unknown(f, "fire",
                      {"case", "r0", "u0", "theta0", "r_walk_std", "u_walk_std",
                       "theta_walk_std", "spawn_prob", "spawn_max", "lb_scale",
                       "lb_offset", "evolution"});
    std::string case_name;
    if (ck.fetch(f, "fire", "case", case_name, true)) {
      cfg.fire.scenario = parse_case(case_name, ck);
    }
    ck.fetch(f, "fire", "r0", cfg.fire.r0);
    ck.fetch(f, "fire", "u0", cfg.fire.u0);
    ck.fetch(f, "fire", "theta0", cfg.fire.theta0);
    ck.fetch(f, "fire", "r_walk_std", cfg.fire.r_walk_std);
    ck.fetch(f, "fire", "u_walk_std", cfg.fire.u_walk_std);
    ck.fetch(f, "fire", "theta_walk_std", cfg.fire.theta_walk_std);
    ck.fetch(f, "fire", "spawn_prob", cfg.fire.spawn_prob);
    ck.fetch(f, "fire", "spawn_max", cfg.fire.spawn_max);
    ck.fetch(f, "fire", "lb_scale", cfg.fire.lb_scale);
    ck.fetch(f, "fire", "lb_offset", cfg.fire.lb_offset);
    ck.non_negative(cfg.fire.r0, "fire.r0");
    ck.non_negative(cfg.fire.u0, "fire.u0");
    ck.non_negative(cfg.fire.r_walk_std, "fire.r_walk_std");
    ck.non_negative(cfg.fire.u_walk_std, "fire.u_walk_std");
    ck.non_negative(cfg.fire.theta_walk_std, "fire.theta_walk_std");
    if (cfg.fire.spawn_prob < 0.0 || cfg.fire.spawn_prob > 1.0) {
      ck.problems.push_back("fire.spawn_prob: must be in [0, 1]");
    }
    if (cfg.fire.spawn_max < 0) ck.problems.push_back("fire.spawn_max: must be >= 0");
    if (cfg.fire.scenario != ScenarioCase::kMovingSpreading &&
        cfg.fire.spawn_prob != 0.0) {
      ck.problems.push_back(
          "fire.spawn_prob: must be 0 unless case is moving_spreading");
    }
    cfg.fire.theta0 = wrap_angle(cfg.fire.theta0);
    if (f.contains("evolution")) {
      if (!f["evolution"].is_array()) {
        ck.problems.push_back("fire.evolution: expected array");
      } else {
        int last_at = -1;
        int ei = 0;
        for (const auto& e : f["evolution"]) {
          const std::string where = "fire.evolution[" + std::to_string(ei) + "]";
          EvolutionEvent ev;
          if (!e.is_object()) {
            ck.problems.push_back(where + ": expected object");
            ++ei;
            continue;
          }
          ck.reject_unknown(e, where,
                            {"at", "case", "r0", "u0", "spawn_prob", "spawn_max"});
          ck.fetch(e, where, "at", ev.at, true);
          std::string ev_case;
          if (ck.fetch(e, where, "case", ev_case, true)) {
            ev.scenario = parse_case(ev_case, ck);
          }
          ev.has_r0 = ck.fetch(e, where, "r0", ev.r0);
          ev.has_u0 = ck.fetch(e, where, "u0", ev.u0);
          ev.has_spawn_prob = ck.fetch(e, where, "spawn_prob", ev.spawn_prob);
          ev.has_spawn_max = ck.fetch(e, where, "spawn_max", ev.spawn_max);
          if (ev.at < 0) ck.problems.push_back(where + ".at: must be >= 0");
          if (ev.at <= last_at) {
            ck.problems.push_back("fire.evolution: events must be in ascending step order");
          }
          last_at = ev.at;
          cfg.fire.evolution.push_back(ev);
          ++ei;
        }
      }
    }
  } else {
    ck.problems.push_back("fire: missing object");
  }

  if (doc.contains("uavs") && doc["uavs"].is_object()) {
    const auto& u = doc["uavs"];
    ck.reject_unknown(u, "uavs",
                      {"count", "v_max", "altitude", "half_angle", "start",
                       "angle_noise_std", "r_noise_std", "u_noise_std",
                       "theta_noise_std"});
    ck.fetch(u, "uavs", "count", cfg.uavs.count, true);
    ck.fetch(u, "uavs", "v_max", cfg.uavs.v_max, true);
    ck.fetch(u, "uavs", "altitude", cfg.uavs.altitude, true);
    ck.fetch(u, "uavs", "half_angle", cfg.uavs.half_angle, true);
    if (u.contains("start")) cfg.uavs.start = parse_vec2(u["start"], "uavs.start", ck);
    ck.fetch(u, "uavs", "angle_noise_std", cfg.uavs.angle_noise_std);
    ck.fetch(u, "uavs", "r_noise_std", cfg.uavs.r_noise_std);
    ck.fetch(u, "uavs", "u_noise_std", cfg.uavs.u_noise_std);
    ck.fetch(u, "uavs", "theta_noise_std", cfg.uavs.theta_noise_std);
    if (cfg.uavs.count < 1) ck.problems.push_back("uavs.count: must be >= 1");
    ck.positive(cfg.uavs.v_max, "uavs.v_max");
    ck.positive(cfg.uavs.altitude, "uavs.altitude");
    if (cfg.uavs.half_angle <= 0.0 || cfg.uavs.half_angle >= 1.5707963267948966) {
      ck.problems.push_back("uavs.half_angle: must be in (0, pi/2)");
    }
    ck.non_negative(cfg.uavs.angle_noise_std, "uavs.angle_noise_std");
    ck.non_negative(cfg.uavs.r_noise_std, "uavs.r_noise_std");
    ck.non_negative(cfg.uavs.u_noise_std, "uavs.u_noise_std");
    ck.non_negative(cfg.uavs.theta_noise_std, "uavs.theta_noise_std");
  } else {
    ck.problems.push_back("uavs: missing object");
  }

  if (doc.contains("planner")) {
    const auto& p = doc["planner"];
    ck.reject_unknown(p, "planner",
                      {"alpha", "gamma_step", "two_opt_budget", "steiner_delta",
                       "k_max", "eps_v", "dismissal_period", "literal_bounds",
                       "mc_samples", "burn_in", "spawn_window", "p0", "lambda0",
                       "gamma0"});
    ck.fetch(p, "planner", "alpha", cfg.planner.alpha);
    ck.fetch(p, "planner", "gamma_step", cfg.planner.gamma_step);
    ck.fetch(p, "planner", "two_opt_budget", cfg.planner.two_opt_budget);
    ck.fetch(p, "planner", "steiner_delta", cfg.planner.steiner_delta);
    ck.fetch(p, "planner", "k_max", cfg.planner.k_max);
    ck.fetch(p, "planner", "eps_v", cfg.planner.eps_v);
    ck.fetch(p, "planner", "dismissal_period", cfg.planner.dismissal_period);
    ck.fetch(p, "planner", "literal_bounds", cfg.planner.literal_bounds);
    ck.fetch(p, "planner", "mc_samples", cfg.planner.mc_samples);
    ck.fetch(p, "planner", "burn_in", cfg.planner.burn_in);
    ck.fetch(p, "planner", "spawn_window", cfg.planner.spawn_window);
    if (p.contains("p0")) {
      if (p["p0"].is_number()) {
        cfg.planner.p0.fill(p["p0"].get<double>());
      } else if (p["p0"].is_array() && p["p0"].size() == 8) {
        for (int i = 0; i < 8; ++i) cfg.planner.p0[i] = p["p0"][i].get<double>();
      } else {
        ck.problems.push_back("planner.p0: expected scalar or array of 8");
      }
    }
    ck.fetch(p, "planner", "lambda0", cfg.planner.lambda0);
    ck.fetch(p, "planner", "gamma0", cfg.planner.gamma0);
    if (cfg.planner.alpha <= 0.0 || cfg.planner.alpha >= 1.0) {
      ck.problems.push_back("planner.alpha: must be in (0, 1)");
    }
    if (cfg.planner.gamma_step <= 0.0 || cfg.planner.gamma_step > 1.0) {
      ck.problems.push_back("planner.gamma_step: must be in (0, 1]");
    }
    if (cfg.planner.k_max < 2) ck.problems.push_back("planner.k_max: must be >= 2");
    if (cfg.planner.mc_samples < 1) {
      ck.problems.push_back("planner.mc_samples: must be >= 1");
    }
    ck.positive(cfg.planner.eps_v, "planner.eps_v");
    ck.positive(cfg.planner.lambda0, "planner.lambda0");
    ck.positive(cfg.planner.gamma0, "planner.gamma0");
    if (cfg.planner.burn_in < 0) ck.problems.push_back("planner.burn_in: must be >= 0");
  }

  if (doc.contains("sim") && doc["sim"].is_object()) {
    const auto& s = doc["sim"];
    ck.reject_unknown(s, "sim", {"steps", "seed"});
    ck.fetch(s, "sim", "steps", cfg.sim.steps, true);
    if (s.contains("seed")) {
      try {
        cfg.sim.seed = s.at("seed").get<std::uint64_t>();
        cfg.sim.seed_set = true;
      } catch (const nlohmann::json::exception&) {
        ck.problems.push_back("sim.seed: wrong type");
      }
    } else {
      ck.problems.push_back("sim.seed: missing (wall-clock entropy is not allowed)");
    }
    if (cfg.sim.steps < 0) ck.problems.push_back("sim.steps: must be >= 0");
  } else {
    ck.problems.push_back("sim: missing object");
  }

  if (!ck.problems.empty()) throw ConfigError(std::move(ck.problems));
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError({"cannot open config file: " + file.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config(ss.str());
}

std::string scenario_config_to_json(const ScenarioConfig& cfg) {
  ordered_json doc;
  doc["terrain"] = {{"width", cfg.terrain.width}, {"height", cfg.terrain.height}};
  doc["areas"] = ordered_json::array();
  for (const AreaConfig& a : cfg.areas) {
    doc["areas"].push_back({{"center", {a.center.x(), a.center.y()}},
                            {"n_spots", {a.n_spots_min, a.n_spots_max}},
                            {"radius", a.radius},
                            {"prioritized", a.prioritized}});
  }
  const char* case_name = "stationary";
  if (cfg.fire.scenario == ScenarioCase::kMoving) case_name = "moving";
  if (cfg.fire.scenario == ScenarioCase::kMovingSpreading) case_name = "moving_spreading";
  doc["fire"] = {{"case", case_name},
                 {"r0", cfg.fire.r0},
                 {"u0", cfg.fire.u0},
                 {"theta0", cfg.fire.theta0},
                 {"r_walk_std", cfg.fire.r_walk_std},
                 {"u_walk_std", cfg.fire.u_walk_std},
                 {"theta_walk_std", cfg.fire.theta_walk_std},
                 {"spawn_prob", cfg.fire.spawn_prob},
                 {"spawn_max", cfg.fire.spawn_max},
                 {"lb_scale", cfg.fire.lb_scale},
                 {"lb_offset", cfg.fire.lb_offset}};
  if (!cfg.fire.evolution.empty()) {
    ordered_json evo = ordered_json::array();
    for (const EvolutionEvent& ev : cfg.fire.evolution) {
      const char* ev_case = "stationary";
      if (ev.scenario == ScenarioCase::kMoving) ev_case = "moving";
      if (ev.scenario == ScenarioCase::kMovingSpreading) ev_case = "moving_spreading";
      ordered_json e = {{"at", ev.at}, {"case", ev_case}};
      if (ev.has_r0) e["r0"] = ev.r0;
      if (ev.has_u0) e["u0"] = ev.u0;
      if (ev.has_spawn_prob) e["spawn_prob"] = ev.spawn_prob;
      if (ev.has_spawn_max) e["spawn_max"] = ev.spawn_max;
      evo.push_back(e);
    }
    doc["fire"]["evolution"] = evo;
  }
  doc["uavs"] = {{"count", cfg.uavs.count},
                 {"v_max", cfg.uavs.v_max},
                 {"altitude", cfg.uavs.altitude},
                 {"half_angle", cfg.uavs.half_angle},
                 {"start", {cfg.uavs.start.x(), cfg.uavs.start.y()}},
                 {"angle_noise_std", cfg.uavs.angle_noise_std},
                 {"r_noise_std", cfg.uavs.r_noise_std},
                 {"u_noise_std", cfg.uavs.u_noise_std},
                 {"theta_noise_std", cfg.uavs.theta_noise_std}};
  doc["planner"] = {{"alpha", cfg.planner.alpha},
                    {"gamma_step", cfg.planner.gamma_step},
                    {"two_opt_budget", cfg.planner.two_opt_budget},
                    {"steiner_delta", cfg.planner.steiner_delta},
                    {"k_max", cfg.planner.k_max},
                    {"eps_v", cfg.planner.eps_v},
                    {"dismissal_period", cfg.planner.dismissal_period},
                    {"literal_bounds", cfg.planner.literal_bounds},
                    {"mc_samples", cfg.planner.mc_samples},
                    {"burn_in", cfg.planner.burn_in},
                    {"spawn_window", cfg.planner.spawn_window},
                    {"p0", cfg.planner.p0},
                    {"lambda0", cfg.planner.lambda0},
                    {"gamma0", cfg.planner.gamma0}};
  doc["sim"] = {{"steps", cfg.sim.steps}, {"seed", cfg.sim.seed}};
  return doc.dump(2);
}

}  // namespace firewatch
