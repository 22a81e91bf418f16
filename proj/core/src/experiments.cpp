#include "firewatch/sim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "firewatch/sim/svg_plot.hpp"
#include "firewatch/sim/t_star.hpp"
#include "firewatch/tour_graph.hpp"

namespace firewatch {

using nlohmann::ordered_json;

namespace {

constexpr double kZ95 = 1.6448536269514722;  // standard normal 0.95 quantile

void parallel_trials(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto drain = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (std::thread& th : pool) th.join();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

// Rejection-sampled area centers with a minimum separation; relaxes the
// separation if the draw gets stuck.
std::vector<Vec2> sample_centers(int n, double lo, double hi, double min_sep,
                                 RngStream& rng) {
  std::vector<Vec2> centers;
  double sep = min_sep;
  int attempts = 0;
  while (static_cast<int>(centers.size()) < n) {
    const Vec2 c(rng.uniform(lo, hi), rng.uniform(lo, hi));
    bool ok = true;
    for (const Vec2& o : centers) {
      if ((o - c).norm() < sep) {
        ok = false;
        break;
      }
    }
    if (ok) centers.push_back(c);
    if (++attempts > 200 * n) {
      sep *= 0.8;
      attempts = 0;
    }
  }
  return centers;
}

// Spread rate that yields speed c at wind u.
double rate_for_speed(double c, double u) {
  const double factor = spread_speed(1.0, u);
  return factor > 0.0 ? c / factor : 0.0;
}

struct CaseFire {
  double speed = 0.0;       // true firespot speed, grid units / step
  double spawn_prob = 0.0;
  int spawn_max = 0;
};

CaseFire case_fire(ScenarioCase scenario, double moving_speed,
                   double spreading_speed, double spawn_prob, int spawn_max) {
  switch (scenario) {
    case ScenarioCase::kStationary:
      return {0.0, 0.0, 0};
    case ScenarioCase::kMoving:
      return {moving_speed, 0.0, 0};
    case ScenarioCase::kMovingSpreading:
      return {spreading_speed, spawn_prob, spawn_max};
  }
  return {};
}

ScenarioCase case_of(int i) {
  return i == 0 ? ScenarioCase::kStationary
                : (i == 1 ? ScenarioCase::kMoving : ScenarioCase::kMovingSpreading);
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index) {
  return stream_seed(base, index, "trial");
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"uav_requirements", "coverage_vs_n", "tub_convergence",
          "tub_tightness",   "evolving_fire", "model_mismatch"};
}

// ---------------------------------------------------------------------------
// tub_tightness: synthetic service instances measured against the
// interception oracle.
// ---------------------------------------------------------------------------

namespace {

struct TightnessParams {
  double box = 30.0;
  double v_max = 2.0;
  double speed_mean = 0.0;
  double speed_std = 0.0;
  double fov_w = 4.0;
};

TightnessParams tightness_params(ScenarioCase scenario) {
  TightnessParams p;
  switch (scenario) {
    case ScenarioCase::kStationary:
      break;
    case ScenarioCase::kMoving:
      p.speed_mean = 0.006;
      p.speed_std = 0.0015;
      break;
    case ScenarioCase::kMovingSpreading:
      p.speed_mean = 0.012;
      p.speed_std = 0.003;
      break;
  }
  return p;
}

}  // namespace

TightnessCaseResult run_tightness_case(ScenarioCase scenario, int trials,
                                       std::uint64_t seed, int workers) {
  const TightnessParams p = tightness_params(scenario);
  TightnessCaseResult out;
  out.scenario = scenario;
  out.trials.resize(trials);

  parallel_trials(trials, workers, [&](int t) {
    RngStream rng(seed, static_cast<std::uint64_t>(t), "tightness");
    TightnessTrial& trial = out.trials[t];
    trial.n_q = 2 + static_cast<int>(rng.uniform_int(7));  // 2..8

    std::vector<Vec2> pts(trial.n_q);
    std::vector<Vec2> vels(trial.n_q, Vec2::Zero());
    for (int i = 0; i < trial.n_q; ++i) {
      pts[i] = Vec2(rng.uniform(0.0, p.box), rng.uniform(0.0, p.box));
    }
    if (scenario != ScenarioCase::kStationary) {
      for (int i = 0; i < trial.n_q; ++i) {
        const double speed = std::abs(rng.normal(p.speed_mean, p.speed_std));
        const double ang = rng.uniform(0.0, kTwoPi);
        vels[i] = speed * Vec2(std::sin(ang), std::cos(ang));
      }
    }

    // The planner-side confidence speed: the (1 - alpha) quantile of the
    // speed model the targets are drawn from.
    trial.zeta = scenario == ScenarioCase::kStationary
                     ? 0.0
                     : p.speed_mean + kZ95 * p.speed_std;

    const double mst_len = mst_weight(build_mst(pts));
    const std::optional<double> t_ub =
        combined_tub(scenario, mst_len, p.v_max, trial.zeta, trial.n_q, p.fov_w);
    const std::optional<double> t_star =
        t_star_oracle(pts[0], pts, vels, p.v_max);
    if (!t_ub || !t_star || *t_star <= 0.0) {
      trial.feasible = false;
      return;
    }
    trial.feasible = true;
    trial.t_ub = *t_ub;
    trial.t_star = *t_star;
    trial.failure = trial.t_ub < trial.t_star;
  });

  double ratio_sum = 0.0;
  double allowance_sum = 0.0;
  for (const TightnessTrial& t : out.trials) {
    if (!t.feasible) continue;
    ++out.feasible_trials;
    ratio_sum += t.t_ub / t.t_star;
    allowance_sum += bound_confidence(0.05, t.n_q);
    if (t.failure) ++out.failures;
  }
  if (out.feasible_trials > 0) {
    out.mean_ratio = ratio_sum / out.feasible_trials;
    out.failure_fraction =
        static_cast<double>(out.failures) / out.feasible_trials;
    const double budget = allowance_sum / out.feasible_trials;
    const double sigma =
        std::sqrt(std::max(budget * (1.0 - budget), 1e-12) / out.feasible_trials);
    out.allowance = budget + 3.0 * sigma;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario builders for the full-loop grids.
// ---------------------------------------------------------------------------

ScenarioConfig requirements_scenario(ScenarioCase scenario, int n_areas,
                                     std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.terrain = {500.0, 500.0};
  RngStream rng(seed, 0, "areas");
  const std::vector<Vec2> centers = sample_centers(n_areas, 60.0, 440.0, 90.0, rng);
  for (const Vec2& c : centers) {
    AreaConfig a;
    a.center = c;
    a.n_spots_min = 20;
    a.n_spots_max = 30;
    a.radius = 6.0;
    a.prioritized = true;
    cfg.areas.push_back(a);
  }
  const CaseFire fire = case_fire(scenario, 0.02, 0.035, 0.004, 3);
  cfg.fire.scenario = scenario;
  cfg.fire.u0 = 1.0;
  cfg.fire.r0 = rate_for_speed(fire.speed, cfg.fire.u0);
  cfg.fire.theta0 = 0.8;
  cfg.fire.spawn_prob = fire.spawn_prob;
  cfg.fire.spawn_max = fire.spawn_max;
  cfg.uavs.count = 30;
  cfg.uavs.v_max = 40.0;
  cfg.uavs.altitude = 25.0;
  cfg.uavs.half_angle = 0.46364760900080615;  // tan = 0.5 -> w = 25
  cfg.uavs.start = {10.0, 10.0};
  cfg.uavs.angle_noise_std = 0.01;
  cfg.uavs.r_noise_std = 0.03;
  cfg.uavs.u_noise_std = 0.08;
  cfg.uavs.theta_noise_std = 0.05;
  cfg.planner.k_max = 40;
  cfg.planner.mc_samples = 128;
  cfg.planner.p0 = {1, 1, 1, 1, 1, 0.0016, 0.01, 0.0025};
  cfg.sim.steps = 120;
  cfg.sim.seed = seed;
  cfg.sim.seed_set = true;
  return cfg;
}

ScenarioConfig coverage_scenario(ScenarioCase scenario, int uav_count,
                                 std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.terrain = {120.0, 120.0};
  RngStream rng(seed, 0, "areas");
  const std::vector<Vec2> centers = sample_centers(5, 25.0, 95.0, 40.0, rng);
  for (const Vec2& c : centers) {
    AreaConfig a;
    a.center = c;
    a.n_spots_min = 5;
    a.n_spots_max = 7;
    a.radius = 3.0;
    a.prioritized = false;
    cfg.areas.push_back(a);
  }
  const CaseFire fire = case_fire(scenario, 0.02, 0.03, 0.01, 3);
  cfg.fire.scenario = scenario;
  cfg.fire.u0 = 1.0;
  cfg.fire.r0 = rate_for_speed(fire.speed, cfg.fire.u0);
  cfg.fire.theta0 = 2.2;
  cfg.fire.spawn_prob = fire.spawn_prob;
  cfg.fire.spawn_max = fire.spawn_max;
  cfg.uavs.count = uav_count;
  cfg.uavs.v_max = 25.0;
  cfg.uavs.altitude = 10.0;
  cfg.uavs.half_angle = 0.7853981633974483;  // tan = 1 -> w = 20
  cfg.uavs.start = {5.0, 5.0};
  cfg.uavs.angle_noise_std = 0.01;
  cfg.uavs.r_noise_std = 0.03;
  cfg.uavs.u_noise_std = 0.08;
  cfg.uavs.theta_noise_std = 0.05;
  cfg.planner.k_max = 12;
  cfg.planner.mc_samples = 128;
  cfg.planner.p0 = {1, 1, 1, 1, 1, 0.0016, 0.01, 0.0025};
  cfg.sim.steps = 115;
  cfg.sim.seed = seed;
  cfg.sim.seed_set = true;
  return cfg;
}

ScenarioConfig convergence_scenario(ScenarioCase scenario, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.terrain = {200.0, 200.0};
  RngStream rng(seed, 0, "areas");
  const std::vector<Vec2> centers = sample_centers(3, 40.0, 160.0, 70.0, rng);
  for (const Vec2& c : centers) {
    AreaConfig a;
    a.center = c;
    a.n_spots_min = 6;
    a.n_spots_max = 9;
    a.radius = 6.0;
    a.prioritized = true;
    cfg.areas.push_back(a);
  }
  const CaseFire fire = case_fire(scenario, 0.02, 0.035, 0.008, 3);
  cfg.fire.scenario = scenario;
  cfg.fire.u0 = 1.0;
  cfg.fire.r0 = rate_for_speed(fire.speed, cfg.fire.u0);
  cfg.fire.theta0 = 4.0;
  cfg.fire.spawn_prob = fire.spawn_prob;
  cfg.fire.spawn_max = fire.spawn_max;
  cfg.uavs.count = 12;
  cfg.uavs.v_max = 25.0;
  cfg.uavs.altitude = 25.0;
  cfg.uavs.half_angle = 0.46364760900080615;  // w = 25
  cfg.uavs.start = {8.0, 8.0};
  cfg.uavs.angle_noise_std = 0.01;
  cfg.uavs.r_noise_std = 0.03;
  cfg.uavs.u_noise_std = 0.08;
  cfg.uavs.theta_noise_std = 0.05;
  cfg.planner.k_max = 40;
  cfg.planner.mc_samples = 128;
  cfg.planner.p0 = {1, 1, 1, 1, 1, 0.0016, 0.01, 0.0025};
  cfg.sim.steps = 160;
  cfg.sim.seed = seed;
  cfg.sim.seed_set = true;
  return cfg;
}

ScenarioConfig mismatch_scenario(bool mismatched, double lb_scale,
                                 double lb_offset, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.terrain = {150.0, 150.0};
  RngStream rng(seed, 0, "areas");
  const std::vector<Vec2> centers = sample_centers(2, 35.0, 115.0, 60.0, rng);
  for (const Vec2& c : centers) {
    AreaConfig a;
    a.center = c;
    a.n_spots_min = 10;
    a.n_spots_max = 14;
    a.radius = 5.0;
    a.prioritized = true;
    cfg.areas.push_back(a);
  }
  cfg.fire.scenario = ScenarioCase::kMoving;
  // Low wind: the length-to-breadth perturbation moves the speed most here.
  cfg.fire.u0 = 0.1;
  cfg.fire.r0 = 0.065;
  cfg.fire.theta0 = 1.1;
  if (mismatched) {
    cfg.fire.lb_scale = lb_scale;
    cfg.fire.lb_offset = lb_offset;
  }
  cfg.uavs.count = 5;
  cfg.uavs.v_max = 25.0;
  cfg.uavs.altitude = 10.0;
  cfg.uavs.half_angle = 0.7853981633974483;  // w = 20
  cfg.uavs.start = {5.0, 5.0};
  cfg.uavs.angle_noise_std = 0.01;
  cfg.uavs.r_noise_std = 0.03;
  cfg.uavs.u_noise_std = 0.08;
  cfg.uavs.theta_noise_std = 0.05;
  cfg.planner.k_max = 12;
  cfg.planner.mc_samples = 128;
  cfg.planner.p0 = {1, 1, 1, 1, 1, 0.0016, 0.01, 0.0025};
  cfg.sim.steps = 120;
  cfg.sim.seed = seed;
  cfg.sim.seed_set = true;
  return cfg;
}

ScenarioConfig evolving_scenario(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.terrain = {150.0, 150.0};
  RngStream rng(seed, 0, "areas");
  const std::vector<Vec2> centers = sample_centers(2, 35.0, 115.0, 55.0, rng);
  for (const Vec2& c : centers) {
    AreaConfig a;
    a.center = c;
    a.n_spots_min = 12;
    a.n_spots_max = 18;
    a.radius = 5.0;
    a.prioritized = false;
    cfg.areas.push_back(a);
  }
  cfg.fire.scenario = ScenarioCase::kStationary;
  cfg.fire.u0 = 1.0;
  cfg.fire.r0 = 0.0;
  cfg.fire.theta0 = 5.0;

  EvolutionEvent to_moving;
  to_moving.at = 50;
  to_moving.scenario = ScenarioCase::kMoving;
  to_moving.has_r0 = true;
  to_moving.r0 = rate_for_speed(0.02, cfg.fire.u0);
  EvolutionEvent to_spreading;
  to_spreading.at = 150;
  to_spreading.scenario = ScenarioCase::kMovingSpreading;
  to_spreading.has_r0 = true;
  to_spreading.r0 = rate_for_speed(0.03, cfg.fire.u0);
  to_spreading.has_spawn_prob = true;
  to_spreading.spawn_prob = 0.006;
  to_spreading.has_spawn_max = true;
  to_spreading.spawn_max = 3;
  cfg.fire.evolution = {to_moving, to_spreading};

  cfg.uavs.count = 5;
  cfg.uavs.v_max = 25.0;
  cfg.uavs.altitude = 10.0;
  cfg.uavs.half_angle = 0.7853981633974483;
  cfg.uavs.start = {5.0, 5.0};
  cfg.uavs.angle_noise_std = 0.01;
  cfg.uavs.r_noise_std = 0.03;
  cfg.uavs.u_noise_std = 0.08;
  cfg.uavs.theta_noise_std = 0.05;
  cfg.planner.k_max = 12;
  cfg.planner.mc_samples = 128;
  cfg.planner.p0 = {1, 1, 1, 1, 1, 0.0016, 0.01, 0.0025};
  cfg.sim.steps = 350;
  cfg.sim.seed = seed;
  cfg.sim.seed_set = true;
  return cfg;
}

// ---------------------------------------------------------------------------
// Grid runners.
// ---------------------------------------------------------------------------

RequirementsResult run_uav_requirements(int seeds, std::uint64_t base_seed,
                                        int workers, int nh_max) {
  RequirementsResult out;
  out.nh_max = nh_max;
  out.seeds = seeds;
  for (int c = 0; c < 3; ++c) {
    out.required[c].assign(nh_max, std::vector<int>(seeds, 0));
  }
  const int total = 3 * nh_max * seeds;
  parallel_trials(total, workers, [&](int idx) {
    const int c = idx / (nh_max * seeds);
    const int nh = (idx / seeds) % nh_max + 1;
    const int s = idx % seeds;
    const ScenarioConfig cfg = requirements_scenario(
        case_of(c), nh, trial_seed(base_seed, static_cast<std::uint64_t>(idx)));
    const RunResult run = run_scenario(cfg);
    out.required[c][nh - 1][s] = run.final_allocated;
  });
  return out;
}

CoverageVsNResult run_coverage_vs_n(int seeds, std::uint64_t base_seed,
                                    int workers, int max_uavs) {
  CoverageVsNResult out;
  out.seeds = seeds;
  out.max_uavs = max_uavs;
  for (int c = 0; c < 3; ++c) {
    out.series[c].assign(max_uavs, std::vector<std::vector<double>>(seeds));
  }
  const int total = 3 * max_uavs * seeds;
  parallel_trials(total, workers, [&](int idx) {
    const int c = idx / (max_uavs * seeds);
    const int k = (idx / seeds) % max_uavs + 1;
    const int s = idx % seeds;
    const ScenarioConfig cfg = coverage_scenario(
        case_of(c), k, trial_seed(base_seed, static_cast<std::uint64_t>(idx)));
    const RunResult run = run_scenario(cfg);
    std::vector<double> series;
    series.reserve(run.metrics.rows.size());
    for (const StepRow& r : run.metrics.rows) series.push_back(r.cumulative_residual);
    out.series[c][k - 1][s] = std::move(series);
    out.steps = static_cast<int>(run.metrics.rows.size());
  });
  return out;
}

ConvergenceResult run_tub_convergence(int seeds, std::uint64_t base_seed,
                                      int workers) {
  ConvergenceResult out;
  out.seeds = seeds;
  std::array<std::vector<std::vector<double>>, 3> per_trial;
  for (int c = 0; c < 3; ++c) per_trial[c].assign(seeds, {});
  const int total = 3 * seeds;
  parallel_trials(total, workers, [&](int idx) {
    const int c = idx / seeds;
    const int s = idx % seeds;
    const ScenarioConfig cfg = convergence_scenario(
        case_of(c), trial_seed(base_seed, static_cast<std::uint64_t>(idx)));
    const RunResult run = run_scenario(cfg);
    std::vector<double> series;
    for (const StepRow& r : run.metrics.rows) series.push_back(r.tub_mean);
    per_trial[c][s] = std::move(series);
  });
  for (int c = 0; c < 3; ++c) {
    std::size_t steps = 0;
    for (const auto& s : per_trial[c]) steps = std::max(steps, s.size());
    out.mean_tub[c].assign(steps, std::nan(""));
    for (std::size_t t = 0; t < steps; ++t) {
      double sum = 0.0;
      int n = 0;
      for (const auto& s : per_trial[c]) {
        if (t < s.size() && !std::isnan(s[t])) {
          sum += s[t];
          ++n;
        }
      }
      if (n > 0) out.mean_tub[c][t] = sum / n;
    }
    out.steps = static_cast<int>(steps);
  }
  return out;
}

MismatchResult run_model_mismatch(int seeds, std::uint64_t base_seed,
                                  int workers) {
  MismatchResult out;
  out.ratios.assign(seeds, 0.0);
  parallel_trials(seeds, workers, [&](int s) {
    RngStream draw(base_seed, static_cast<std::uint64_t>(s), "mismatch");
    const double lb_scale = draw.normal(10.0, 3.0);
    const double lb_offset = draw.normal(0.0, 3.0);
    const std::uint64_t seed = trial_seed(base_seed, static_cast<std::uint64_t>(s));
    const RunResult mismatched =
        run_scenario(mismatch_scenario(true, lb_scale, lb_offset, seed));
    const RunResult matched =
        run_scenario(mismatch_scenario(false, 1.0, 0.0, seed));
    const double denom = std::max(matched.final_cumulative_residual, 1e-12);
    out.ratios[s] = mismatched.final_cumulative_residual / denom;
  });
  out.mean_ratio = mean_of(out.ratios);
  return out;
}

EvolvingResult run_evolving_fire(int seeds, std::uint64_t base_seed, int workers) {
  EvolvingResult out;
  out.seeds = seeds;
  std::vector<std::vector<double>> cum(seeds), res(seeds);
  parallel_trials(seeds, workers, [&](int s) {
    const ScenarioConfig cfg =
        evolving_scenario(trial_seed(base_seed, static_cast<std::uint64_t>(s)));
    const RunResult run = run_scenario(cfg);
    for (const StepRow& r : run.metrics.rows) {
      cum[s].push_back(r.cumulative_residual);
      res[s].push_back(r.residual);
    }
  });
  std::size_t steps = 0;
  for (const auto& v : cum) steps = std::max(steps, v.size());
  out.mean_cumulative.assign(steps, 0.0);
  out.mean_residual.assign(steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    int n = 0;
    for (int s = 0; s < seeds; ++s) {
      if (t < cum[s].size()) {
        out.mean_cumulative[t] += cum[s][t];
        out.mean_residual[t] += res[s][t];
        ++n;
      }
    }
    if (n > 0) {
      out.mean_cumulative[t] /= n;
      out.mean_residual[t] /= n;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CLI entry: run, persist, summarize.
// ---------------------------------------------------------------------------

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

ordered_json stat_block(const std::vector<double>& v) {
  return {{"mean", mean_of(v)}, {"stderr", stderr_of(v)}, {"n", v.size()}};
}

const char* case_key(int c) {
  return c == 0 ? "case1_stationary" : (c == 1 ? "case2_moving" : "case3_moving_spreading");
}

int write_tightness(const ExperimentOptions& opt, const std::filesystem::path& dir) {
  ordered_json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "tub_tightness";
  std::ostringstream csv;
  csv << "case,trial,n_q,zeta,t_ub,t_star,ratio,failure\n";
  std::vector<PlotSeries> chart;
  const int trials = std::max(opt.seeds, 1) * 50;  // seeds scales the trial count
  for (int c = 0; c < 3; ++c) {
    const TightnessCaseResult r =
        run_tightness_case(case_of(c), trials, opt.base_seed, opt.workers);
    summary["cases"][case_key(c)] = {
        {"trials", r.trials.size()},
        {"feasible", r.feasible_trials},
        {"failures", r.failures},
        {"mean_ratio", r.mean_ratio},
        {"failure_fraction", r.failure_fraction},
        {"allowance", r.allowance}};
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
      const TightnessTrial& t = r.trials[i];
      if (!t.feasible) continue;
      csv << to_string(case_of(c)) << ',' << i << ',' << t.n_q << ','
          << format_double(t.zeta) << ',' << format_double(t.t_ub) << ','
          << format_double(t.t_star) << ',' << format_double(t.t_ub / t.t_star)
          << ',' << (t.failure ? 1 : 0) << "\n";
    }
  }
  write_text(dir / "trials.csv", csv.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  (void)chart;
  return 0;
}

int write_requirements(const ExperimentOptions& opt, const std::filesystem::path& dir) {
  const RequirementsResult r =
      run_uav_requirements(opt.seeds, opt.base_seed, opt.workers);
  ordered_json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "uav_requirements";
  std::ostringstream csv;
  csv << "case,n_areas,seed,required_uavs\n";
  std::vector<PlotSeries> chart;
  for (int c = 0; c < 3; ++c) {
    PlotSeries series;
    series.name = case_key(c);
    for (int nh = 1; nh <= r.nh_max; ++nh) {
      std::vector<double> vals;
      for (int s = 0; s < r.seeds; ++s) {
        vals.push_back(r.required[c][nh - 1][s]);
        csv << to_string(case_of(c)) << ',' << nh << ',' << s << ','
            << r.required[c][nh - 1][s] << "\n";
      }
      summary["cases"][case_key(c)]["n_areas_" + std::to_string(nh)] = stat_block(vals);
      series.x.push_back(nh);
      series.y.push_back(mean_of(vals));
    }
    chart.push_back(std::move(series));
  }
  write_text(dir / "trials.csv", csv.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (opt.plots) {
    write_line_chart((dir / "required_uavs.svg").string(),
                     "Agents required vs monitored areas", "areas",
                     "required agents", chart);
  }
  return 0;
}

int write_coverage(const ExperimentOptions& opt, const std::filesystem::path& dir) {
  const CoverageVsNResult r = run_coverage_vs_n(opt.seeds, opt.base_seed, opt.workers);
  ordered_json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "coverage_vs_n";
  std::ostringstream csv;
  csv << "case,uavs,seed,final_cumulative_residual\n";
  std::vector<PlotSeries> chart;
  for (int c = 0; c < 3; ++c) {
    PlotSeries series;
    series.name = case_key(c);
    for (int k = 1; k <= r.max_uavs; ++k) {
      std::vector<double> finals;
      for (int s = 0; s < r.seeds; ++s) {
        const std::vector<double>& ser = r.series[c][k - 1][s];
        const double final_cum = ser.empty() ? 0.0 : ser.back();
        finals.push_back(final_cum);
        csv << to_string(case_of(c)) << ',' << k << ',' << s << ','
            << format_double(final_cum) << "\n";
      }
      summary["cases"][case_key(c)]["uavs_" + std::to_string(k)] = stat_block(finals);
      series.x.push_back(k);
      series.y.push_back(mean_of(finals));
    }
    chart.push_back(std::move(series));
  }
  write_text(dir / "trials.csv", csv.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (opt.plots) {
    write_line_chart((dir / "coverage_residual.svg").string(),
                     "Cumulative residual vs team size", "agents",
                     "cumulative residual", chart);
  }
  return 0;
}

int write_convergence(const ExperimentOptions& opt, const std::filesystem::path& dir) {
  const ConvergenceResult r = run_tub_convergence(opt.seeds, opt.base_seed, opt.workers);
  ordered_json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "tub_convergence";
  std::ostringstream csv;
  csv << "case,step,mean_tub\n";
  std::vector<PlotSeries> chart;
  for (int c = 0; c < 3; ++c) {
    PlotSeries series;
    series.name = case_key(c);
    const std::vector<double>& ser = r.mean_tub[c];
    for (std::size_t t = 0; t < ser.size(); ++t) {
      csv << to_string(case_of(c)) << ',' << t << ',' << format_double(ser[t]) << "\n";
      if (!std::isnan(ser[t])) {
        series.x.push_back(static_cast<double>(t));
        series.y.push_back(ser[t]);
      }
    }
    // Quartile means of the time series.
    const std::size_t q = std::max<std::size_t>(ser.size() / 4, 1);
    ordered_json quartiles = ordered_json::array();
    for (int qi = 0; qi < 4; ++qi) {
      const std::size_t lo = qi * q;
      const std::size_t hi = qi == 3 ? ser.size() : (qi + 1) * q;
      std::vector<double> vals;
      for (std::size_t t = lo; t < hi && t < ser.size(); ++t) {
        if (!std::isnan(ser[t])) vals.push_back(ser[t]);
      }
      quartiles.push_back(mean_of(vals));
    }
    summary["cases"][case_key(c)] = {{"quartile_means", quartiles}};
    chart.push_back(std::move(series));
  }
  write_text(dir / "series.csv", csv.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (opt.plots) {
    write_line_chart((dir / "tub_convergence.svg").string(),
                     "Service bound over time", "step", "mean bound", chart);
  }
  return 0;
}

int write_mismatch(const ExperimentOptions& opt, const std::filesystem::path& dir) {
  const MismatchResult r = run_model_mismatch(opt.seeds, opt.base_seed, opt.workers);
  ordered_json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "model_mismatch";
  summary["ratios"] = r.ratios;
  summary["ratio"] = stat_block(r.ratios);
  std::ostringstream csv;
  csv << "seed,cumulative_ratio\n";
  for (std::size_t s = 0; s < r.ratios.size(); ++s) {
    csv << s << ',' << format_double(r.ratios[s]) << "\n";
  }
  write_text(dir / "trials.csv", csv.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return 0;
}

int write_evolving(const ExperimentOptions& opt, const std::filesystem::path& dir) {
  const EvolvingResult r = run_evolving_fire(opt.seeds, opt.base_seed, opt.workers);
  ordered_json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "evolving_fire";
  summary["final_cumulative_mean"] =
      r.mean_cumulative.empty() ? 0.0 : r.mean_cumulative.back();
  std::ostringstream csv;
  csv << "step,mean_residual,mean_cumulative_residual\n";
  for (std::size_t t = 0; t < r.mean_cumulative.size(); ++t) {
    csv << t << ',' << format_double(r.mean_residual[t]) << ','
        << format_double(r.mean_cumulative[t]) << "\n";
  }
  write_text(dir / "series.csv", csv.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (opt.plots) {
    PlotSeries s;
    s.name = "cumulative residual";
    for (std::size_t t = 0; t < r.mean_cumulative.size(); ++t) {
      s.x.push_back(static_cast<double>(t));
      s.y.push_back(r.mean_cumulative[t]);
    }
    write_line_chart((dir / "evolving_fire.svg").string(),
                     "Evolving fire cumulative residual", "step",
                     "cumulative residual", {s});
  }
  return 0;
}

}  // namespace

int run_experiment(const std::string& name, const ExperimentOptions& options) {
  const std::vector<std::string> names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::ostringstream os;
    os << "unknown experiment '" << name << "'; valid names:";
    for (const std::string& n : names) os << ' ' << n;
    throw std::invalid_argument(os.str());
  }
  const std::filesystem::path dir = options.out_dir / name;
  std::filesystem::create_directories(dir);
  if (name == "tub_tightness") return write_tightness(options, dir);
  if (name == "uav_requirements") return write_requirements(options, dir);
  if (name == "coverage_vs_n") return write_coverage(options, dir);
  if (name == "tub_convergence") return write_convergence(options, dir);
  if (name == "model_mismatch") return write_mismatch(options, dir);
  return write_evolving(options, dir);
}

}  // namespace firewatch
