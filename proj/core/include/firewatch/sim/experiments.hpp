#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "firewatch/sim/config.hpp"
#include "firewatch/sim/runner.hpp"

namespace firewatch {

// The named desk-scale experiment set. Each writes per-trial CSVs plus an
// aggregate summary.json (schema_version 1) and optionally SVG charts; each
// is also callable in-process for the acceptance suite.
std::vector<std::string> experiment_names();

struct ExperimentOptions {
  int seeds = 10;
  int workers = 2;
  std::uint64_t base_seed = 90210;
  std::filesystem::path out_dir = "out";
  bool plots = false;
};

// --- bound tightness against the interception oracle -----------------------

struct TightnessTrial {
  int n_q = 0;
  double zeta = 0.0;
  double t_ub = 0.0;
  double t_star = 0.0;
  bool feasible = false;
  bool failure = false;  // t_ub < t_star
};

struct TightnessCaseResult {
  ScenarioCase scenario = ScenarioCase::kStationary;
  std::vector<TightnessTrial> trials;
  int feasible_trials = 0;
  int failures = 0;
  double mean_ratio = 0.0;
  double failure_fraction = 0.0;
  double allowance = 0.0;  // Eq.-style failure budget + 3 sigma binomial slack
};

TightnessCaseResult run_tightness_case(ScenarioCase scenario, int trials,
                                       std::uint64_t seed, int workers);

// --- full-loop experiment grids ---------------------------------------------

// Scenario builders used by the grids (exposed for tests).
ScenarioConfig requirements_scenario(ScenarioCase scenario, int n_areas,
                                     std::uint64_t seed);
ScenarioConfig coverage_scenario(ScenarioCase scenario, int uav_count,
                                 std::uint64_t seed);
ScenarioConfig convergence_scenario(ScenarioCase scenario, std::uint64_t seed);
ScenarioConfig mismatch_scenario(bool mismatched, double lb_scale,
                                 double lb_offset, std::uint64_t seed);
ScenarioConfig evolving_scenario(std::uint64_t seed);

struct RequirementsResult {
  int nh_max = 10;
  int seeds = 0;
  // required[case][nh-1][seed] = allocated agents at the final step
  std::array<std::vector<std::vector<int>>, 3> required;
};
RequirementsResult run_uav_requirements(int seeds, std::uint64_t base_seed,
                                        int workers, int nh_max = 10);

struct CoverageVsNResult {
  int seeds = 0;
  int max_uavs = 5;
  int steps = 0;
  // series[case][k-1][seed] = per-step cumulative residual
  std::array<std::vector<std::vector<std::vector<double>>>, 3> series;
};
CoverageVsNResult run_coverage_vs_n(int seeds, std::uint64_t base_seed,
                                    int workers, int max_uavs = 5);

struct ConvergenceResult {
  int seeds = 0;
  int steps = 0;
  // mean_tub[case][step]: mean over trials of the per-step mean bound
  std::array<std::vector<double>, 3> mean_tub;
};
ConvergenceResult run_tub_convergence(int seeds, std::uint64_t base_seed,
                                      int workers);

struct MismatchResult {
  std::vector<double> ratios;  // per-seed mismatched / matched cumulative
  double mean_ratio = 0.0;
};
MismatchResult run_model_mismatch(int seeds, std::uint64_t base_seed,
                                  int workers);

struct EvolvingResult {
  int seeds = 0;
  std::vector<double> mean_cumulative;  // per-step mean over seeds
  std::vector<double> mean_residual;
};
EvolvingResult run_evolving_fire(int seeds, std::uint64_t base_seed, int workers);

// CLI entry: runs the named experiment, writes outputs, returns the process
// exit code (0 ok, 2 unknown name, 3 when any trial reported agent shortage).
int run_experiment(const std::string& name, const ExperimentOptions& options);

}  // namespace firewatch
