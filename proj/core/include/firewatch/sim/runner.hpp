#pragma once

#include <cstdint>

#include "firewatch/coverage.hpp"
#include "firewatch/sim/config.hpp"
#include "firewatch/sim/metrics.hpp"

namespace firewatch {

struct RunResult {
  MetricsRecord metrics;
  int final_allocated = 0;
  int max_allocated = 0;
  int final_alive = 0;
  double final_cumulative_residual = 0.0;
  bool insufficient_any = false;
};

// Drives one scenario end to end: seeded world construction, per-step ground
// truth, UAV kinematics (bounded by v_max, arrival radius 0.5), AEKF
// predict/measure/update for spots inside some FOV, a coordinator round over
// the prioritized spots, and a coverage round for the rest. Bit-identical
// output for identical (config, trial) inputs; all randomness comes from
// streams derived from (sim.seed, trial, stream-name).
RunResult run_scenario(const ScenarioConfig& cfg, std::uint64_t trial = 0);

}  // namespace firewatch
