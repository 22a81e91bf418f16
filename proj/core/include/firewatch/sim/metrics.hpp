#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "firewatch/coordinator.hpp"

namespace firewatch {

// One per-step metrics row. NaN-valued fields render as empty CSV cells
// (e.g. no feasible bound yet).
struct StepRow {
  int step = 0;
  int alive_spots = 0;
  int allocated = 0;
  int in_transit = 0;
  int unallocated = 0;
  int subgraphs = 0;
  double tub_min = std::nan("");
  double tub_mean = std::nan("");
  double tub_max = std::nan("");
  double urr_max = std::nan("");
  double residual = 0.0;
  double cumulative_residual = 0.0;
  int recruits = 0;
  int dismissals = 0;
  int insufficient = 0;
};

struct MetricsRecord {
  std::vector<StepRow> rows;
  std::vector<PlanLogRow> plan_log;
  bool insufficient_any = false;
};

// Shortest stable decimal formatting shared by every writer; the same value
// always renders to the same bytes.
std::string format_double(double v);

extern const char* const kStepCsvHeader;
extern const char* const kPlanLogCsvHeader;

void write_metrics_csv(std::ostream& os, const MetricsRecord& record);
void write_plan_log_csv(std::ostream& os, const MetricsRecord& record);

}  // namespace firewatch
