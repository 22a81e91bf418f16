#include "firewatch/sim/metrics.hpp"

#include <cstdio>

namespace firewatch {

const char* const kStepCsvHeader =
    "step,alive_spots,allocated,in_transit,unallocated,subgraphs,tub_min,"
    "tub_mean,tub_max,urr_max,residual,cumulative_residual,recruits,"
    "dismissals,insufficient";

const char* const kPlanLogCsvHeader =
    "step,subgraph,uav,nodes,spots,case,zeta,tub,urr_max,feasible,arrived,event";

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_metrics_csv(std::ostream& os, const MetricsRecord& record) {
  os << kStepCsvHeader << "\n";
  for (const StepRow& r : record.rows) {
    os << r.step << ',' << r.alive_spots << ',' << r.allocated << ','
       << r.in_transit << ',' << r.unallocated << ',' << r.subgraphs << ','
       << format_double(r.tub_min) << ',' << format_double(r.tub_mean) << ','
       << format_double(r.tub_max) << ',' << format_double(r.urr_max) << ','
       << format_double(r.residual) << ','
       << format_double(r.cumulative_residual) << ',' << r.recruits << ','
       << r.dismissals << ',' << r.insufficient << "\n";
  }
}

void write_plan_log_csv(std::ostream& os, const MetricsRecord& record) {
  os << kPlanLogCsvHeader << "\n";
  for (const PlanLogRow& r : record.plan_log) {
    os << r.step << ',' << r.subgraph_id << ',' << r.uav_id << ',' << r.nodes
       << ',' << r.spots << ',' << to_string(r.scenario) << ','
       << format_double(r.zeta) << ','
       << (r.t_ub ? format_double(*r.t_ub) : std::string("inf")) << ','
       << (r.urr_evaluated ? format_double(r.urr_max) : std::string()) << ','
       << (r.feasible ? 1 : 0) << ',' << (r.arrived ? 1 : 0) << ',' << r.event
       << "\n";
  }
}

}  // namespace firewatch
