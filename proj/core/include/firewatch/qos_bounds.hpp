#pragma once

#include <optional>
#include <span>
#include <vector>

#include "firewatch/aekf.hpp"

namespace firewatch {

struct ConfidenceConfig {
  double alpha = 0.05;  // in (0, 1); smaller is more conservative
  int mc_samples = 512;
};

// Confidence-level firespot speed: for each track, samples (R, U, theta) from
// the filter's Gaussian marginal, maps each draw through the spread model to
// a speed, takes the empirical (1 - alpha) quantile, and returns the max over
// tracks. Speed of a draw is |C(R, U)|.
double zeta_alpha(std::span<const FilterState> filters, double alpha,
                  int mc_samples, RngStream& rng);
double zeta_alpha(const FilterState& filter, double alpha, int mc_samples,
                  RngStream& rng);

// Speed of a single track evaluated at the filter mean (no sampling).
double zeta_at_mean(const FilterState& filter);

// FOV width w = 2 * altitude * tan(half_angle). Throws std::invalid_argument
// outside altitude > 0, half_angle in (0, pi/2).
double fov_width(double altitude, double half_angle);

// Service-time upper bounds per scenario case. nullopt means the bound is
// infeasible (the graph must be split). Lengths are the spanning-tree weight
// of the service graph; all times are in steps (dt = 1 normalization).
double tub_case1(double path_len, double v_max);
std::optional<double> tub_case2(double path_len, double v_max, double zeta,
                                int n_q);
std::optional<double> tub_case3(double path_len, double v_max, double zeta,
                                int n_q, double fov_w);

// The Case-3 quadratic coefficients (named to avoid clashing with the
// filter's gamma/Gamma): Gq T^2 - Bq T + Dq = 0 with Dq the Case-2 bound.
struct Case3Coefficients {
  double gq = 0.0;
  double bq = 0.0;
  double dq = 0.0;
};
std::optional<Case3Coefficients> case3_coefficients(double path_len,
                                                    double v_max, double zeta,
                                                    int n_q, double fov_w);

// Scenario classification from estimated states: stationary when the mean
// speed stays under eps_v, moving-spreading when the tracked member count
// grew within the trailing window, moving otherwise.
ScenarioCase classify_case(std::span<const FilterState> filters,
                           std::span<const int> count_history, double eps_v,
                           int window);

// Uncertainty residual ratio: Tr(S projected ceil(t_ub) steps ahead) over
// Tr(S at the last update). Throws FilterDivergence on a zero-trace
// denominator.
double urr(const FilterState& fs, double t_ub);

// Probability that some target exceeds its confidence-level speed:
// 1 - (1 - alpha)^n_q.
double bound_confidence(double alpha, int n_q);

// Service horizon used by the planner: the static tour bound plus the
// case-specific expansion surcharge. With literal = true the case-2/3 values
// are returned verbatim instead of being added to the static bound.
std::optional<double> combined_tub(ScenarioCase scenario, double path_len,
                                   double v_max, double zeta, int n_q,
                                   double fov_w, bool literal = false);

struct QosAssessment {
  ScenarioCase scenario = ScenarioCase::kStationary;
  double zeta = 0.0;                 // zeta^alpha used for the bound
  std::optional<double> t_ub;        // service horizon (combined convention)
  std::optional<double> case_bound;  // raw per-case value
  double urr_max = 0.0;
  bool urr_evaluated = false;
  bool feasible = false;  // t_ub finite and every node URR <= 1
};

}  // namespace firewatch
