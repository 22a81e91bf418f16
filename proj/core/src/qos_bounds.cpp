#include "firewatch/qos_bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace firewatch {

namespace {

// Draws from N(mean, cov) for the (R, U, theta) marginal. The covariance is
// PSD up to filter tolerance, so fall back to a clamped eigen square root if
// the Cholesky fails.
struct ParamSampler {
  Eigen::Vector3d mean;
  Eigen::Matrix3d root;

  explicit ParamSampler(const FilterState& fs) {
    mean = fs.mean.segment<3>(idx::kR);
    Eigen::Matrix3d cov = fs.P.block<3, 3>(idx::kR, idx::kR);
    cov = (cov + cov.transpose()) * 0.5;
    Eigen::LLT<Eigen::Matrix3d> llt(cov + 1e-15 * Eigen::Matrix3d::Identity());
    if (llt.info() == Eigen::Success) {
      root = llt.matrixL();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
      root = es.eigenvectors() *
             es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
  }

  Eigen::Vector3d draw(RngStream& rng) const {
    Eigen::Vector3d n(rng.normal(), rng.normal(), rng.normal());
    return mean + root * n;
  }
};

double empirical_quantile(std::vector<double>& samples, double q) {
  std::sort(samples.begin(), samples.end());
  const int n = static_cast<int>(samples.size());
  int rank = static_cast<int>(std::ceil(q * n));  // nearest-rank
  rank = std::clamp(rank, 1, n);
  return samples[rank - 1];
}

}  // namespace

double zeta_at_mean(const FilterState& filter) {
  return std::abs(
      spread_speed(filter.mean[idx::kR], filter.mean[idx::kU]));
}

double zeta_alpha(const FilterState& filter, double alpha, int mc_samples,
                  RngStream& rng) {
  const ParamSampler sampler(filter);
  std::vector<double> speeds(mc_samples);
  for (int i = 0; i < mc_samples; ++i) {
    const Eigen::Vector3d p = sampler.draw(rng);
    speeds[i] = std::abs(spread_speed(p[0], p[1]));
  }
  return empirical_quantile(speeds, 1.0 - alpha);
}

double zeta_alpha(std::span<const FilterState> filters, double alpha,
                  int mc_samples, RngStream& rng) {
  assert(!filters.empty());
  double best = 0.0;
  for (const FilterState& fs : filters) {
    best = std::max(best, zeta_alpha(fs, alpha, mc_samples, rng));
  }
  return best;
}

double fov_width(double altitude, double half_angle) {
  if (altitude <= 0.0) throw std::invalid_argument("fov_width: altitude <= 0");
  if (half_angle <= 0.0 || half_angle >= kTwoPi / 4.0) {
    throw std::invalid_argument("fov_width: half_angle outside (0, pi/2)");
  }
  return 2.0 * altitude * std::tan(half_angle);
}

double tub_case1(double path_len, double v_max) {
  assert(v_max > 0.0);
  return 2.0 * path_len / v_max;
}

std::optional<double> tub_case2(double path_len, double v_max, double zeta,
                                int n_q) {
  assert(n_q >= 1);
  const double expansion = 4.0 * zeta * static_cast<double>(n_q - 1);
  const double margin = 1.0 - expansion;
  if (margin <= 0.0) return std::nullopt;
  return 2.0 * expansion * path_len / (v_max * margin);
}

std::optional<Case3Coefficients> case3_coefficients(double path_len,
                                                    double v_max, double zeta,
                                                    int n_q, double fov_w) {
  assert(n_q >= 1 && fov_w > 0.0);
  const std::optional<double> dq = tub_case2(path_len, v_max, zeta, n_q);
  if (!dq) return std::nullopt;
  Case3Coefficients c;
  c.gq = 4.0 * n_q * zeta * zeta / (fov_w * v_max);
  c.bq = 1.0 - 2.0 * n_q * zeta / v_max;
  c.dq = *dq;
  return c;
}

std::optional<double> tub_case3(double path_len, double v_max, double zeta,
                                int n_q, double fov_w) {
  const std::optional<Case3Coefficients> c =
      case3_coefficients(path_len, v_max, zeta, n_q, fov_w);
  if (!c) return std::nullopt;
  if (c->bq <= 0.0) return std::nullopt;
  const double disc = c->bq * c->bq - 4.0 * c->gq * c->dq;
  if (disc < 0.0) return std::nullopt;
  // Smaller positive root in citardauq form: exact at gq -> 0 and avoids the
  // cancellation in (bq - sqrt(disc)) / (2 gq).
  const double root = 2.0 * c->dq / (c->bq + std::sqrt(disc));
  const double residual = c->gq * root * root - c->bq * root + c->dq;
  if (!(std::abs(residual) < 1e-9)) {
    throw std::logic_error("tub_case3: root does not satisfy its quadratic");
  }
  return root;
}

ScenarioCase classify_case(std::span<const FilterState> filters,
                           std::span<const int> count_history, double eps_v,
                           int window) {
  const int n = static_cast<int>(count_history.size());
  const int first = std::max(1, n - window);
  for (int i = first; i < n; ++i) {
    if (count_history[i] > count_history[i - 1]) {
      return ScenarioCase::kMovingSpreading;
    }
  }
  double speed = 0.0;
  for (const FilterState& fs : filters) {
    speed = std::max(speed, zeta_at_mean(fs));
  }
  return speed < eps_v ? ScenarioCase::kStationary : ScenarioCase::kMoving;
}

double urr(const FilterState& fs, double t_ub) {
  assert(t_ub >= 0.0);
  const double denom = fs.innovation_cov.trace();
  if (!(denom > 0.0)) {
    throw FilterDivergence("urr: zero-trace residual covariance");
  }
  const int k = static_cast<int>(std::ceil(t_ub));
  return project_residual(fs, k).trace() / denom;
}

double bound_confidence(double alpha, int n_q) {
  assert(n_q >= 1);
  return 1.0 - std::pow(1.0 - alpha, n_q);
}

std::optional<double> combined_tub(ScenarioCase scenario, double path_len,
                                   double v_max, double zeta, int n_q,
                                   double fov_w, bool literal) {
  const double base = tub_case1(path_len, v_max);
  switch (scenario) {
    case ScenarioCase::kStationary:
      return base;
    case ScenarioCase::kMoving: {
      const std::optional<double> surcharge =
          tub_case2(path_len, v_max, zeta, n_q);
      if (!surcharge) return std::nullopt;
      return literal ? *surcharge : base + *surcharge;
    }
    case ScenarioCase::kMovingSpreading: {
      const std::optional<double> surcharge =
          tub_case3(path_len, v_max, zeta, n_q, fov_w);
      if (!surcharge) return std::nullopt;
      return literal ? *surcharge : base + *surcharge;
    }
  }
  return std::nullopt;
}

}  // namespace firewatch
