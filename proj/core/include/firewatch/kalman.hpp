#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <stdexcept>

namespace firewatch {

struct FilterDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Mat>
void symmetrize(Mat& m) {
  m = ((m + m.transpose()) * 0.5).eval();
}

// Covariance half of the EKF prediction: P <- F P F^T + Lambda.
template <int N>
void kalman_predict_cov(Eigen::Matrix<double, N, N>& P,
                        const Eigen::Matrix<double, N, N>& F,
                        const Eigen::Matrix<double, N, N>& process_noise) {
  P = (F * P * F.transpose() + process_noise).eval();
  symmetrize(P);
}

template <int N, int M>
struct KalmanUpdate {
  Eigen::Matrix<double, M, 1> innovation;  // z - h(mean) before the update
  Eigen::Matrix<double, M, 1> residual;    // z - h(mean) after the update
  Eigen::Matrix<double, M, M> innovation_cov;
  Eigen::Matrix<double, N, M> gain;
};

// Joseph-form EKF measurement update with innovation/residual-based noise
// adaptation. With gamma_step == 1 the noise matrices are untouched and this
// is a plain EKF update. obs_map(mean) predicts the measurement; obs_diff
// computes measurement-space differences (it owns any angle wrapping).
// Throws FilterDivergence when the innovation covariance is not invertible.
template <int N, int M, typename ObsMapFn, typename ObsDiffFn>
KalmanUpdate<N, M> kalman_update(Eigen::Matrix<double, N, 1>& mean,
                                 Eigen::Matrix<double, N, N>& P,
                                 const Eigen::Matrix<double, M, N>& H,
                                 ObsMapFn&& obs_map, ObsDiffFn&& obs_diff,
                                 const Eigen::Matrix<double, M, 1>& z,
                                 Eigen::Matrix<double, M, M>& obs_noise,
                                 Eigen::Matrix<double, N, N>& process_noise,
                                 double gamma_step) {
  using MatNN = Eigen::Matrix<double, N, N>;
  using MatMM = Eigen::Matrix<double, M, M>;
  using MatNM = Eigen::Matrix<double, N, M>;

  const MatNN P_pred = P;
  const MatMM S = (H * P_pred * H.transpose() + obs_noise).eval();

  Eigen::LDLT<MatMM> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw FilterDivergence("innovation covariance is not positive definite");
  }

  // K = P H^T S^{-1}, via K^T = S^{-1} (H P).
  const MatNM K = ldlt.solve((H * P_pred).eval()).transpose();

  KalmanUpdate<N, M> out;
  out.innovation = obs_diff(z, obs_map(mean));
  out.innovation_cov = S;
  out.gain = K;

  mean += K * out.innovation;

  const MatNN ikh = MatNN::Identity() - K * H;
  P = (ikh * P_pred * ikh.transpose() + K * obs_noise * K.transpose()).eval();
  symmetrize(P);

  out.residual = obs_diff(z, obs_map(mean));

  if (gamma_step < 1.0) {
    const Eigen::Matrix<double, N, 1> kd = K * out.innovation;
    process_noise = (gamma_step * process_noise +
                     (1.0 - gamma_step) * (kd * kd.transpose()))
                        .eval();
    symmetrize(process_noise);
    obs_noise = (gamma_step * obs_noise +
                 (1.0 - gamma_step) *
                     (out.residual * out.residual.transpose() +
                      H * P_pred * H.transpose()))
                    .eval();
    symmetrize(obs_noise);
  }
  return out;
}

}  // namespace firewatch
