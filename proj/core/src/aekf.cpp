#include "firewatch/aekf.hpp"

#include <cmath>

namespace firewatch {

namespace {

struct PlanarOffset {
  Vec2 d;
  double r;
  bool regularized;
};

PlanarOffset planar_offset(const StateVec& s) {
  Vec2 d(s[idx::kQx] - s[idx::kPx], s[idx::kQy] - s[idx::kPy]);
  double r = d.norm();
  if (r < kGeomEpsilon) {
    return {Vec2(kGeomEpsilon, 0.0), kGeomEpsilon, true};
  }
  return {d, r, false};
}

}  // namespace

StateVec process_map(const StateVec& state, double dt) {
  const double c = spread_speed(state[idx::kR], state[idx::kU]);
  const double theta = state[idx::kTheta];
  StateVec out = StateVec::Zero();
  out[idx::kQx] = state[idx::kQx] + c * std::sin(theta) * dt;
  out[idx::kQy] = state[idx::kQy] + c * std::cos(theta) * dt;
  out[idx::kR] = state[idx::kR];
  out[idx::kU] = state[idx::kU];
  out[idx::kTheta] = state[idx::kTheta];
  return out;
}

StateMat process_jacobian(const StateVec& state, double dt) {
  const double rate = state[idx::kR];
  const double wind = state[idx::kU];
  const double theta = state[idx::kTheta];
  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);
  const double c = spread_speed(rate, wind);
  const double dc_dr = spread_speed_rate_slope(wind);
  const double dc_du = spread_speed_wind_slope(rate, wind);

  StateMat F = StateMat::Zero();
  F(idx::kQx, idx::kQx) = 1.0;
  F(idx::kQy, idx::kQy) = 1.0;
  F(idx::kR, idx::kR) = 1.0;
  F(idx::kU, idx::kU) = 1.0;
  F(idx::kTheta, idx::kTheta) = 1.0;

  F(idx::kQx, idx::kR) = dc_dr * sin_t * dt;
  F(idx::kQx, idx::kU) = dc_du * sin_t * dt;
  F(idx::kQx, idx::kTheta) = c * cos_t * dt;
  F(idx::kQy, idx::kR) = dc_dr * cos_t * dt;
  F(idx::kQy, idx::kU) = dc_du * cos_t * dt;
  F(idx::kQy, idx::kTheta) = -c * sin_t * dt;
  // Pose rows stay zero: the fire process does not drive the observer.
  return F;
}

ObsVec observation_map(const StateVec& state, bool* degenerate) {
  const PlanarOffset off = planar_offset(state);
  if (degenerate) *degenerate = off.regularized;
  const double pz = state[idx::kPz];
  ObsVec out;
  out << std::atan(pz / off.r), std::atan(off.r / pz), state[idx::kR],
      state[idx::kU], state[idx::kTheta];
  return out;
}

ObsJac observation_jacobian(const StateVec& state, bool* degenerate) {
  const PlanarOffset off = planar_offset(state);
  if (degenerate) *degenerate = off.regularized;
  const double pz = state[idx::kPz];
  const double r = off.r;
  const double denom = r * r + pz * pz;

  ObsJac H = ObsJac::Zero();
  // phi_x = atan(pz / r)
  H(0, idx::kQx) = -pz * off.d.x() / (r * denom);
  H(0, idx::kQy) = -pz * off.d.y() / (r * denom);
  H(0, idx::kPx) = pz * off.d.x() / (r * denom);
  H(0, idx::kPy) = pz * off.d.y() / (r * denom);
  H(0, idx::kPz) = r / denom;
  // phi_y = atan(r / pz)
  H(1, idx::kQx) = pz * off.d.x() / (r * denom);
  H(1, idx::kQy) = pz * off.d.y() / (r * denom);
  H(1, idx::kPx) = -pz * off.d.x() / (r * denom);
  H(1, idx::kPy) = -pz * off.d.y() / (r * denom);
  H(1, idx::kPz) = -r / denom;
  // Parameter channels are read directly.
  H(2, idx::kR) = 1.0;
  H(3, idx::kU) = 1.0;
  H(4, idx::kTheta) = 1.0;
  return H;
}

ObsVec observation_diff(const ObsVec& a, const ObsVec& b) {
  ObsVec d = a - b;
  d[4] = wrap_signed(d[4]);
  return d;
}

FilterState make_filter(const Vec2& spot_pos, const Eigen::Vector3d& observer_pose,
                        const Eigen::Vector3d& params_prior, const FilterInit& init) {
  FilterState fs;
  fs.mean[idx::kQx] = spot_pos.x();
  fs.mean[idx::kQy] = spot_pos.y();
  fs.mean.segment<3>(idx::kPx) = observer_pose;
  fs.mean[idx::kR] = params_prior[0];
  fs.mean[idx::kU] = params_prior[1];
  fs.mean[idx::kTheta] = wrap_angle(params_prior[2]);
  fs.P = init.p0_diag.asDiagonal();
  fs.process_noise = init.lambda0 * StateMat::Identity();
  fs.obs_noise = init.gamma0 * ObsMat::Identity();
  fs.gamma_step = init.gamma_step;
  const ObsJac H = observation_jacobian(fs.mean);
  fs.innovation_cov = H * fs.P * H.transpose() + fs.obs_noise;
  return fs;
}

void predict(FilterState& fs, double dt) {
  const StateMat F = process_jacobian(fs.mean, dt);
  StateVec next = process_map(fs.mean, dt);
  next.segment<3>(idx::kPx) = fs.mean.segment<3>(idx::kPx);  // pose is exogenous
  next[idx::kTheta] = wrap_angle(next[idx::kTheta]);
  fs.mean = next;
  kalman_predict_cov<kStateDim>(fs.P, F, fs.process_noise);
}

ObsVec measure(const Eigen::Vector3d& uav_pose, const Vec2& spot_pos,
               const EnvParams& env, const ObsVec& noise_std, RngStream& rng) {
  Vec2 d = spot_pos - uav_pose.head<2>();
  double r = d.norm();
  if (r < kGeomEpsilon) r = kGeomEpsilon;
  const double pz = uav_pose.z();
  ObsVec z;
  z << std::atan(pz / r) + noise_std[0] * rng.normal(),
      std::atan(r / pz) + noise_std[1] * rng.normal(),
      env.rate + noise_std[2] * rng.normal(),
      env.wind_speed + noise_std[3] * rng.normal(),
      wrap_angle(env.wind_azimuth + noise_std[4] * rng.normal());
  return z;
}

void update(FilterState& fs, const ObsVec& z, const Eigen::Vector3d& observer_pose) {
  fs.mean.segment<3>(idx::kPx) = observer_pose;
  const ObsJac H = observation_jacobian(fs.mean);
  const KalmanUpdate<kStateDim, kObsDim> step = kalman_update<kStateDim, kObsDim>(
      fs.mean, fs.P, H, [](const StateVec& m) { return observation_map(m); },
      observation_diff, z, fs.obs_noise, fs.process_noise, fs.gamma_step);
  fs.mean[idx::kTheta] = wrap_angle(fs.mean[idx::kTheta]);
  fs.innovation_cov = step.innovation_cov;
}

ObsMat project_residual(const FilterState& fs, int k) {
  FilterState emu = fs;
  const Eigen::Vector3d rel =
      emu.mean.segment<3>(idx::kPx) -
      Eigen::Vector3d(emu.mean[idx::kQx], emu.mean[idx::kQy], 0.0);
  for (int i = 0; i < k; ++i) {
    const StateMat F = process_jacobian(emu.mean, 1.0);
    StateVec next = process_map(emu.mean, 1.0);
    // The emulated observer revisits from the same relative position.
    next.segment<3>(idx::kPx) =
        Eigen::Vector3d(next[idx::kQx], next[idx::kQy], 0.0) + rel;
    next[idx::kTheta] = wrap_angle(next[idx::kTheta]);
    emu.mean = next;
    kalman_predict_cov<kStateDim>(emu.P, F, emu.process_noise);
  }
  const ObsJac H = observation_jacobian(emu.mean);
  ObsMat S = H * emu.P * H.transpose() + emu.obs_noise;
  symmetrize(S);
  return S;
}

}  // namespace firewatch
