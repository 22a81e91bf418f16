#pragma once

#include <Eigen/Dense>

#include "firewatch/fire_sim.hpp"
#include "firewatch/kalman.hpp"
#include "firewatch/rng.hpp"

namespace firewatch {

// Process state: [qx qy px py pz R U theta] — firespot position, observer
// pose, spread-model parameters. Mapping vector: [phi_x phi_y R U theta] —
// looking-vector angles plus direct parameter readings.
inline constexpr int kStateDim = 8;
inline constexpr int kObsDim = 5;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using ObsVec = Eigen::Matrix<double, kObsDim, 1>;
using ObsMat = Eigen::Matrix<double, kObsDim, kObsDim>;
using ObsJac = Eigen::Matrix<double, kObsDim, kStateDim>;

namespace idx {
inline constexpr int kQx = 0, kQy = 1, kPx = 2, kPy = 3, kPz = 4;
inline constexpr int kR = 5, kU = 6, kTheta = 7;
}  // namespace idx

// Planar UAV-spot offsets below this are replaced by a fixed +x offset of the
// same magnitude so the angle gradients stay finite directly overhead.
inline constexpr double kGeomEpsilon = 1e-6;

// Fire process map. The spot advances under the spread model and the model
// parameters persist; the observer pose is exogenous (re-injected at
// measurement time), so its image is zero — the pose rows of the Jacobian
// vanish accordingly.
StateVec process_map(const StateVec& state, double dt);
StateMat process_jacobian(const StateVec& state, double dt);

// Angle observation: phi_x = atan(pz / r), phi_y = atan(r / pz) with r the
// planar offset norm; parameter channels read through unchanged.
// `degenerate`, when non-null, reports that the overhead regularization fired.
ObsVec observation_map(const StateVec& state, bool* degenerate = nullptr);
ObsJac observation_jacobian(const StateVec& state, bool* degenerate = nullptr);

// Measurement-space difference; wraps the azimuth channel.
ObsVec observation_diff(const ObsVec& a, const ObsVec& b);

struct FilterState {
  StateVec mean = StateVec::Zero();
  StateMat P = StateMat::Identity();
  StateMat process_noise = 1e-3 * StateMat::Identity();  // Lambda
  ObsMat obs_noise = 1e-2 * ObsMat::Identity();          // Gamma
  ObsMat innovation_cov = ObsMat::Zero();                // S at the last update
  double gamma_step = 0.95;
};

struct FilterInit {
  Eigen::Matrix<double, kStateDim, 1> p0_diag =
      Eigen::Matrix<double, kStateDim, 1>::Ones();
  double lambda0 = 1e-3;
  double gamma0 = 1e-2;
  double gamma_step = 0.95;
};

// New track for a detected spot. params_prior carries the initial (R, U,
// theta) belief; observer_pose seeds the pose channels and the stored
// innovation covariance.
FilterState make_filter(const Vec2& spot_pos, const Eigen::Vector3d& observer_pose,
                        const Eigen::Vector3d& params_prior, const FilterInit& init);

// Eq.-style prediction: mean through the process map (pose latched),
// P <- F P F^T + Lambda.
void predict(FilterState& fs, double dt);

// Noisy observation of a true spot from a true pose. noise_std are the
// per-channel measurement std-devs; parameter channels read the true env.
ObsVec measure(const Eigen::Vector3d& uav_pose, const Vec2& spot_pos,
               const EnvParams& env, const ObsVec& noise_std, RngStream& rng);

// Adaptive measurement update. Re-seeds the pose channels from
// observer_pose, runs the Joseph-form update, applies the innovation/residual
// noise adaptation, and stores the innovation covariance for URR use.
// Throws FilterDivergence when the innovation covariance is singular.
void update(FilterState& fs, const ObsVec& z, const Eigen::Vector3d& observer_pose);

// Emulated revisit: applies k prediction steps with adaptation frozen and the
// observer held at the same relative offset from the spot, then evaluates the
// innovation covariance at the end state. Does not mutate fs.
ObsMat project_residual(const FilterState& fs, int k);

}  // namespace firewatch
