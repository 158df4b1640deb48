// SPDX-License-Identifier: Apache-2.0
//
// EKF tracking of the RIS-UE channel parameters (complex gain plus four
// angles), with re-estimation triggering against the half-power beamwidth.

#pragma once

#include "rismm/estimation.hpp"
#include "rismm/types.hpp"

#include <functional>
#include <vector>

namespace rismm {

/// Tracked state: [z_re, z_im, theta_R, phi_R, theta_U, phi_U].
struct EkfState {
    Eigen::Matrix<double, 6, 1> x = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Matrix<double, 6, 6> P = Eigen::Matrix<double, 6, 6>::Identity();
    int time_index = 0;

    AnglePair ris_angles() const { return AnglePair{x[2], x[3]}; }
    AnglePair ue_angles() const { return AnglePair{x[4], x[5]}; }
    cxd gain() const { return cxd(x[0], x[1]); }
};

/// Gauss-Markov gain evolution plus Gaussian angle process noise.
struct EvolutionModel {
    double rho = 0.995;             // gain memory, 0 < rho <= 1
    double q_gain = 1e-4;           // process variance per gain component
    double q_angle = 7.6e-5;        // process variance per angle, (0.5 deg)^2
    double r_meas = 1e-2;           // measurement-noise variance per complex obs
};

/// Everything frozen during a tracking segment. The BS-RIS side is fixed.
struct MeasurementContext {
    double beta = 1.0;
    CMat Q;       // UE combiner, M_UE x U
    CMat Theta;   // RIS configuration in effect
    CMat G_hat;   // estimated BS-RIS channel
    CVec f;       // BS precoder (single RF chain)
    UpaGeometry ue_geom;
    UpaGeometry ris_geom;
};

/// g(x) = beta * Q^H * H(x) * Theta * G_hat * f with H(x) the single-path
/// channel rebuilt from the state.
CVec measurement_fn(const EkfState& state, const MeasurementContext& ctx);

/// Jacobian of the stacked (Re, Im) observation with respect to the state.
RMat measurement_jacobian(const EkfState& state, const MeasurementContext& ctx);

/// Stack a complex observation into (Re; Im).
RVec stack_reim(const CVec& v);

EkfState ekf_predict(const EkfState& state, const EvolutionModel& model);

struct UpdateInfo {
    EkfState state;
    double nis = 0.0; // normalized innovation squared
};
UpdateInfo ekf_update(const EkfState& state, const CVec& observation,
                      const MeasurementContext& ctx, const EvolutionModel& model);

/// Delta-theta_3dB ~= 0.886 * lambda / (sqrt(M) * d).
double half_power_beamwidth(const UpaGeometry& geom);

struct TrackStep {
    int t = 0;
    Eigen::Matrix<double, 6, 1> estimate;
    Eigen::Matrix<double, 6, 1> truth;
    Eigen::Matrix<double, 6, 1> sq_error;
    double nis = 0.0;
    bool reestimated = false;
};

struct TrackTrace {
    std::vector<TrackStep> steps;
    std::vector<int> reestimation_events;
};

struct TrackOptions {
    // Re-beam when the tracked angles drift this far from the beam center
    // (defaults to half the half-power beamwidth, set by the caller), or when
    // the normalized innovation exceeds the chi-square threshold for two
    // consecutive steps.
    double angle_drift_limit = 0.0;
    double nis_threshold = 0.0; // 0 -> chi2 99th percentile for 2U dof
    int min_steps_between_events = 5;
};

/// Run predict/update along a trajectory of true states. `observe` yields
/// the noisy observation of the true state at step t (through the frozen
/// context); `reestimate` is invoked on a re-estimation event with the
/// current filter state and returns the refreshed one (it may re-steer the
/// context upstream).
TrackTrace track_segment(const EkfState& initial,
                         const std::vector<Eigen::Matrix<double, 6, 1>>& trajectory,
                         const EvolutionModel& model, const MeasurementContext& ctx,
                         const std::function<CVec(int, const EkfState&)>& observe,
                         const std::function<EkfState(int, const EkfState&)>& reestimate,
                         const TrackOptions& opts);

} // namespace rismm
