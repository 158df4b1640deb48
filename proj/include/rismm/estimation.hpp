// SPDX-License-Identifier: Apache-2.0
//
// Pilot-based iterative reweighted estimation of the RIS-UE path gains, and
// the NMSE metric.

#pragma once

#include "rismm/types.hpp"

#include <vector>

namespace rismm {

/// Known pilot block. X holds the designed pilot vectors x_p = Theta * G-hat
/// * F * s_p as columns (M_RIS x U_p); Q is the UE combiner (M_UE x U, unit
/// norm columns); Y collects the combined observations (U x U_p), filled by
/// simulate_reception under the generative model Y = Q^H H X + Q^H N.
struct PilotBlock {
    CMat X;
    CMat Q;
    CMat Y;
    int U = 0;
    int U_p = 0;
    bool underdetermined = false; // U_p < L_h
};

/// Build the deterministic pilot block (X and Q; Y left empty).
PilotBlock build_pilots(const CMat& theta, const CMat& g_hat, const CVec& precoder,
                        const CVec& symbols, const CMat& combiner, int n_pilots,
                        int n_paths_expected = 1);

/// Fill Y from a ground-truth channel (scaled by beta) plus per-antenna
/// complex Gaussian noise of variance sigma2.
void simulate_reception(PilotBlock& block, const CMat& h_true, double beta, double sigma2,
                        Rng& rng);

/// Mean received pilot power per UE antenna per slot, pre combining. This is
/// the SNR reference plane: sigma2 = reference_power / snr_linear.
double mean_received_power(const CMat& h, double beta, const CMat& X);

/// Per-pilot linear maps T_p with y_p = T_p z + noise, given the (estimated)
/// path angles on both sides. T_p = beta * Q^H A_UE diag(A_RIS^H x_p).
std::vector<CMat> pilot_maps(const PilotBlock& block, const UpaGeometry& ue_geom,
                             const UpaGeometry& ris_geom,
                             const std::vector<AnglePair>& ue_angles,
                             const std::vector<AnglePair>& ris_angles, double beta = 1.0);

struct ReweightConfig {
    double delta = 1e-6;    // weight floor, keeps log arguments positive
    double epsilon = 1e-8;  // residual stop tolerance
    int max_iter = 20;
    bool adaptive_zeta = true;
    double zeta_fixed = 1.0;
    double zeta_c = 1.0;       // adaptive: zeta = c / min(residual^2, zeta_floor)
    double zeta_floor = 1e-10;
};

struct ReweightState {
    CVec z_hat;
    RVec d_diag; // D entries 1 / (|z_l|^2 + delta)
    double zeta = 1.0;
    double delta = 1e-6;
    int iteration = 0;
    double residual = 0.0;
};

/// Closed-form minimizer of the iteration-i surrogate:
/// z = (zeta^-1 D + sum T_p^H T_p)^-1 (sum T_p^H y_p).
CVec reweight_step(const ReweightState& state, const std::vector<CMat>& t_list,
                   const std::vector<CVec>& y_list);

/// Surrogate objective value at z for fixed (D, zeta) of `state`.
double surrogate_value(const ReweightState& state, const CVec& z,
                       const std::vector<CMat>& t_list, const std::vector<CVec>& y_list);

struct EstimationTraceRow {
    int iteration;
    double residual;
    double zeta;
};

struct HEstimate {
    CVec z_hat;
    std::vector<AnglePair> ue_angles;
    std::vector<AnglePair> ris_angles;
    CMat matrix; // assembled A_UE diag(z) A_RIS^H
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::vector<EstimationTraceRow> trace;
};

/// Iterate reweight_step with D recomputed from the current z until the
/// residual drops below epsilon or max_iter; returns the assembled channel.
/// The first iterate is the plain least-squares solution; an iteration is
/// accepted only if it does not increase the residual.
HEstimate estimate_h(const PilotBlock& pilots, const UpaGeometry& ue_geom,
                     const UpaGeometry& ris_geom, const std::vector<AnglePair>& ue_angles,
                     const std::vector<AnglePair>& ris_angles, const ReweightConfig& cfg = {},
                     double beta = 1.0);

CMat assemble_sparse_channel(const UpaGeometry& ue_geom, const UpaGeometry& ris_geom,
                             const std::vector<AnglePair>& ue_angles,
                             const std::vector<AnglePair>& ris_angles, const CVec& z);

/// ||est - truth||_F^2 / ||truth||_F^2. Throws on zero-norm truth.
double nmse(const CMat& h_est, const CMat& h_true);

} // namespace rismm
