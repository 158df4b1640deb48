// SPDX-License-Identifier: Apache-2.0
//
// RIS phase-matrix construction: directional reflect-array design, its
// Kronecker (steering-vector) form, G-estimation from the beam shift, and
// the compensating Theta design.
//
// Two phase conventions coexist and are both exposed:
//  * reflection(...) carries the reflect-array design (negative exponent);
//    it maximizes the array factor / path loss toward the desired direction
//    and is what phases_for_direction returns.
//  * link_steering(...) is its conjugate-form counterpart that makes the
//    matrix channel model H * Theta * G combine coherently toward the
//    desired direction (H contributes the RIS-side factor as A^H).
// The two agree for broadside incidence up to conjugation.

#pragma once

#include "rismm/channel.hpp"
#include "rismm/types.hpp"

#include <optional>
#include <string>

namespace rismm {

enum class RisProvenance { directional, codeword, g_compensated };

/// The RIS configuration: per-element reflection coefficients phi (N x N,
/// rows = y index, cols = x index) and the matrix Theta applied inside the
/// channel model. For directional/codeword provenance Theta = diag(vec(phi))
/// with unit-modulus entries; g-compensated configurations carry a general
/// (non-diagonal, non-unit-modulus) matrix.
class RisConfiguration {
  public:
    static RisConfiguration from_phase_matrix(const CMat& phi, RisProvenance prov);
    /// diag(weights) for a vectorized codeword (x-outer ordering).
    static RisConfiguration from_codeword(const CVec& weights, int n_x, int n_y);
    static RisConfiguration from_full_matrix(const CMat& theta, RisProvenance prov);

    const CMat& phi() const { return phi_; }
    const CMat& theta() const { return theta_; }
    bool diagonal() const { return diagonal_; }
    RisProvenance provenance() const { return provenance_; }

    /// vec(phi) in x-outer / y-inner order (only for diagonal configurations).
    CVec vec_phi() const;

    /// Inverse of a diagonal unit-modulus configuration.
    CMat inverse_theta() const;

    /// Stored (delta1, delta2) phase gradients for directional builds; used
    /// by the path-loss model so the gradients are exact instead of re-fitted.
    std::optional<std::pair<double, double>> phase_gradients() const { return gradients_; }

    /// Plain-text N x N grid of phase values in radians.
    std::string phase_grid_text() const;

  private:
    CMat phi_;   // N_y x N_x reflection coefficients (empty for full-matrix builds)
    CMat theta_; // M x M
    bool diagonal_ = true;
    RisProvenance provenance_ = RisProvenance::directional;
    std::optional<std::pair<double, double>> gradients_;
    friend RisConfiguration phases_for_direction(const UpaGeometry&, const AnglePair&,
                                                 const AnglePair&);
    friend RisConfiguration link_steering(const UpaGeometry&, const AnglePair&,
                                          const AnglePair&);
};

/// Reflect-array design: phase of element (m~, n~) is
/// -(2 pi / lambda) d [Gamma_x m~ + Gamma_y n~] mod 2 pi with
/// Gamma_x = sin(th_t)cos(ph_t) + sin(th_des)cos(ph_des), Gamma_y analogous.
RisConfiguration phases_for_direction(const UpaGeometry& geom, const AnglePair& incident,
                                      const AnglePair& desired);

/// vec(phi) of the same design as the Kronecker product of the per-axis
/// steering factors Lambda_x (x) Lambda_y.
CVec kron_steering(const UpaGeometry& geom, const AnglePair& incident,
                   const AnglePair& desired);

/// Conjugate-form configuration that steers H * Theta * G toward `desired`
/// for a wave arriving from `incident`.
RisConfiguration link_steering(const UpaGeometry& geom, const AnglePair& incident,
                               const AnglePair& desired);

struct GEstimate {
    CMat matrix;     // M_RIS x M_BS
    bool phase_only; // |z_g| folded into H
};

/// G-hat = (Theta_last)^-1 * Theta(ue_angles) * G_opt. `theta_last` is the
/// final configuration applied during beam search; `g_opt` is the known
/// fixed-deployment realization. The incident direction of the deployment
/// defaults to broadside.
GEstimate estimate_g(const RisConfiguration& theta_last, const AnglePair& ue_angles,
                     const ChannelRealization& g_opt, const AnglePair& incident = {});

/// Raised when the compensation identity is unattainable for the given G-hat.
struct SingularGEstimate : std::runtime_error {
    double condition_estimate;
    explicit SingularGEstimate(const std::string& what, double cond)
        : std::runtime_error(what), condition_estimate(cond) {}
};

/// Theta = Theta(desired) * G_opt * pinv(G-hat). Identical to the normal
/// equation form Theta(des) G_opt G^H (G G^H)^-1 when G-hat has full row
/// rank; for rank-deficient G-hat it returns the minimum-norm matrix that
/// still satisfies Theta * G-hat = Theta(desired) * G_opt whenever that
/// identity is attainable, and throws SingularGEstimate otherwise.
/// The AnglePair overload builds Theta(desired) in the link-steering
/// convention (the channel-model pipeline); pass an explicit configuration
/// (e.g. phases_for_direction) to target the reflect-array convention.
RisConfiguration design_theta(const GEstimate& g_hat, const ChannelRealization& g_opt,
                              const AnglePair& desired, double max_condition = 1e12);
RisConfiguration design_theta(const GEstimate& g_hat, const ChannelRealization& g_opt,
                              const RisConfiguration& theta_desired,
                              double max_condition = 1e12);

/// Physical-RIS projection of a compensated configuration: unit-modulus
/// phases of the diagonal. Returns the projected configuration and reports
/// the received-amplitude loss (dB) along the desired direction relative to
/// the exact matrix.
std::pair<RisConfiguration, double> project_to_phases(const RisConfiguration& exact,
                                                      const GEstimate& g_hat,
                                                      const ChannelRealization& g_opt,
                                                      const AnglePair& desired);

} // namespace rismm
