// SPDX-License-Identifier: Apache-2.0
//
// Sparse geometric channels for the BS-RIS and RIS-UE links, the RIS
// free-space path-loss model and effective-channel assembly.

#pragma once

#include "rismm/arrays.hpp"
#include "rismm/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rismm {

class RisConfiguration;

struct PathComponent {
    cxd gain;
    AnglePair departure; // at the tx array
    AnglePair arrival;   // at the rx array
};

/// One draw of a geometric channel: L paths plus the assembled rx_M x tx_M
/// matrix  sum_l z_l a_rx(arrival_l) a_tx(departure_l)^H.
struct ChannelRealization {
    std::vector<PathComponent> paths;
    UpaGeometry tx_geom;
    UpaGeometry rx_geom;
    CMat matrix;

    int tx_size() const { return tx_geom.size(); }
    int rx_size() const { return rx_geom.size(); }
};

/// Assemble the channel matrix from its path list.
CMat assemble_channel_matrix(const std::vector<PathComponent>& paths,
                             const UpaGeometry& tx_geom, const UpaGeometry& rx_geom);

/// How path gains and angles are drawn. Defaults: complex circular Gaussian
/// gains with per-path variance 1/L (geometry-normalized Frobenius energy),
/// elevations uniform in [0, pi/2], azimuths uniform in [0, 2 pi).
struct ChannelLaw {
    std::optional<double> gain_variance;  // per path; default 1/L
    // When set, path 1 is a fixed line-of-sight component: given angles,
    // unit-magnitude gain with uniform random phase. Remaining paths draw
    // from nlos_gain_variance (or gain_variance when unset).
    std::optional<AnglePair> los_arrival;
    std::optional<AnglePair> los_departure;
    std::optional<double> nlos_gain_variance;
};

ChannelRealization sample_channel(Rng& rng, int n_paths, const UpaGeometry& tx_geom,
                                  const UpaGeometry& rx_geom, const ChannelLaw& law = {});

/// Build a deterministic single-path unit-gain realization (used for the
/// known fixed BS-RIS deployment geometry).
ChannelRealization single_path_channel(const UpaGeometry& tx_geom, const UpaGeometry& rx_geom,
                                       const AnglePair& departure, const AnglePair& arrival,
                                       cxd gain = cxd(1.0, 0.0));

/// Inputs of the RIS free-space path-loss model.
struct PathLossParams {
    double g_tx = 1.0;   // transmitter antenna gain (linear)
    double g_rx = 1.0;   // receiver antenna gain (linear)
    double g_ris = 1.0;  // RIS gain (linear)
    int n_ris = 1;       // elements per side
    double d_x = 0.5;    // element pitch, meters
    double wavelength = 1.0;
    // Normalized power radiation pattern, bounded by 1. The model never pins
    // this down; default is cos(elevation) clipped at zero.
    std::function<double(const AnglePair&)> radiation_pattern;
    double reflection_gain = 1.0; // gamma in [0, 1]
    double d_g = 1.0;             // BS-RIS distance, meters
    double d_h = 1.0;             // RIS-UE distance, meters
    double delta1 = 0.0;          // phase-gradient terms of the active configuration
    double delta2 = 0.0;

    double pattern(const AnglePair& a) const {
        if (radiation_pattern) return radiation_pattern(a);
        return std::max(0.0, std::cos(a.elevation));
    }
    void validate() const;
};

/// Peak path loss: G_t G_r G N^4 d_x^2 lambda^2 F(t) F(r) gamma^2
/// / (64 pi^3 d_g^2 d_h^2).
double path_loss_max(const PathLossParams& p, const AnglePair& incident = {},
                     const AnglePair& reflected = {});

/// Full directional path loss: path_loss_max times the squared product of the
/// two normalized Dirichlet-kernel (sinc-ratio) factors. The 0/0 sinc ratios
/// at the beam peak evaluate to their limits.
double path_loss_general(const PathLossParams& p, const AnglePair& incident,
                         const AnglePair& reflected);

/// Fit (delta1, delta2) of the active configuration phases against the
/// centered element offsets: least squares on
/// delta1 * m~ * d_x + delta2 * n~ * d_y = lambda * phase / (2 pi).
std::pair<double, double> fit_phase_gradients(const CMat& phase_matrix, double d_x,
                                              double d_y, double wavelength);

/// beta * H * Theta * G, dimensions M_UE x M_BS.
CMat effective_channel(const ChannelRealization& h, const RisConfiguration& theta,
                       const ChannelRealization& g, double beta);
CMat effective_channel(const ChannelRealization& h, const CMat& theta,
                       const ChannelRealization& g, double beta);

/// Structured-text serialization of a realization (regression fixtures):
/// one line per path with gain-real, gain-imag and the four angles.
std::string channel_to_text(const ChannelRealization& c);
ChannelRealization channel_from_text(const std::string& text);

} // namespace rismm
