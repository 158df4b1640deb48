// SPDX-License-Identifier: Apache-2.0
//
// UPA steering vectors, reflect-array factors and power patterns.
//
// Conventions used everywhere in this library:
//  * Vectors over a UPA are laid out x-outer / y-inner, matching the
//    Kronecker product q(u) (x axis) with p(v) (y axis).
//  * The geometric-channel steering vector a(theta, phi) is 0-based with
//    positive phase exponents, entries (1/sqrt(M)) e^{j (2 pi d / lambda)
//    (ix*u + iy*v)}.
//  * Reflect-array element offsets are the N symmetric half-integer offsets
//    m~ = m - (N-1)/2; the printed -N/2..N/2 bounds would double-count the
//    element grid.

#pragma once

#include "rismm/types.hpp"

#include <vector>

namespace rismm {

/// Centered element offset for index i of n: i - (n-1)/2.
inline double element_offset(int i, int n) { return double(i) - 0.5 * double(n - 1); }

/// Array response vector of the UPA, q(sin(th)cos(ph)) (x) p(sin(th)sin(ph))
/// scaled by 1/sqrt(M). Unit l2 norm for every input.
CVec steering_vector(const UpaGeometry& geom, const AnglePair& angle);

/// Partial derivatives of steering_vector with respect to elevation and
/// azimuth, used by the tracking Jacobian.
struct SteeringDerivs {
    CVec d_elevation;
    CVec d_azimuth;
};
SteeringDerivs steering_vector_derivs(const UpaGeometry& geom, const AnglePair& angle);

/// Reflect-array factor: sum over the centered element grid of
/// weights * e^{j (2 pi / lambda) d (m~ Gx + n~ Gy)} with
/// Gx = sin(th_t)cos(ph_t) + sin(th_r)cos(ph_r) and Gy analogous.
/// |AF| <= sum |weights|, i.e. <= M for unit-modulus weights.
cxd array_factor(const CVec& weights, const UpaGeometry& geom,
                 const AnglePair& incident, const AnglePair& reflected);

/// |AF|^2 per grid point. Throws on an empty grid.
std::vector<double> power_pattern(const CVec& weights, const UpaGeometry& geom,
                                  const AnglePair& incident,
                                  const std::vector<AnglePair>& grid);

/// Regular elevation x azimuth grid (row-major, elevation outer) covering
/// [0, pi/2] x [0, 2 pi].
std::vector<AnglePair> make_angle_grid(int n_elevation, int n_azimuth);

/// Index of the largest entry of a power pattern.
std::size_t argmax_index(const std::vector<double>& values);

/// Angle between the unit direction vectors of two AnglePairs (radians).
double angular_distance(const AnglePair& a, const AnglePair& b);

} // namespace rismm
