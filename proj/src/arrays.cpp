// SPDX-License-Identifier: Apache-2.0

#include "rismm/arrays.hpp"

#include <cmath>

namespace rismm {

CVec steering_vector(const UpaGeometry& geom, const AnglePair& angle) {
    geom.validate();
    if (!angle_valid(angle))
        throw std::invalid_argument("steering_vector: invalid angle");

    const double k = 2.0 * kPi * geom.spacing / geom.wavelength;
    const double u = angle.u();
    const double v = angle.v();
    const int m = geom.size();
    const double scale = 1.0 / std::sqrt(double(m));

    CVec out(m);
    for (int ix = 0; ix < geom.n_x; ++ix) {
        const double px = k * double(ix) * u;
        for (int iy = 0; iy < geom.n_y; ++iy) {
            const double py = k * double(iy) * v;
            out[ix * geom.n_y + iy] = std::polar(scale, px + py);
        }
    }
    return out;
}

SteeringDerivs steering_vector_derivs(const UpaGeometry& geom, const AnglePair& angle) {
    const double k = 2.0 * kPi * geom.spacing / geom.wavelength;
    const double se = std::sin(angle.elevation), ce = std::cos(angle.elevation);
    const double sa = std::sin(angle.azimuth), ca = std::cos(angle.azimuth);
    // u = se*ca, v = se*sa
    const double du_del = ce * ca, dv_del = ce * sa;
    const double du_daz = -se * sa, dv_daz = se * ca;

    const CVec a = steering_vector(geom, angle);
    SteeringDerivs d;
    d.d_elevation.resize(a.size());
    d.d_azimuth.resize(a.size());
    for (int ix = 0; ix < geom.n_x; ++ix) {
        for (int iy = 0; iy < geom.n_y; ++iy) {
            const int idx = ix * geom.n_y + iy;
            const cxd jphase(0.0, k);
            d.d_elevation[idx] = a[idx] * jphase * (double(ix) * du_del + double(iy) * dv_del);
            d.d_azimuth[idx] = a[idx] * jphase * (double(ix) * du_daz + double(iy) * dv_daz);
        }
    }
    return d;
}

cxd array_factor(const CVec& weights, const UpaGeometry& geom,
                 const AnglePair& incident, const AnglePair& reflected) {
    geom.validate();
    if (weights.size() != geom.size())
        throw std::invalid_argument("array_factor: weights length does not match grid size");

    const double k = 2.0 * kPi / geom.wavelength;
    const double gx = incident.u() + reflected.u();
    const double gy = incident.v() + reflected.v();
    const double ax = k * geom.spacing * gx;
    const double ay = k * geom.spacing * gy;

    cxd sum(0.0, 0.0);
    for (int ix = 0; ix < geom.n_x; ++ix) {
        const double phx = ax * element_offset(ix, geom.n_x);
        for (int iy = 0; iy < geom.n_y; ++iy) {
            const double phy = ay * element_offset(iy, geom.n_y);
            sum += weights[ix * geom.n_y + iy] * std::polar(1.0, phx + phy);
        }
    }
    return sum;
}

std::vector<double> power_pattern(const CVec& weights, const UpaGeometry& geom,
                                  const AnglePair& incident,
                                  const std::vector<AnglePair>& grid) {
    if (grid.empty())
        throw std::invalid_argument("power_pattern: empty grid");

    // Separable evaluation: AF = ax^T W ay with W the n_x by n_y weight grid,
    // so a full pattern costs O(|grid| * (n_x*n_y add)) but with vectorizable
    // inner products instead of per-point polar calls on every element.
    const double k = 2.0 * kPi / geom.wavelength;
    Eigen::Map<const Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
        weights.data(), geom.n_x, geom.n_y);

    std::vector<double> out(grid.size());
    CVec ax(geom.n_x), ay(geom.n_y);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double gx = incident.u() + grid[g].u();
        const double gy = incident.v() + grid[g].v();
        for (int ix = 0; ix < geom.n_x; ++ix)
            ax[ix] = std::polar(1.0, k * geom.spacing * gx * element_offset(ix, geom.n_x));
        for (int iy = 0; iy < geom.n_y; ++iy)
            ay[iy] = std::polar(1.0, k * geom.spacing * gy * element_offset(iy, geom.n_y));
        const cxd af = ax.transpose() * (w * ay);
        out[g] = std::norm(af);
    }
    return out;
}

std::vector<AnglePair> make_angle_grid(int n_elevation, int n_azimuth) {
    std::vector<AnglePair> grid;
    grid.reserve(std::size_t(n_elevation) * std::size_t(n_azimuth));
    for (int ie = 0; ie < n_elevation; ++ie) {
        const double el = (kPi / 2.0) * double(ie) / double(n_elevation - 1);
        for (int ia = 0; ia < n_azimuth; ++ia) {
            const double az = 2.0 * kPi * double(ia) / double(n_azimuth - 1);
            grid.push_back(AnglePair{el, std::min(az, 2.0 * kPi - 1e-12)});
        }
    }
    return grid;
}

std::size_t argmax_index(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

double angular_distance(const AnglePair& a, const AnglePair& b) {
    const double ax = a.u(), ay = a.v(), az = std::cos(a.elevation);
    const double bx = b.u(), by = b.v(), bz = std::cos(b.elevation);
    double dot = ax * bx + ay * by + az * bz;
    dot = std::max(-1.0, std::min(1.0, dot));
    return std::acos(dot);
}

} // namespace rismm
