// SPDX-License-Identifier: Apache-2.0

#include "rismm/ris_control.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rismm {

namespace {

double wrap_2pi(double x) {
    double y = std::fmod(x, 2.0 * kPi);
    if (y < 0.0) y += 2.0 * kPi;
    return y;
}

std::pair<double, double> gamma_terms(const AnglePair& incident, const AnglePair& desired) {
    return {incident.u() + desired.u(), incident.v() + desired.v()};
}

} // namespace

RisConfiguration RisConfiguration::from_phase_matrix(const CMat& phi, RisProvenance prov) {
    RisConfiguration c;
    c.phi_ = phi;
    c.provenance_ = prov;
    c.diagonal_ = true;
    const int ny = int(phi.rows()), nx = int(phi.cols());
    CVec v(nx * ny);
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy) v[ix * ny + iy] = phi(iy, ix);
    c.theta_ = v.asDiagonal();
    return c;
}

RisConfiguration RisConfiguration::from_codeword(const CVec& weights, int n_x, int n_y) {
    if (weights.size() != n_x * n_y)
        throw std::invalid_argument("RisConfiguration: codeword length mismatch");
    CMat phi(n_y, n_x);
    for (int ix = 0; ix < n_x; ++ix)
        for (int iy = 0; iy < n_y; ++iy) phi(iy, ix) = weights[ix * n_y + iy];
    auto c = from_phase_matrix(phi, RisProvenance::codeword);
    return c;
}

RisConfiguration RisConfiguration::from_full_matrix(const CMat& theta, RisProvenance prov) {
    RisConfiguration c;
    c.theta_ = theta;
    c.provenance_ = prov;
    c.diagonal_ = false;
    return c;
}

CVec RisConfiguration::vec_phi() const {
    if (!diagonal_)
        throw std::logic_error("RisConfiguration: vec_phi on a non-diagonal configuration");
    return theta_.diagonal();
}

CMat RisConfiguration::inverse_theta() const {
    if (!diagonal_)
        throw std::logic_error("RisConfiguration: inverse of a non-diagonal configuration");
    CVec d = theta_.diagonal();
    for (int i = 0; i < d.size(); ++i) {
        if (std::abs(d[i]) < 1e-12)
            throw std::runtime_error("RisConfiguration: zero diagonal entry, not invertible");
        d[i] = cxd(1.0, 0.0) / d[i];
    }
    return CMat(d.asDiagonal());
}

std::string RisConfiguration::phase_grid_text() const {
    if (!diagonal_)
        throw std::logic_error("RisConfiguration: phase grid of a non-diagonal configuration");
    std::ostringstream os;
    char buf[64];
    for (int r = 0; r < phi_.rows(); ++r) {
        for (int c = 0; c < phi_.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.12g", wrap_2pi(std::arg(phi_(r, c))));
            os << buf << (c + 1 < phi_.cols() ? " " : "");
        }
        os << '\n';
    }
    return os.str();
}

RisConfiguration phases_for_direction(const UpaGeometry& geom, const AnglePair& incident,
                                      const AnglePair& desired) {
    geom.validate();
    const auto [gx, gy] = gamma_terms(incident, desired);
    const double k = 2.0 * kPi * geom.spacing / geom.wavelength;
    CMat phi(geom.n_y, geom.n_x);
    for (int ix = 0; ix < geom.n_x; ++ix) {
        const double px = k * gx * element_offset(ix, geom.n_x);
        for (int iy = 0; iy < geom.n_y; ++iy) {
            const double py = k * gy * element_offset(iy, geom.n_y);
            phi(iy, ix) = std::polar(1.0, wrap_2pi(-(px + py)));
        }
    }
    auto c = RisConfiguration::from_phase_matrix(phi, RisProvenance::directional);
    c.gradients_ = std::make_pair(-gx, -gy);
    return c;
}

CVec kron_steering(const UpaGeometry& geom, const AnglePair& incident,
                   const AnglePair& desired) {
    geom.validate();
    const auto [gx, gy] = gamma_terms(incident, desired);
    const double k = 2.0 * kPi * geom.spacing / geom.wavelength;
    CVec lx(geom.n_x), ly(geom.n_y);
    for (int ix = 0; ix < geom.n_x; ++ix)
        lx[ix] = std::polar(1.0, -k * gx * element_offset(ix, geom.n_x));
    for (int iy = 0; iy < geom.n_y; ++iy)
        ly[iy] = std::polar(1.0, -k * gy * element_offset(iy, geom.n_y));
    CVec out(geom.size());
    for (int ix = 0; ix < geom.n_x; ++ix)
        for (int iy = 0; iy < geom.n_y; ++iy) out[ix * geom.n_y + iy] = lx[ix] * ly[iy];
    return out;
}

RisConfiguration link_steering(const UpaGeometry& geom, const AnglePair& incident,
                               const AnglePair& desired) {
    geom.validate();
    const double k = 2.0 * kPi * geom.spacing / geom.wavelength;
    CMat phi(geom.n_y, geom.n_x);
    for (int ix = 0; ix < geom.n_x; ++ix) {
        const double px = k * (desired.u() - incident.u()) * element_offset(ix, geom.n_x);
        for (int iy = 0; iy < geom.n_y; ++iy) {
            const double py = k * (desired.v() - incident.v()) * element_offset(iy, geom.n_y);
            phi(iy, ix) = std::polar(1.0, wrap_2pi(px + py));
        }
    }
    auto c = RisConfiguration::from_phase_matrix(phi, RisProvenance::directional);
    c.gradients_ = std::make_pair(desired.u() - incident.u(), desired.v() - incident.v());
    return c;
}

GEstimate estimate_g(const RisConfiguration& theta_last, const AnglePair& ue_angles,
                     const ChannelRealization& g_opt, const AnglePair& incident) {
    const auto theta_ue = link_steering(g_opt.rx_geom, incident, ue_angles);
    GEstimate e;
    e.matrix = theta_last.inverse_theta() * theta_ue.theta() * g_opt.matrix;
    e.phase_only = true;
    return e;
}

RisConfiguration design_theta(const GEstimate& g_hat, const ChannelRealization& g_opt,
                              const AnglePair& desired, double max_condition) {
    return design_theta(g_hat, g_opt, link_steering(g_opt.rx_geom, AnglePair{}, desired),
                        max_condition);
}

RisConfiguration design_theta(const GEstimate& g_hat, const ChannelRealization& g_opt,
                              const RisConfiguration& theta_desired, double max_condition) {
    const int m_ris = int(g_hat.matrix.rows());
    if (g_opt.matrix.rows() != m_ris)
        throw std::invalid_argument("design_theta: G-hat / G_opt row mismatch");

    const CMat target = theta_desired.theta() * g_opt.matrix;

    Eigen::JacobiSVD<CMat> svd(g_hat.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    const double tol = smax * std::max(g_hat.matrix.rows(), g_hat.matrix.cols()) *
                       std::numeric_limits<double>::epsilon() * 16.0;
    int rank = 0;
    while (rank < sv.size() && sv[rank] > tol) ++rank;
    if (rank == 0)
        throw SingularGEstimate("design_theta: G-hat is numerically zero",
                                std::numeric_limits<double>::infinity());
    const double cond = smax / sv[rank - 1];
    if (cond > max_condition)
        throw SingularGEstimate("design_theta: G-hat G-hat^H condition number exceeds limit",
                                cond * cond);

    // Theta = target * pinv(G-hat) via the truncated SVD.
    CMat pinv = svd.matrixV().leftCols(rank) *
                sv.head(rank).cwiseInverse().asDiagonal() *
                svd.matrixU().leftCols(rank).adjoint();
    CMat theta = target * pinv;

    const double target_norm = target.norm();
    const double residual = (theta * g_hat.matrix - target).norm();
    if (target_norm > 0.0 && residual / target_norm > 1e-8)
        throw SingularGEstimate(
            "design_theta: compensation identity unattainable for rank-deficient G-hat",
            cond * cond);

    return RisConfiguration::from_full_matrix(theta, RisProvenance::g_compensated);
}

std::pair<RisConfiguration, double> project_to_phases(const RisConfiguration& exact,
                                                      const GEstimate& g_hat,
                                                      const ChannelRealization& g_opt,
                                                      const AnglePair& desired) {
    CVec diag = exact.theta().diagonal();
    for (int i = 0; i < diag.size(); ++i) {
        const double m = std::abs(diag[i]);
        diag[i] = (m > 0.0) ? diag[i] / m : cxd(1.0, 0.0);
    }
    const int n = int(std::lround(std::sqrt(double(diag.size()))));
    auto projected = RisConfiguration::from_codeword(diag, n, n);

    // Received amplitude along the desired beam for a probe through G-hat.
    const CVec probe = steering_vector(g_opt.tx_geom, g_opt.paths.front().departure);
    const CVec ref = link_steering(g_opt.rx_geom, AnglePair{}, desired).vec_phi();
    const cxd amp_exact = ref.adjoint() * (exact.theta() * (g_hat.matrix * probe));
    const cxd amp_proj = ref.adjoint() * (projected.theta() * (g_hat.matrix * probe));
    double loss_db = 0.0;
    if (std::abs(amp_exact) > 0.0)
        loss_db = 20.0 * std::log10(std::abs(amp_proj) / std::abs(amp_exact));
    return {projected, loss_db};
}

} // namespace rismm
