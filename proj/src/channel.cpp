// SPDX-License-Identifier: Apache-2.0

#include "rismm/channel.hpp"
#include "rismm/ris_control.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rismm {

CMat assemble_channel_matrix(const std::vector<PathComponent>& paths,
                             const UpaGeometry& tx_geom, const UpaGeometry& rx_geom) {
    CMat m = CMat::Zero(rx_geom.size(), tx_geom.size());
    for (const auto& p : paths) {
        const CVec a_rx = steering_vector(rx_geom, p.arrival);
        const CVec a_tx = steering_vector(tx_geom, p.departure);
        m.noalias() += p.gain * (a_rx * a_tx.adjoint());
    }
    return m;
}

ChannelRealization sample_channel(Rng& rng, int n_paths, const UpaGeometry& tx_geom,
                                  const UpaGeometry& rx_geom, const ChannelLaw& law) {
    if (n_paths < 1)
        throw std::invalid_argument("sample_channel: need at least one path");
    tx_geom.validate();
    rx_geom.validate();

    const double default_var = law.gain_variance.value_or(1.0 / double(n_paths));
    const bool fixed_los = law.los_arrival.has_value() || law.los_departure.has_value();
    const double nlos_var = law.nlos_gain_variance.value_or(default_var);

    ChannelRealization c;
    c.tx_geom = tx_geom;
    c.rx_geom = rx_geom;
    c.paths.reserve(n_paths);
    for (int l = 0; l < n_paths; ++l) {
        PathComponent p;
        if (l == 0 && fixed_los) {
            p.arrival = law.los_arrival.value_or(AnglePair{});
            p.departure = law.los_departure.value_or(AnglePair{});
            p.gain = rng.unit_phase();
        } else {
            p.departure = AnglePair{rng.uniform(0.0, kPi / 2.0), rng.uniform(0.0, 2.0 * kPi)};
            p.arrival = AnglePair{rng.uniform(0.0, kPi / 2.0), rng.uniform(0.0, 2.0 * kPi)};
            p.gain = rng.gaussian_c(fixed_los ? nlos_var : default_var);
        }
        c.paths.push_back(p);
    }
    c.matrix = assemble_channel_matrix(c.paths, tx_geom, rx_geom);
    return c;
}

ChannelRealization single_path_channel(const UpaGeometry& tx_geom, const UpaGeometry& rx_geom,
                                       const AnglePair& departure, const AnglePair& arrival,
                                       cxd gain) {
    ChannelRealization c;
    c.tx_geom = tx_geom;
    c.rx_geom = rx_geom;
    c.paths.push_back(PathComponent{gain, departure, arrival});
    c.matrix = assemble_channel_matrix(c.paths, tx_geom, rx_geom);
    return c;
}

void PathLossParams::validate() const {
    if (!(d_g > 0.0) || !(d_h > 0.0))
        throw std::invalid_argument("PathLossParams: distances must be > 0");
    if (reflection_gain < 0.0 || reflection_gain > 1.0)
        throw std::invalid_argument("PathLossParams: reflection gain outside [0, 1]");
    if (n_ris < 1 || !(d_x > 0.0) || !(wavelength > 0.0))
        throw std::invalid_argument("PathLossParams: invalid geometry");
}

double path_loss_max(const PathLossParams& p, const AnglePair& incident,
                     const AnglePair& reflected) {
    p.validate();
    const double n4 = std::pow(double(p.n_ris), 4.0);
    const double num = p.g_tx * p.g_rx * p.g_ris * n4 * p.d_x * p.d_x * p.wavelength *
                       p.wavelength * p.pattern(incident) * p.pattern(reflected) *
                       p.reflection_gain * p.reflection_gain;
    const double den = 64.0 * kPi * kPi * kPi * p.d_g * p.d_g * p.d_h * p.d_h;
    return num / den;
}

namespace {

// sinc(N a') / sinc(a') written as the normalized Dirichlet kernel
// sin(N a) / (N sin a) with a = pi (d_x / lambda) x.  The removable 0/0
// points evaluate to their limits (1 at a = 0, cos(N a)/cos(a) at a = k pi).
double sinc_ratio(double x, int n, double d_x, double wavelength) {
    const double a = kPi * (d_x / wavelength) * x;
    if (!std::isfinite(a))
        throw std::invalid_argument("path_loss_general: non-finite sinc argument");
    const double sa = std::sin(a);
    if (std::abs(sa) < 1e-12) {
        return std::cos(double(n) * a) / std::cos(a);
    }
    return std::sin(double(n) * a) / (double(n) * sa);
}

} // namespace

double path_loss_general(const PathLossParams& p, const AnglePair& incident,
                         const AnglePair& reflected) {
    const double gx = incident.u() + reflected.u() + p.delta1;
    const double gy = incident.v() + reflected.v() + p.delta2;
    const double rx = sinc_ratio(gx, p.n_ris, p.d_x, p.wavelength);
    const double ry = sinc_ratio(gy, p.n_ris, p.d_x, p.wavelength);
    const double shape = rx * ry;
    return path_loss_max(p, incident, reflected) * shape * shape;
}

std::pair<double, double> fit_phase_gradients(const CMat& phase_matrix, double d_x,
                                              double d_y, double wavelength) {
    const int n_rows = int(phase_matrix.rows());
    const int n_cols = int(phase_matrix.cols());
    // Two-parameter least squares over the element grid. Phases are taken as
    // given (no unwrapping); directional configurations built by this library
    // carry exact linear phases so the fit is exact for them.
    double sxx = 0, syy = 0, sxy = 0, bx = 0, by = 0;
    for (int r = 0; r < n_rows; ++r) {
        const double yn = element_offset(r, n_rows) * d_y;
        for (int cidx = 0; cidx < n_cols; ++cidx) {
            const double xm = element_offset(cidx, n_cols) * d_x;
            const double rhs = wavelength * std::arg(phase_matrix(r, cidx)) / (2.0 * kPi);
            sxx += xm * xm;
            syy += yn * yn;
            sxy += xm * yn;
            bx += xm * rhs;
            by += yn * rhs;
        }
    }
    const double det = sxx * syy - sxy * sxy;
    if (std::abs(det) < 1e-30) return {0.0, 0.0};
    return {(bx * syy - by * sxy) / det, (by * sxx - bx * sxy) / det};
}

CMat effective_channel(const ChannelRealization& h, const CMat& theta,
                       const ChannelRealization& g, double beta) {
    if (h.matrix.cols() != theta.rows() || theta.cols() != g.matrix.rows())
        throw std::invalid_argument("effective_channel: dimension mismatch");
    return beta * (h.matrix * theta * g.matrix);
}

CMat effective_channel(const ChannelRealization& h, const RisConfiguration& theta,
                       const ChannelRealization& g, double beta) {
    return effective_channel(h, theta.theta(), g, beta);
}

std::string channel_to_text(const ChannelRealization& c) {
    std::ostringstream os;
    os << "channel v1\n";
    os << c.tx_geom.n_x << ' ' << c.tx_geom.n_y << ' ' << c.tx_geom.spacing << ' '
       << c.tx_geom.wavelength << '\n';
    os << c.rx_geom.n_x << ' ' << c.rx_geom.n_y << ' ' << c.rx_geom.spacing << ' '
       << c.rx_geom.wavelength << '\n';
    os << c.paths.size() << '\n';
    char buf[256];
    for (const auto& p : c.paths) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g\n",
                      p.gain.real(), p.gain.imag(), p.departure.elevation,
                      p.departure.azimuth, p.arrival.elevation, p.arrival.azimuth);
        os << buf;
    }
    return os.str();
}

ChannelRealization channel_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string tag, version;
    is >> tag >> version;
    if (tag != "channel" || version != "v1")
        throw std::invalid_argument("channel_from_text: unrecognized header");
    ChannelRealization c;
    is >> c.tx_geom.n_x >> c.tx_geom.n_y >> c.tx_geom.spacing >> c.tx_geom.wavelength;
    is >> c.rx_geom.n_x >> c.rx_geom.n_y >> c.rx_geom.spacing >> c.rx_geom.wavelength;
    std::size_t n = 0;
    is >> n;
    for (std::size_t i = 0; i < n; ++i) {
        PathComponent p;
        double re, im;
        is >> re >> im >> p.departure.elevation >> p.departure.azimuth >>
            p.arrival.elevation >> p.arrival.azimuth;
        p.gain = cxd(re, im);
        c.paths.push_back(p);
    }
    if (!is)
        throw std::invalid_argument("channel_from_text: truncated record");
    c.matrix = assemble_channel_matrix(c.paths, c.tx_geom, c.rx_geom);
    return c;
}

} // namespace rismm
