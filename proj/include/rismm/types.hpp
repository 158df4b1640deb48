// SPDX-License-Identifier: Apache-2.0
//
// Core value types shared by all rismm modules: angles, UPA geometry,
// complex linear-algebra aliases and the deterministic RNG.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace rismm {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Elevation/azimuth pair in radians. Elevation is measured from broadside
/// (0 = perpendicular to the array plane) and lives in [0, pi/2]; azimuth
/// lives in [0, 2*pi).
struct AnglePair {
    double elevation = 0.0;
    double azimuth = 0.0;

    /// Direction cosine along the array x axis, sin(el)*cos(az).
    double u() const { return std::sin(elevation) * std::cos(azimuth); }
    /// Direction cosine along the array y axis, sin(el)*sin(az).
    double v() const { return std::sin(elevation) * std::sin(azimuth); }
};

inline bool angle_valid(const AnglePair& a) {
    return std::isfinite(a.elevation) && std::isfinite(a.azimuth) &&
           a.elevation >= 0.0 && a.elevation <= kPi / 2.0 + 1e-12;
}

/// Recover an AnglePair from its two direction cosines. The (u, v) pair maps
/// one-to-one onto elevation in [0, pi/2] x azimuth in [0, 2*pi) as long as
/// u^2 + v^2 <= 1; values slightly outside are clamped.
inline AnglePair angles_from_cosines(double u, double v) {
    double s = std::sqrt(u * u + v * v);
    if (s > 1.0) s = 1.0;
    AnglePair a;
    a.elevation = std::asin(s);
    a.azimuth = (s > 0.0) ? std::atan2(v, u) : 0.0;
    if (a.azimuth < 0.0) a.azimuth += 2.0 * kPi;
    return a;
}

/// Uniform planar array: n_x by n_y elements with common pitch `spacing`
/// (meters) at wavelength `wavelength` (meters).
struct UpaGeometry {
    int n_x = 1;
    int n_y = 1;
    double spacing = 0.5;
    double wavelength = 1.0;

    int size() const { return n_x * n_y; }

    void validate() const {
        if (n_x < 1 || n_y < 1)
            throw std::invalid_argument("UpaGeometry: element counts must be >= 1");
        if (!(spacing > 0.0) || !(wavelength > 0.0))
            throw std::invalid_argument("UpaGeometry: spacing and wavelength must be > 0");
    }
};

/// Square UPA helper (n per side, half-wavelength pitch by default).
inline UpaGeometry square_upa(int n_side, double wavelength, double spacing_over_lambda = 0.5) {
    return UpaGeometry{n_side, n_side, spacing_over_lambda * wavelength, wavelength};
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Deterministic 64-bit-seeded random stream. The same seed always yields the
/// same draws; Monte Carlo trials derive independent child streams from
/// (master seed, trial index) instead of sharing one stream across workers.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Warm up so that small seeds decorrelate immediately.
        for (int i = 0; i < 4; ++i) detail::splitmix64(state_);
    }

    Rng child(std::uint64_t index) const {
        std::uint64_t s = state_;
        std::uint64_t mixed = detail::splitmix64(s) ^ (0x517cc1b727220a95ULL * (index + 1));
        return Rng(mixed);
    }

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi_inclusive) {
        return lo + int(next_u64() % std::uint64_t(hi_inclusive - lo + 1));
    }

    /// Standard normal via Box-Muller; hand-rolled so streams are identical
    /// across standard-library implementations.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    /// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
    cxd gaussian_c(double variance = 1.0) {
        double s = std::sqrt(variance / 2.0);
        double re = gaussian();
        double im = gaussian();
        return cxd(s * re, s * im);
    }

    /// Unit-modulus complex number with uniform phase.
    cxd unit_phase() { return std::polar(1.0, uniform(0.0, 2.0 * kPi)); }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rismm
