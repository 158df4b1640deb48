// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rismm/arrays.hpp"

#include <cmath>

using namespace rismm;

namespace {
const double kDeg = kPi / 180.0;
}

TEST_CASE("steering vector at zero angle is uniform") {
    const auto geom = square_upa(2, 1.0, 0.37); // spacing irrelevant at broadside
    const CVec a = steering_vector(geom, AnglePair{0.0, 0.0});
    REQUIRE(a.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(a[i].real() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(std::abs(a[i].imag()) < 1e-14);
    }
}

TEST_CASE("steering vector 2x2 half-wavelength at (pi/2, 0)") {
    // u = 1, v = 0: q = [1, -1], p = [1, 1], kron gives (1/2)[1, 1, -1, -1].
    const auto geom = square_upa(2, 1.0, 0.5);
    const CVec a = steering_vector(geom, AnglePair{kPi / 2.0, 0.0});
    const double expected[4] = {0.5, 0.5, -0.5, -0.5};
    for (int i = 0; i < 4; ++i) {
        CHECK(a[i].real() == doctest::Approx(expected[i]).epsilon(1e-12));
        CHECK(std::abs(a[i].imag()) < 1e-12);
    }
}

TEST_CASE("steering vector has unit norm for random inputs") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const int nx = rng.uniform_int(1, 8);
        const int ny = rng.uniform_int(1, 8);
        const UpaGeometry geom{nx, ny, rng.uniform(0.1, 2.0), 1.0};
        const AnglePair ang{rng.uniform(0.0, kPi / 2.0), rng.uniform(0.0, 2.0 * kPi)};
        CHECK(steering_vector(geom, ang).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("steering vector is 2pi-periodic in azimuth") {
    const auto geom = square_upa(4, 1.0, 0.5);
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        const AnglePair a{rng.uniform(0.0, kPi / 2.0), rng.uniform(0.0, 2.0 * kPi)};
        const AnglePair b{a.elevation, a.azimuth + 2.0 * kPi};
        CHECK((steering_vector(geom, a) - steering_vector(geom, b)).norm() < 1e-9);
    }
}

TEST_CASE("array factor adds coherently for vanishing phase terms") {
    const auto geom = square_upa(4, 1.0, 0.5);
    const CVec ones = CVec::Ones(16);
    // Incident broadside, reflected broadside: Gx = Gy = 0.
    const cxd af = array_factor(ones, geom, AnglePair{}, AnglePair{});
    CHECK(af.real() == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(std::abs(af.imag()) < 1e-10);
}

TEST_CASE("array factor is bounded by M for unit-modulus weights") {
    const auto geom = square_upa(5, 1.0, 0.5);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        CVec w(25);
        for (int j = 0; j < 25; ++j) w[j] = rng.unit_phase();
        const AnglePair inc{rng.uniform(0.0, kPi / 2.0), rng.uniform(0.0, 2.0 * kPi)};
        const AnglePair ref{rng.uniform(0.0, kPi / 2.0), rng.uniform(0.0, 2.0 * kPi)};
        CHECK(std::abs(array_factor(w, geom, inc, ref)) <= 25.0 + 1e-9);
    }
}

TEST_CASE("array factor dimension mismatch throws") {
    const auto geom = square_upa(3, 1.0, 0.5);
    CHECK_THROWS_AS(array_factor(CVec::Ones(5), geom, AnglePair{}, AnglePair{}),
                    std::invalid_argument);
}

TEST_CASE("power pattern rejects an empty grid") {
    const auto geom = square_upa(2, 1.0, 0.5);
    CHECK_THROWS_AS(power_pattern(CVec::Ones(4), geom, AnglePair{}, {}),
                    std::invalid_argument);
}

TEST_CASE("power pattern values are real finite and within [0, M^2]") {
    const auto geom = square_upa(4, 1.0, 0.5);
    Rng rng(19);
    CVec w(16);
    for (int j = 0; j < 16; ++j) w[j] = rng.unit_phase();
    const auto grid = make_angle_grid(19, 37);
    const auto p = power_pattern(w, geom, AnglePair{}, grid);
    for (double v : p) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        CHECK(v <= 256.0 + 1e-6);
    }
}

TEST_CASE("power pattern matches per-point array factor") {
    const auto geom = UpaGeometry{3, 4, 0.5, 1.0};
    Rng rng(23);
    CVec w(12);
    for (int j = 0; j < 12; ++j) w[j] = rng.gaussian_c(1.0);
    const AnglePair inc{0.3, 1.0};
    const auto grid = make_angle_grid(7, 9);
    const auto p = power_pattern(w, geom, inc, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(p[i] == doctest::Approx(std::norm(array_factor(w, geom, inc, grid[i])))
                          .epsilon(1e-10));
}

TEST_CASE("steering derivatives match finite differences") {
    const auto geom = square_upa(4, 1.0, 0.5);
    Rng rng(31);
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const AnglePair ang{rng.uniform(0.05, kPi / 2.0 - 0.05), rng.uniform(0.1, 6.1)};
        const auto d = steering_vector_derivs(geom, ang);
        const CVec de_fd = (steering_vector(geom, AnglePair{ang.elevation + h, ang.azimuth}) -
                            steering_vector(geom, AnglePair{ang.elevation - h, ang.azimuth})) /
                           (2.0 * h);
        const CVec da_fd = (steering_vector(geom, AnglePair{ang.elevation, ang.azimuth + h}) -
                            steering_vector(geom, AnglePair{ang.elevation, ang.azimuth - h})) /
                           (2.0 * h);
        CHECK((d.d_elevation - de_fd).norm() < 1e-6 * std::max(1.0, de_fd.norm()));
        CHECK((d.d_azimuth - da_fd).norm() < 1e-6 * std::max(1.0, da_fd.norm()));
    }
}

TEST_CASE("angular distance basics") {
    CHECK(angular_distance(AnglePair{0.0, 0.0}, AnglePair{0.0, 3.0}) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(angular_distance(AnglePair{0.0, 0.0}, AnglePair{kPi / 2.0, 0.0}) ==
          doctest::Approx(kPi / 2.0).epsilon(1e-12));
    CHECK(angular_distance(AnglePair{30 * kDeg, 0.0}, AnglePair{40 * kDeg, 0.0}) ==
          doctest::Approx(10 * kDeg).epsilon(1e-9));
}
