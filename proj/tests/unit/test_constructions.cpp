/*
   Copyright 2026 The invlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "invlab/constructions.hpp"
#include "invlab/errors.hpp"
#include "invlab/spectral_ops.hpp"

using namespace invlab;

TEST_CASE("profile bump") {
    const Grid g(2, 512, 12.0);
    const ProfileBump b = build_profile_bump(g);
    CHECK(b(0.0) == 1.0);
    CHECK(b(0.25) == 0.0);
    CHECK(b(1.0 / 16.0) == 1.0);
    CHECK(b(-0.1) == b(0.1));
    CHECK(b.support_modes == 2);

    const auto& d = b.diagnostics;
    CHECK(d.phi0 > 0.0);
    // phi(0) = (1/2pi) int hat, and the maximum sits at the origin.
    CHECK(d.sup_sampled <= d.phi0 * (1.0 + 1e-12));
    CHECK(b.physical(0.0) == doctest::Approx(d.phi0).epsilon(1e-14));
    CHECK(b.physical(d.delta) == doctest::Approx(0.5 * d.phi0).epsilon(1e-9));
    for (int k = 0; k < 3; ++k) {
        CAPTURE(k);
        CHECK(d.c1[k] > 0.0);
        CHECK(d.c1[k] <= d.norm[k]);
        CHECK(d.norm[k] <= d.c2[k] * (1.0 + 1e-9));
    }
    CHECK(d.tail_mass >= 0.0);
    CHECK(d.tail_mass < 0.2);

    // Plateau width (1/4)^2 and support 1/4 as closed forms: the integral of
    // hat lies between them.
    CHECK(d.phi0 >= 2.0 * (1.0 / 16.0) / (2 * std::numbers::pi));
    CHECK(d.phi0 <= 2.0 * 0.25 / (2 * std::numbers::pi));

    CHECK_THROWS_AS(build_profile_bump(g, 0.4), ArgumentError);
    CHECK_NOTHROW(build_profile_bump(g, 0.3));
}

TEST_CASE("oscillating profile") {
    const Grid g(2, 512, 12.0);
    const ProfileBump b = build_profile_bump(g);
    const int n = 3;
    const SpectralField f = build_fn_spectral(b, n, g);

    // Frequency support inside the annulus {4/3 2^n <= |xi| <= 3/2 2^n}.
    const double c = 17.0 / 12.0 * 8.0;
    const auto& kabs = g.wavenumber_abs();
    double lo = 1e300, hi = 0.0;
    for (Eigen::Index i = 0; i < kabs.size(); ++i) {
        if (f.coeffs()[i] == Complex(0.0)) continue;
        lo = std::min(lo, kabs[i]);
        hi = std::max(hi, kabs[i]);
    }
    CHECK(lo >= c - 0.5);
    CHECK(hi <= c + 0.5);
    CHECK(lo >= 4.0 / 3.0 * 8.0);
    CHECK(hi <= 1.5 * 8.0);

    // Real and even in each coordinate.
    CHECK(f.hermitian_defect() == 0.0);
    for (long m1 : {135L, 136L, 137L, 138L}) {
        for (long m2 : {0L, 1L, 2L}) {
            CHECK(f.at({m1, m2, 0}).imag() == 0.0);
            CHECK(f.at({m1, m2, 0}) == f.at({-m1, m2, 0}));
            CHECK(f.at({m1, m2, 0}) == f.at({m1, -m2, 0}));
        }
    }

    // Dual construction: periodized profile times the carrier cosine.
    const double r = g.radius(), L = g.period();
    auto periodized = [&](double x) {
        double s = b(0.0);
        for (long m = 1; m <= b.support_modes; ++m) s += 2.0 * b(m / r) * std::cos(m * x / r);
        return s / L;
    };
    const RealField phys = build_fn(b, n, g);
    const Eigen::ArrayXd x1 = g.coordinate(0), x2 = g.coordinate(1);
    double err = 0.0, top = 0.0;
    for (Eigen::Index i = 0; i < x1.size(); i += 7) {
        const double ref = periodized(x1[i]) * std::cos(c * x1[i]) * periodized(x2[i]);
        err = std::max(err, std::abs(phys.values()[i] - ref));
        top = std::max(top, std::abs(ref));
    }
    CHECK(err <= 1e-10 * top);

    CHECK_THROWS_AS(build_fn_spectral(b, 2, g), ConstructionError);
    const Grid small(2, 256, 12.0);
    try {
        build_fn_spectral(build_profile_bump(small), n, small);
        FAIL("expected a resolution error");
    } catch (const ResolutionError& e) {
        CHECK(std::string(e.what()).find("required N = 512") != std::string::npos);
    }
}

TEST_CASE("shell datum") {
    const Grid probe(2, 16, 12.0);
    const ProfileBump b0 = build_profile_bump(probe);
    const BesovParams bp;
    const double phi_l2 = b0.diagnostics.norm[1];
    for (int n = 3; n <= 5; ++n) {
        CAPTURE(n);
        const Grid g(2, required_samples(datum_max_mode(b0, n)), 12.0);
        const ProfileBump b = build_profile_bump(g);
        const VectorField u = build_u0n(ShellDatum{n, bp, 0.0}, g, b);
        const double ratio = besov_norm(u, bp) / (phi_l2 * phi_l2);
        CHECK(ratio >= 1.0 / 3.0);
        CHECK(ratio <= 3.0);
        CHECK(l2_norm(divergence(u)) <= 1e-12 * l2_norm(u) * (17.0 / 12.0 * std::ldexp(1.0, n)));
        CHECK(u.solenoidal());

        const VectorField shifted = build_u0n(ShellDatum{n, bp, g.period() / 2}, g, b);
        CHECK(besov_norm(shifted, bp) == doctest::Approx(besov_norm(u, bp)).epsilon(1e-12));
        const double k[2] = {g.period() / 2, 0.0};
        CHECK(l2_norm(translate(u, k) - shifted) <= 1e-12 * l2_norm(u));
    }
}

TEST_CASE("three-dimensional datum keeps the planar structure") {
    // A smaller lattice radius keeps the n = 3 carrier integral at N = 64.
    const Grid small(3, 64, 1.5);
    ProfileBump b = build_profile_bump(small);
    BesovParams bp{3.0, 2.0, 2.0, 3};
    const VectorField u = build_u0n(ShellDatum{3, bp, 0.0}, small, b);
    CHECK(u.dim() == 3);
    CHECK(l2_norm(u[2]) == 0.0);
    CHECK(l2_norm(u[1]) > 0.0);
}

TEST_CASE("background field") {
    const BesovParams bp;
    const Grid g(2, 1024, 12.0);
    const VectorField psi = build_background_psi(g, 42, 3, bp);
    CHECK(besov_norm(psi, bp) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(l2_norm(divergence(psi)) <= 1e-12 * l2_norm(psi) * 8.0);
    const VectorField again = build_background_psi(g, 42, 3, bp);
    CHECK((again[0].coeffs() == psi[0].coeffs()).all());
    CHECK((again[1].coeffs() == psi[1].coeffs()).all());
    const VectorField other = build_background_psi(g, 43, 3, bp);
    CHECK(l2_norm(other - psi) > 0.1 * l2_norm(psi));

    // Same field on a finer grid.
    const Grid fine(2, 2048, 12.0);
    const VectorField psi_fine = build_background_psi(fine, 42, 3, bp);
    for (long m1 = -30; m1 <= 30; m1 += 3) {
        for (long m2 = -30; m2 <= 30; m2 += 5) {
            const Complex a = psi[0].at({m1, m2, 0});
            const Complex c = psi_fine[0].at({m1, m2, 0});
            CHECK(std::abs(a - c) <= 1e-13 * (1.0 + std::abs(a)));
        }
    }
    // Band limit |xi| <= 2^band.
    const auto& kabs = g.wavenumber_abs();
    double reach = 0.0;
    for (Eigen::Index i = 0; i < kabs.size(); ++i) {
        if (std::abs(psi[0].coeffs()[i]) + std::abs(psi[1].coeffs()[i]) > 0.0) reach = std::max(reach, kabs[i]);
    }
    CHECK(reach <= 8.0);
    CHECK_THROWS_AS(build_background_psi(Grid(2, 512, 12.0), 42, 3, bp), ArgumentError);
}
