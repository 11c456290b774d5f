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
#include <limits>
#include <random>

#include <doctest.h>

#include "invlab/constructions.hpp"
#include "invlab/errors.hpp"
#include "invlab/spectral_ops.hpp"

using namespace invlab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Random Hermitian coefficients on every mode with |m_j| <= band.
SpectralField random_field(const Grid& g, long band, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    SpectralField f(g);
    for (long a = -band; a <= band; ++a) {
        for (long b = -band; b <= band; ++b) {
            if (a < 0 || (a == 0 && b <= 0)) continue;
            const Complex z(normal(rng), normal(rng));
            f.at({a, b, 0}) = z;
            f.at({-a, -b, 0}) = std::conj(z);
        }
    }
    return f;
}

double rel(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b) / l2_norm(b); }

int warnings_seen = 0;
void count_warning(const std::string&) { ++warnings_seen; }

} // namespace

TEST_CASE("cutoff profiles") {
    CHECK(lp_theta(0.5) == 1.0);
    CHECK(lp_theta(0.75) == 1.0);
    CHECK(lp_theta(1.5) == 0.0);
    CHECK(lp_theta(4.0 / 3.0) == 0.0);
    CHECK(lp_phi(1.4) == 1.0);
    CHECK(lp_phi(0.7) == 0.0);
    CHECK(lp_phi(2.7) == 0.0);
    // Monotone decreasing transition.
    double prev = 1.0;
    for (double rho = 0.75; rho <= 1.34; rho += 0.01) {
        CHECK(lp_theta(rho) <= prev);
        prev = lp_theta(rho);
    }
    CHECK(smooth_step(0.5) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("partition of unity on the resolved ball") {
    const Grid g(2, 64, 2.0);
    const DyadicPartition part = build_partition(g);
    // Smallest J with (3/4) 2^{J+1} >= 16: J = 4.
    CHECK(part.j_max == 4);
    Eigen::ArrayXd total = part.block_symbol(-1);
    for (int j = 0; j <= part.j_max; ++j) total += part.block_symbol(j);
    // Telescoping oracle: the partial sum equals theta(2^{-(J+1)} xi).
    const Eigen::ArrayXd oracle = g.wavenumber_abs().unaryExpr([&](double rho) {
        return lp_theta(std::ldexp(rho, -(part.j_max + 1)));
    });
    CHECK((total - oracle).abs().maxCoeff() <= 1e-12);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < total.size(); ++i) {
        if (g.wavenumber_abs()[i] <= part.resolved_radius()) worst = std::max(worst, std::abs(total[i] - 1.0));
    }
    CHECK(worst <= 1e-12);
    CHECK_THROWS_AS(part.block_symbol(-2), ArgumentError);
}

TEST_CASE("blocks reconstruct band-limited fields") {
    const Grid g(2, 64, 1.0);
    const SpectralField f = random_field(g, 18, 11);
    SpectralField sum(g);
    const int jm = build_partition(g).j_max;
    for (int j = -1; j <= jm; ++j) sum += dyadic_block(j, f);
    CHECK(rel(sum, f) <= 1e-12);

    // Almost orthogonality.
    for (int j = -1; j <= jm; ++j) {
        for (int k = -1; k <= jm; ++k) {
            if (std::abs(j - k) < 2) continue;
            CHECK(l2_norm(dyadic_block(j, dyadic_block(k, f))) <= 1e-12 * l2_norm(f));
        }
    }

    SpectralField constant(g);
    constant.at({0, 0, 0}) = 3.0;
    CHECK(rel(dyadic_block(-1, constant), constant) == 0.0);
    CHECK_THROWS_AS(dyadic_block(-2, f), ArgumentError);
}

TEST_CASE("single-shell datum occupies exactly one block") {
    const BesovParams bp;
    for (int n = 3; n <= 5; ++n) {
        CAPTURE(n);
        const Grid probe(2, 16, 12.0);
        const ProfileBump bump = build_profile_bump(probe);
        const Grid g(2, required_samples(datum_max_mode(bump, n)), 12.0);
        const VectorField u = build_u0n(ShellDatum{n, bp, 0.0}, g, build_profile_bump(g));
        const double base = l2_norm(u);
        const int jm = build_partition(g).j_max;
        for (int j = -1; j <= jm; ++j) {
            const double err = l2_norm(dyadic_block(j, u) - (j == n ? u : VectorField::zeros(g)));
            CHECK(err <= 1e-12 * base);
        }
        // Support-intersection oracle: no lattice point of the datum lies
        // where theta(2^-n xi) is nonzero.
        const Eigen::ArrayXd low = build_partition(g).low_pass_symbol(n);
        double overlap = 0.0;
        for (Eigen::Index i = 0; i < low.size(); ++i) {
            if (std::abs(u[0].coeffs()[i]) + std::abs(u[1].coeffs()[i]) > 0.0) overlap = std::max(overlap, low[i]);
        }
        CHECK(overlap == 0.0);
        CHECK(l2_norm(low_pass(n, u)) <= 1e-12 * base);

        const auto report = block_spectrum_report(u, bp);
        int nonzero = 0;
        for (const auto& b : report) {
            if (b.weighted > 1e-12 * besov_norm(u, bp)) {
                ++nonzero;
                CHECK(b.j == n);
            }
        }
        CHECK(nonzero == 1);
    }
}

TEST_CASE("Besov norm of a single-shell field") {
    const Grid g(2, 512, 12.0);
    const ProfileBump bump = build_profile_bump(g);
    const int n = 3;
    const VectorField u = build_u0n(ShellDatum{n, BesovParams{}, 0.0}, g, bump);
    for (double p : {1.0, 2.0, kInf}) {
        for (double r : {1.0, 2.0, kInf}) {
            for (double sigma : {2.0, 3.0, 4.0}) {
                CAPTURE(p);
                CAPTURE(r);
                CAPTURE(sigma);
                const BesovParams bp{sigma, p, r, 2};
                const double expect = std::pow(2.0, n * sigma) * lp_norm(u, p);
                CHECK(besov_norm(u, bp) == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
    CHECK(besov_norm(VectorField::zeros(g), BesovParams{}) == 0.0);
}

TEST_CASE("scaling law across shells") {
    const Grid probe(2, 16, 12.0);
    const ProfileBump bump0 = build_profile_bump(probe);
    const BesovParams bp;
    for (double sigma : {bp.s - 1.0, bp.s, bp.s + 1.0}) {
        double lo = kInf, hi = 0.0;
        for (int n = 3; n <= 5; ++n) {
            const Grid g(2, required_samples(datum_max_mode(bump0, n)), 12.0);
            const VectorField u = build_u0n(ShellDatum{n, bp, 0.0}, g, build_profile_bump(g));
            const double ratio = besov_norm(u, bp.with_s(sigma)) / std::pow(2.0, n * (sigma - bp.s));
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        CAPTURE(sigma);
        CHECK(hi / lo <= 1.05);
    }
}

TEST_CASE("block report") {
    const Grid g(2, 128, 1.0);
    // Two single modes placed where phi(2^-j .) == 1 for j = 2 and j = 4.
    SpectralField f(g);
    f.at({6, 0, 0}) = 1.0;  // |xi| = 6 = 1.5 * 4
    f.at({-6, 0, 0}) = 1.0;
    f.at({0, 22, 0}) = Complex(0.0, 2.0);  // |xi| = 22 in [4/3 * 16, 3/2 * 16]
    f.at({0, -22, 0}) = Complex(0.0, -2.0);
    const BesovParams bp{3.0, 2.0, 2.0, 2};
    const auto rep = block_spectrum_report(f, bp);
    int nonzero = 0;
    for (const auto& b : rep) {
        if (b.weighted > 0.0) {
            ++nonzero;
            CHECK((b.j == 2 || b.j == 4));
        }
    }
    CHECK(nonzero == 2);
    double sum_r = 0.0;
    for (const auto& b : rep) sum_r += b.weighted * b.weighted;
    CHECK(sum_r == doctest::Approx(std::pow(besov_norm(f, bp), 2.0)).epsilon(1e-13));

    // Random band-limited field, same answer through both evaluation paths.
    const SpectralField h = random_field(g, 30, 5);
    const BesovParams two{1.5, 2.0, 2.0, 2};
    const double fast = besov_norm(h, two);
    std::vector<BlockNorm> slow;
    for (int j = -1; j <= build_partition(g).j_max; ++j) {
        slow.push_back({j, std::pow(2.0, 1.5 * j) * lp_norm(to_physical(dyadic_block(j, h)), 2.0)});
    }
    CHECK(fast == doctest::Approx(combine_blocks(slow, 2.0)).epsilon(1e-12));
    const double low = lp_norm(h, 2.0);
    CHECK(fast > 0.0);
    CHECK(std::isfinite(fast));
    CHECK(fast >= 0.1 * low);
}

TEST_CASE("admissible exponents") {
    CHECK_NOTHROW(BesovParams({3.0, 2.0, 2.0, 2}).validate());
    CHECK_NOTHROW(BesovParams({2.0, 2.0, 1.0, 2}).validate());
    CHECK_THROWS_AS(BesovParams({2.0, 2.0, 2.0, 2}).validate(), ValidationError);
    CHECK_THROWS_AS(BesovParams({3.0, 2.0, kInf, 2}).validate(), ValidationError);
    CHECK_THROWS_AS(BesovParams({1.5, 2.0, 1.0, 2}).validate(), ValidationError);
    CHECK_NOTHROW(BesovParams({1.5, kInf, 1.0, 3}).validate());
    CHECK_THROWS_AS(BesovParams({3.0, 2.0, 2.0, 4}).validate(), UnsupportedDimensionError);
}

TEST_CASE("resolution checks") {
    const Grid g(2, 32, 1.0);
    SpectralField f(g);
    f.at({16, 0, 0}) = 1.0;  // the unpaired Nyquist mode
    CHECK_THROWS_AS(besov_norm(f, BesovParams{}, Strictness::strict), ResolutionError);
    warnings_seen = 0;
    set_warning_sink(count_warning);
    CHECK(besov_norm(f, BesovParams{}) > 0.0);
    set_warning_sink(nullptr);
    CHECK(warnings_seen == 1);
    SpectralField ok(g);
    ok.at({5, 0, 0}) = 1.0;
    ok.at({-5, 0, 0}) = 1.0;
    CHECK_NOTHROW(besov_norm(ok, BesovParams{}, Strictness::strict));
}
