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
#include <random>

#include <doctest.h>

#include "invlab/errors.hpp"
#include "invlab/spectral_ops.hpp"

using namespace invlab;
using std::numbers::pi;

namespace {

// Smooth real test function assembled from a few explicit modes.
RealField sample(const Grid& g, double (*fn)(double, double)) {
    const Eigen::ArrayXd x = g.coordinate(0), y = g.coordinate(1);
    Eigen::ArrayXd v(g.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = fn(x[i], y[i]);
    return RealField(g, v);
}

SpectralField random_band_limited(const Grid& g, int band, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(g.size());
    const Eigen::ArrayXd x = g.coordinate(0), y = g.coordinate(1);
    const double r = g.radius();
    for (int a = -band; a <= band; ++a) {
        for (int b = 0; b <= band; ++b) {
            const double c = normal(rng), s = normal(rng);
            v += c * ((a * x + b * y) / r).cos() + s * ((a * x + b * y) / r).sin();
        }
    }
    return to_spectral(RealField(g, v));
}

} // namespace

TEST_CASE("forward transform normalization") {
    const Grid g(2, 32, 1.5);
    const double L = g.period();

    SUBCASE("constant") {
        RealField one(g, Eigen::ArrayXd::Ones(g.size()));
        const SpectralField c = to_spectral(one);
        CHECK(std::abs(c.at({0, 0, 0}) - Complex(L * L, 0.0)) < 1e-10 * L * L);
        CHECK(std::abs(c.at({1, 0, 0})) < 1e-10);
    }
    SUBCASE("single cosine") {
        const SpectralField c = to_spectral(sample(g, [](double x, double) { return std::cos(x / 1.5); }));
        CHECK(std::abs(c.at({1, 0, 0}) - Complex(L * L / 2, 0.0)) < 1e-10 * L * L);
        CHECK(std::abs(c.at({-1, 0, 0}) - Complex(L * L / 2, 0.0)) < 1e-10 * L * L);
        CHECK(std::abs(c.at({0, 1, 0})) < 1e-10);
    }
}

TEST_CASE("round trip and Hermitian symmetry") {
    const Grid g(2, 64, 2.0);
    const SpectralField f = random_band_limited(g, 5, 7);
    CHECK(f.hermitian_defect() < 1e-13);
    const RealField back = to_physical(f);
    const SpectralField again = to_spectral(back);
    const double err = (again.coeffs() - f.coeffs()).abs().maxCoeff() / f.coeffs().abs().maxCoeff();
    CHECK(err < 1e-12);
}

TEST_CASE("three-dimensional transform") {
    const Grid g(3, 16, 1.0);
    const Eigen::ArrayXd z = g.coordinate(2);
    const SpectralField c = to_spectral(RealField(g, (2.0 * z).sin()));
    const double L3 = std::pow(g.period(), 3);
    CHECK(std::abs(c.at({0, 0, 2}) - Complex(0.0, -L3 / 2)) < 1e-10 * L3);
    CHECK(std::abs(c.at({0, 0, -2}) - Complex(0.0, L3 / 2)) < 1e-10 * L3);
}

TEST_CASE("derivatives match analytic values") {
    const Grid g(2, 32, 1.0);
    const SpectralField f = to_spectral(sample(g, [](double x, double y) { return std::sin(2 * x) * std::cos(3 * y); }));
    const RealField dx = to_physical(partial(f, 0));
    const RealField lap = to_physical(laplacian(f));
    const RealField ref = sample(g, [](double x, double y) { return 2 * std::cos(2 * x) * std::cos(3 * y); });
    const RealField f_phys = to_physical(f);
    CHECK((dx.values() - ref.values()).abs().maxCoeff() < 1e-12);
    CHECK((lap.values() + 13.0 * f_phys.values()).abs().maxCoeff() < 1e-11);
    CHECK_THROWS_AS(perp_gradient(SpectralField(Grid(3, 16, 1.0))), UnsupportedDimensionError);
}

TEST_CASE("Leray projection identities") {
    const Grid g(2, 32, 1.0);
    VectorField v({random_band_limited(g, 6, 1), random_band_limited(g, 6, 2)});
    const VectorField pv = leray_project(v);
    const VectorField qv = leray_complement(v);
    CHECK(l2_norm(divergence(pv)) < 1e-11 * l2_norm(v));
    CHECK(l2_norm(leray_project(pv) - pv) < 1e-13 * l2_norm(v));
    CHECK(l2_norm(pv + qv - v) < 1e-13 * l2_norm(v));
    // P is an orthogonal projector, so Pythagoras holds.
    const double lhs = std::pow(l2_norm(v), 2);
    const double rhs = std::pow(l2_norm(pv), 2) + std::pow(l2_norm(qv), 2);
    CHECK(std::abs(lhs - rhs) < 1e-12 * lhs);
    // A gradient field is annihilated.
    CHECK(l2_norm(leray_project(gradient(random_band_limited(g, 6, 3)))) < 1e-12);
}

TEST_CASE("heat semigroup") {
    const Grid g(2, 32, 1.0);
    VectorField v({random_band_limited(g, 6, 4), random_band_limited(g, 6, 5)});
    const VectorField a = heat_propagate(heat_propagate(v, 0.3, 0.1), 0.2, 0.1);
    const VectorField b = heat_propagate(v, 0.5, 0.1);
    CHECK(l2_norm(a - b) < 1e-14 * l2_norm(v));
    CHECK(l2_norm(heat_propagate(v, 0.0, 0.1) - v) == 0.0);
    // expm1 form agrees with the direct difference where both are accurate.
    const VectorField d = heat_minus_identity(v, 0.5, 0.1);
    CHECK(l2_norm(d - (b - v)) < 1e-13 * l2_norm(v));
    // Single mode decays by exactly exp(-t eps |xi|^2).
    const SpectralField c = to_spectral(sample(g, [](double x, double y) { return std::cos(3 * x + 4 * y); }));
    const SpectralField hc = heat_propagate(c, 0.2, 0.05);
    CHECK(std::abs(hc.at({3, 4, 0}) / c.at({3, 4, 0}) - std::exp(-0.2 * 0.05 * 25.0)) < 1e-14);
    CHECK_THROWS_AS(heat_propagate(v, -1.0, 0.1), ArgumentError);
}

TEST_CASE("translation") {
    const Grid g(2, 32, 1.0);
    const SpectralField f = random_band_limited(g, 5, 8);
    const double L = g.period();
    const double full[2] = {L, 0.0};
    CHECK((translate(f, full).coeffs() - f.coeffs()).abs().maxCoeff() < 1e-10 * f.coeffs().abs().maxCoeff());
    // Shift by a whole number of samples is a cyclic roll of the samples.
    const double h = g.spacing();
    const double s[2] = {3 * h, 0.0};
    const RealField a = to_physical(f), b = to_physical(translate(f, s));
    const int n = g.n();
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int src = ((i - 3 + n) % n) * n + j;
            err = std::max(err, std::abs(b.values()[i * n + j] - a.values()[src]));
        }
    }
    CHECK(err < 1e-12);
}

TEST_CASE("norms") {
    const Grid g(2, 32, 1.0);
    const double L = g.period();
    const SpectralField c = to_spectral(sample(g, [](double x, double) { return std::cos(x); }));
    CHECK(std::abs(l2_norm(c) - L / std::sqrt(2.0)) < 1e-12 * L);
    const SpectralField pos = to_spectral(sample(g, [](double x, double) { return 2.0 + std::cos(x); }));
    CHECK(std::abs(lp_norm(pos, 1.0) - 2.0 * L * L) < 1e-12 * L * L);
    CHECK(std::abs(lp_norm(c, INFINITY) - 1.0) < 1e-12);
    CHECK(std::abs(lp_norm(to_physical(c), 2.0) - l2_norm(c)) < 1e-12 * L);
    CHECK_THROWS_AS(lp_norm(c, 0.5), ArgumentError);
    // Oversampling finds a maximum that falls between the samples.
    const double shift[2] = {0.5 * g.spacing(), 0.0};
    const SpectralField off = translate(to_spectral(sample(g, [](double x, double) { return std::cos(8 * x); })), shift);
    CHECK(std::abs(lp_norm(off, INFINITY) - 1.0) < 1e-12);
    CHECK(lp_norm(to_physical(off), INFINITY) < 0.95);
}

TEST_CASE("dealiasing and advection") {
    const Grid g(2, 32, 1.0);
    CHECK(g.dealias_limit() == 10);
    CHECK(required_samples(10) == 32);
    CHECK(required_samples(11) == 64);
    CHECK(required_samples(0) == 16);

    // u = (sin y, 0), v = (cos x, 0): (u.grad v)_1 = -sin y sin x.
    const SpectralField sy = to_spectral(sample(g, [](double, double y) { return std::sin(y); }));
    const SpectralField cx = to_spectral(sample(g, [](double x, double) { return std::cos(x); }));
    const SpectralField zero(g);
    const VectorField u({sy, zero}), v({cx, zero});
    const VectorField w = advect(u, v, true);
    const RealField ref = sample(g, [](double x, double y) { return -std::sin(y) * std::sin(x); });
    CHECK((to_physical(w[0]).values() - ref.values()).abs().maxCoeff() < 1e-13);
    CHECK(l2_norm(w[1]) < 1e-13);

    const SpectralField high = to_spectral(sample(g, [](double x, double) { return std::cos(12 * x); }));
    CHECK(max_mode(high) == 12);
    CHECK_THROWS_AS(advect(VectorField({high, zero}), v, true), ResolutionError);
}

TEST_CASE("multipliers") {
    const Grid g(2, 32, 1.0);
    const SpectralField f = random_band_limited(g, 6, 9);
    const auto minus_lap = MultiplierSpec::radial([](double r) { return r * r; }, 0.0);
    CHECK(l2_norm(apply_multiplier(f, minus_lap) + laplacian(f)) < 1e-12 * l2_norm(f));
    const auto bad = MultiplierSpec::radial([](double r) { return 1.0 / (r - 1.0); }, 0.0);
    CHECK_THROWS_AS(apply_multiplier(f, bad), ConfigurationError);
}
