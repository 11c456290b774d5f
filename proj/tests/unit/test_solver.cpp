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

#include <doctest.h>

#include "invlab/constructions.hpp"
#include "invlab/errors.hpp"
#include "invlab/solver.hpp"
#include "invlab/spectral_ops.hpp"

using namespace invlab;

namespace {

VectorField taylor_green(const Grid& g) {
    const Eigen::ArrayXd x = g.coordinate(0), y = g.coordinate(1);
    return to_spectral(std::vector<RealField>{RealField(g, -(x.cos() * y.sin())), RealField(g, x.sin() * y.cos())});
}

// Taylor-Green plus a sheared mode, so the nonlinearity does not vanish.
VectorField perturbed_taylor_green(const Grid& g) {
    const Eigen::ArrayXd x = g.coordinate(0), y = g.coordinate(1);
    VectorField extra = perp_gradient(to_spectral(RealField(g, (x + 2.0 * y).cos() + 0.5 * (2.0 * x - y).sin())));
    extra *= 0.3;
    return taylor_green(g) + extra;
}

struct Shell3 {
    Grid grid{2, 512, 12.0};
    ProfileBump bump = build_profile_bump(grid);
    ShellDatum datum{3, BesovParams{}, 0.0};
    VectorField u0 = build_u0n(datum, grid, bump);
};

} // namespace

TEST_CASE("Taylor-Green exact decay") {
    const Grid g(2, 32, 1.0);
    const VectorField u0 = taylor_green(g);
    // P(u . grad u) = 0 and Delta u = -2u, so u(t) = exp(-2 eps t) u0.
    for (double eps : {0.01, 0.0}) {
        SolverConfig cfg;
        cfg.eps = eps;
        cfg.T = 1.0;
        const Trajectory tr = evolve(u0, cfg, {0.5, 1.0});
        VectorField exact = u0;
        exact *= std::exp(-2.0 * eps);
        const double err = l2_norm(tr.state(1) - exact) / l2_norm(exact);
        CAPTURE(eps);
        CHECK(err <= (eps > 0 ? 1e-6 : 1e-8));
    }
}

TEST_CASE("zero data stays zero") {
    const Grid g(2, 32, 1.0);
    SolverConfig cfg;
    cfg.eps = 0.1;
    const Trajectory tr = evolve(VectorField::zeros(g), cfg, {0.0, 0.05, 0.1});
    for (std::size_t i = 0; i < tr.size(); ++i) CHECK(l2_norm(tr.state(i)) == 0.0);
}

TEST_CASE("Euler energy conservation and viscous decay") {
    const Grid g(2, 32, 1.0);
    const VectorField u0 = perturbed_taylor_green(g);
    const double e0 = 0.5 * std::pow(l2_norm(u0), 2);
    SolverConfig cfg;
    cfg.T = 0.1;
    const Trajectory euler = evolve(u0, cfg, {0.1});
    for (const auto& s : euler.steps()) CHECK(std::abs(s.energy - e0) <= 1e-7 * e0);
    CHECK(l2_norm(nonlinear_term(u0)) > 0.1);

    cfg.eps = 0.05;
    const Trajectory ns = evolve(u0, cfg, {0.1});
    double prev = e0;
    for (const auto& s : ns.steps()) {
        CHECK(s.energy <= prev);
        CHECK(s.divergence <= 1e-9);
        prev = s.energy;
    }
}

TEST_CASE("RK4 self-convergence") {
    const Grid g(2, 32, 1.0);
    const VectorField u0 = perturbed_taylor_green(g);
    auto run = [&](double dt) {
        SolverConfig cfg;
        cfg.eps = 0.01;
        cfg.T = 1.0;
        cfg.fixed_dt = dt;
        return evolve(u0, cfg, {1.0}).state(0);
    };
    const VectorField a = run(0.1), b = run(0.05), c = run(0.025);
    const double order = std::log2(l2_norm(a - b) / l2_norm(b - c));
    CHECK(order >= 3.5);
}

TEST_CASE("solver arguments") {
    const Grid g(2, 32, 1.0);
    const VectorField u0 = taylor_green(g);
    SolverConfig cfg;
    CHECK_THROWS_AS(evolve(u0, cfg, {0.2}), ArgumentError);
    CHECK_THROWS_AS(evolve(u0, cfg, {0.05, 0.02}), ArgumentError);
    cfg.cfl = 1.5;
    CHECK_THROWS_AS(evolve(u0, cfg, {0.05}), ArgumentError);
    cfg.cfl = 0.5;
    cfg.eps = 2.0;
    CHECK_THROWS_AS(evolve(u0, cfg, {0.05}), ArgumentError);

    SpectralField high(g);
    high.at({12, 1, 0}) = 1.0;
    high.at({-12, -1, 0}) = 1.0;
    CHECK_THROWS_AS(evolve(planar_curl(high), SolverConfig{}, {0.05}), ResolutionError);
}

TEST_CASE("first-order approximants") {
    Shell3 s;
    const double eps = s.datum.viscosity();
    CHECK(l2_norm(u1_heat(s.u0, 0.0, eps) - s.u0) == 0.0);
    CHECK(l2_norm(u1_heat(s.u0, 0.05, 0.0) - s.u0) == 0.0);
    // Plancherel: ||exp(t eps Delta) u0||^2 = L^-d sum exp(-2 t eps |xi|^2) |u0|^2.
    const Eigen::ArrayXd& k2 = s.grid.wavenumber_sq();
    double direct = 0.0;
    for (int a = 0; a < 2; ++a) direct += ((-2.0 * 0.05 * eps * k2).exp() * s.u0[a].coeffs().abs2()).sum();
    CHECK(l2_norm(u1_heat(s.u0, 0.05, eps)) == doctest::Approx(std::sqrt(direct / s.grid.volume())).epsilon(1e-12));

    CHECK(l2_norm(u2_duhamel(s.u0, 0.0, eps, 17)) == 0.0);
    const double t = 0.05;
    const VectorField n0 = nonlinear_term(s.u0);
    const VectorField u2_euler = u2_duhamel(s.u0, t, 0.0, 17);
    CHECK(l2_norm(u2_euler) == doctest::Approx(t * l2_norm(n0)).epsilon(1e-10));
    VectorField sum = u2_euler;
    sum += t * n0;
    CHECK(l2_norm(sum) <= 1e-10 * t * l2_norm(n0));

    double change = 1.0;
    const VectorField coarse = u2_duhamel(s.u0, t, eps, 17, Strictness::strict, &change);
    const VectorField fine = u2_duhamel(s.u0, t, eps, 33);
    CHECK(change <= 1e-8);
    CHECK(l2_norm(coarse - fine) <= 1e-8 * l2_norm(fine));
    CHECK_THROWS_AS(u2_duhamel(s.u0, t, eps, 16), ArgumentError);
    CHECK_THROWS_AS(u2_duhamel(s.u0, t, eps, 7), ArgumentError);
}

TEST_CASE("Duhamel series matches single-time quadrature") {
    Shell3 s;
    const double eps = s.datum.viscosity();
    const double h = 0.01 / 16;
    const DuhamelSeries series = duhamel_series(s.u0, eps, {0.01, 0.02}, h);
    CHECK(series.evaluations == 33);
    // u2_duhamel with 2 (nodes - 1) = 32 fine intervals at t = 0.02 uses step h.
    const VectorField direct = u2_duhamel(s.u0, 0.02, eps, 17);
    VectorField sum = series.coarse[1];
    sum += direct;
    CHECK(l2_norm(sum) <= 1e-14 * l2_norm(direct));
    CHECK_THROWS_AS(duhamel_series(s.u0, eps, {0.011}, h), ArgumentError);
}

TEST_CASE("second-order residuals") {
    Shell3 s;
    const BesovParams bp;
    const std::vector<double> times{0.01, 0.02, 0.04};
    const Trajectory euler = evolve(s.u0, SolverConfig{}, times);
    std::vector<double> yy1;
    for (double t : times) yy1.push_back(euler_residual_yy1(s.u0, t, euler, bp));
    CHECK(euler_residual_yy1(s.u0, 0.0, euler, bp) == 0.0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double slope = std::log(yy1[i] / yy1[i - 1]) / std::log(times[i] / times[i - 1]);
        CHECK(slope >= 1.8);
        CHECK(slope <= 2.3);
    }

    SolverConfig ns_cfg;
    ns_cfg.eps = s.datum.viscosity();
    const Trajectory ns = evolve(s.u0, ns_cfg, times);
    const double r1 = ns_residual_yy2(s.u0, 0.01, ns_cfg.eps, ns, 33, bp);
    const double r2 = ns_residual_yy2(s.u0, 0.02, ns_cfg.eps, ns, 65, bp);
    CHECK(std::log(r2 / r1) / std::log(2.0) >= 1.8);

    // Residuals are tiny next to the first-order terms they cancel.
    const double first = besov_norm(0.02 * nonlinear_term(s.u0), bp);
    CHECK(yy1[1] < 1e-3 * first);

    CHECK_THROWS_AS(euler_residual_yy1(s.u0, 0.01, ns, bp), ArgumentError);
    VectorField other = s.u0;
    other *= 2.0;
    CHECK_THROWS_AS(euler_residual_yy1(other, 0.01, euler, bp), ArgumentError);
    CHECK_THROWS_AS(euler_residual_yy1(s.u0, 0.03, euler, bp), ArgumentError);
}
