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

#include "invlab/errors.hpp"
#include "invlab/experiments.hpp"
#include "invlab/spectral_ops.hpp"

using namespace invlab;

namespace {

VectorField from_physical(const Grid& g, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
    return to_spectral(std::vector<RealField>{RealField(g, a), RealField(g, b)});
}

const ResultRecord& find(const std::vector<ResultRecord>& rs, const std::string& q, std::optional<double> t) {
    for (const auto& r : rs) {
        if (r.quantity == q && r.t == t) return r;
    }
    FAIL("record " << q << " missing");
    return rs.front();
}

} // namespace

TEST_CASE("log-log slope") {
    const std::vector<double> t{0.005, 0.01, 0.02, 0.04, 0.08};
    std::vector<double> v;
    for (double x : t) v.push_back(3.0 * std::pow(x, 1.5));
    CHECK(log_log_slope(t, v) == doctest::Approx(1.5).epsilon(1e-12));
    v[2] = 0.0;
    CHECK(std::isnan(log_log_slope(t, v)));
}

TEST_CASE("exact advection against the closed form") {
    // u = (cos 3y, 0), v = (sin 5x, cos 4x) on R = 1:
    // u . grad v = cos 3y (5 cos 5x, -4 sin 4x).
    const Grid g(2, 16, 1.0), gx(2, 32, 1.0);
    const Eigen::ArrayXd x = g.coordinate(0), y = g.coordinate(1);
    const VectorField u = from_physical(g, (3.0 * y).cos(), Eigen::ArrayXd::Zero(g.size()));
    const VectorField v = from_physical(g, (5.0 * x).sin(), (4.0 * x).cos());
    const VectorField w = exact_advect(u, v, gx);
    CHECK(w.grid() == gx);

    const Eigen::ArrayXd X = gx.coordinate(0), Y = gx.coordinate(1);
    const auto phys = to_physical(w);
    const Eigen::ArrayXd e0 = (3.0 * Y).cos() * 5.0 * (5.0 * X).cos();
    const Eigen::ArrayXd e1 = -(3.0 * Y).cos() * 4.0 * (4.0 * X).sin();
    CHECK((phys[0].values() - e0).abs().maxCoeff() < 1e-12);
    CHECK((phys[1].values() - e1).abs().maxCoeff() < 1e-12);

    // reach 3 + 5 needs more than 16 points
    CHECK_THROWS_AS(exact_advect(u, v, Grid(2, 16, 1.0)), ResolutionError);
}

TEST_CASE("resampling keeps integer modes") {
    const Grid g(2, 16, 2.0), big(2, 64, 2.0);
    const Eigen::ArrayXd x = g.coordinate(0), y = g.coordinate(1);
    const VectorField v = from_physical(g, (x / 2.0 + 3.0 * y / 2.0).sin(), (2.0 * x).cos());
    const VectorField up = resample(v, big);
    CHECK(up[0].at({1, 3, 0}) == v[0].at({1, 3, 0}));
    // only the unpaired Nyquist roundoff is lost
    const VectorField down = resample(up, g);
    for (int c = 0; c < 2; ++c) {
        CHECK((down[c].coeffs() - v[c].coeffs()).abs().maxCoeff() <= 1e-13 * v[c].coeffs().abs().maxCoeff());
    }
    CHECK(resample(down, big)[0].coeffs().cwiseEqual(up[0].coeffs()).all());

    const Eigen::ArrayXd X = big.coordinate(0);
    const VectorField fine = from_physical(big, (6.0 * X).cos(), Eigen::ArrayXd::Zero(big.size()));
    CHECK_THROWS_AS(resample(fine, g), ResolutionError);
    CHECK_THROWS_AS(resample(v, Grid(2, 64, 1.0)), ArgumentError);
}

TEST_CASE("support radius and Taylor-Green") {
    const Grid g(2, 32, 1.0);
    const VectorField tg = taylor_green(g);
    CHECK(tg.solenoidal());
    CHECK(support_radius(tg) == doctest::Approx(std::sqrt(2.0)));
    CHECK(support_radius(VectorField::zeros(g)) == 0.0);
    CHECK_THROWS_AS(taylor_green(Grid(3, 16, 1.0)), UnsupportedDimensionError);
}

TEST_CASE("lab grids and sampling") {
    ExperimentConfig cfg;
    CHECK(ExperimentConfig::viscosity(3) == 0x1p-6);
    const std::vector<double> s = cfg.sample_times();
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::count(s.begin(), s.end(), cfg.t0) == 1);

    Lab lab(cfg);
    const Grid g3 = lab.grid_for(3);
    CHECK(g3.n() == 512);
    CHECK(lab.grid_for(5).n() == 2048);
    // exact products need twice the reach of the datum
    const VectorField u = lab.datum(3, g3);
    CHECK(lab.product_grid(3).n() / 2 > 2 * max_mode(u));
    CHECK(lab.background_grid(3).n() >= g3.n());
    CHECK(run_id("u", g3, 0.25, 7) == "u_N512_eps0.25_s7");
}

TEST_CASE("trajectory cache") {
    ExperimentConfig cfg;
    cfg.n_list = {3};
    Lab lab(cfg);
    const Grid g(2, 32, 1.0);
    const VectorField u = taylor_green(g);
    int sunk = 0;
    lab.sink = [&](const std::string&, const Trajectory&) { ++sunk; };
    const auto a = lab.evolve("tg", u, 0.01, {0.01, 0.02});
    const auto b = lab.evolve("tg", u, 0.01, {0.01, 0.02});
    CHECK(a.get() == b.get());
    CHECK(sunk == 1);
    CHECK(lab.cached_bytes() > 0);
    lab.clear();
    CHECK(lab.cached_bytes() == 0);
}

TEST_CASE("zero background reduces the perturbed gap to the plain gap") {
    // psi = 0 and k = 0: the perturbed difference must coincide with D.
    ExperimentConfig cfg;
    cfg.grid_policy = GridPolicy::fixed;
    cfg.samples = 1024;
    cfg.n_list = {3};
    cfg.thm13_n_list = {3};
    cfg.residual_n_list = {3};
    cfg.t_grid = {0.00125, 0.0025};
    cfg.t0 = 0.0025;
    cfg.psi_scale = 0.0;
    cfg.shift_k = 0.0;

    Lab lab(cfg);
    const auto plain = run_thm12(lab);
    lab.clear();
    const auto pert = run_thm13(lab);
    const double d = find(plain, "D", cfg.t0).value;
    const double p = find(pert, "perturbed_difference", cfg.t0).value;
    CHECK(d > 0.0);
    CHECK(std::abs(p - d) <= 1e-12 * d);
    CHECK(find(pert, "background_difference", cfg.t0).value == 0.0);
}
