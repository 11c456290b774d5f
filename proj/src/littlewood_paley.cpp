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

#include "invlab/littlewood_paley.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "invlab/errors.hpp"
#include "invlab/spectral_ops.hpp"

namespace invlab {

namespace {

constexpr double kInner = 0.75;
constexpr double kOuter = 4.0 / 3.0;

void stderr_sink(const std::string& message) { std::fprintf(stderr, "warning: %s\n", message.c_str()); }

void (*g_warning_sink)(const std::string&) = stderr_sink;

// Neumaier compensated accumulator.
struct Accumulator {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + carry; }
};

void require_block_index(int j) {
    if (j < -1) throw ArgumentError("dyadic block index must be >= -1, got " + std::to_string(j));
}

Eigen::ArrayXd radial_symbol(const Grid& g, double (*fn)(double), double scale) {
    return g.wavenumber_abs().unaryExpr([fn, scale](double rho) { return fn(scale * rho); });
}

// Relative weight of the coefficients the partition cannot resolve: modes
// outside the ball where the blocks sum to one, and the unpaired Nyquist
// layer max |m_j| = N/2.
void check_resolution(const VectorField& v, Strictness mode) {
    const Grid& g = v.grid();
    const DyadicPartition part = build_partition(g);
    const double radius = part.resolved_radius();
    const auto& kabs = g.wavenumber_abs();
    double top = 0.0;
    for (const auto& c : v.components()) top = std::max(top, c.coeffs().abs().maxCoeff());
    if (top == 0.0) return;
    const double cut = 1e-12 * top;
    const int half = g.n() / 2;
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto i = static_cast<Eigen::Index>(f);
        double mag = 0.0;
        for (const auto& c : v.components()) mag = std::max(mag, std::abs(c.coeffs()[i]));
        if (mag <= cut) continue;
        bool outer = kabs[i] > radius;
        const auto idx = g.unflatten(f);
        for (int a = 0; a < g.dim() && !outer; ++a) outer = idx[a] == half;
        if (!outer) continue;
        std::ostringstream msg;
        msg << "field support reaches the Nyquist shell of N = " << g.n()
            << "; Besov blocks are not resolved";
        if (mode == Strictness::strict) throw ResolutionError(msg.str());
        g_warning_sink(msg.str());
        return;
    }
}

std::vector<BlockNorm> report_l2(const VectorField& v, const BesovParams& bp) {
    const Grid& g = v.grid();
    const DyadicPartition part = build_partition(g);
    const auto& kabs = g.wavenumber_abs();
    std::vector<Accumulator> acc(static_cast<std::size_t>(part.j_max + 2));
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto i = static_cast<Eigen::Index>(f);
        double e = 0.0;
        for (const auto& c : v.components()) e += std::norm(c.coeffs()[i]);
        if (e == 0.0) continue;
        const double rho = kabs[i];
        const double low = lp_theta(rho);
        if (low != 0.0) acc[0].add(low * low * e);
        if (rho <= kInner) continue;
        // phi(2^-j rho) is nonzero only for 3/4 < 2^-j rho < 8/3.
        const int centre = static_cast<int>(std::floor(std::log2(rho)));
        for (int j = std::max(0, centre - 2); j <= std::min(part.j_max, centre + 1); ++j) {
            const double w = lp_phi(std::ldexp(rho, -j));
            if (w != 0.0) acc[static_cast<std::size_t>(j + 1)].add(w * w * e);
        }
    }
    std::vector<BlockNorm> out;
    const double inv_volume = 1.0 / g.volume();
    for (int j = -1; j <= part.j_max; ++j) {
        const double block = std::sqrt(acc[static_cast<std::size_t>(j + 1)].value() * inv_volume);
        out.push_back({j, std::pow(2.0, j * bp.s) * block});
    }
    return out;
}

std::vector<BlockNorm> report_general(const VectorField& v, const BesovParams& bp) {
    const DyadicPartition part = build_partition(v.grid());
    std::vector<BlockNorm> out;
    for (int j = -1; j <= part.j_max; ++j) {
        const Eigen::ArrayXd sym = part.block_symbol(j);
        std::vector<SpectralField> comps;
        bool nonzero = false;
        for (const auto& c : v.components()) {
            comps.emplace_back(c.grid(), sym * c.coeffs());
            nonzero = nonzero || (comps.back().coeffs().abs().maxCoeff() > 0.0);
        }
        const double block = nonzero ? lp_norm(VectorField(std::move(comps)), bp.p) : 0.0;
        out.push_back({j, std::pow(2.0, j * bp.s) * block});
    }
    return out;
}

void require_exponents(const BesovParams& bp) {
    if (!(bp.p >= 1.0) || !(bp.r >= 1.0) || !std::isfinite(bp.s)) {
        throw ArgumentError("Besov exponents need p, r in [1, inf] and finite s; got " + bp.describe());
    }
}

} // namespace

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

double lp_theta(double rho) { return 1.0 - smooth_step((rho - kInner) / (kOuter - kInner)); }

double lp_phi(double rho) { return lp_theta(0.5 * rho) - lp_theta(rho); }

double DyadicPartition::resolved_radius() const { return kInner * std::ldexp(1.0, j_max + 1); }

Eigen::ArrayXd DyadicPartition::block_symbol(int j) const {
    require_block_index(j);
    if (j == -1) return radial_symbol(grid, lp_theta, 1.0);
    return radial_symbol(grid, lp_phi, std::ldexp(1.0, -j));
}

Eigen::ArrayXd DyadicPartition::low_pass_symbol(int n) const {
    return radial_symbol(grid, lp_theta, std::ldexp(1.0, -n));
}

DyadicPartition build_partition(const Grid& grid) {
    int j = 0;
    while (kInner * std::ldexp(1.0, j + 1) < grid.nyquist()) ++j;
    return DyadicPartition{grid, j};
}

SpectralField dyadic_block(int j, const SpectralField& f) {
    require_block_index(j);
    return SpectralField(f.grid(), build_partition(f.grid()).block_symbol(j) * f.coeffs());
}

VectorField dyadic_block(int j, const VectorField& v) {
    require_block_index(j);
    const Eigen::ArrayXd sym = build_partition(v.grid()).block_symbol(j);
    std::vector<SpectralField> out;
    for (const auto& c : v.components()) out.emplace_back(c.grid(), sym * c.coeffs());
    return VectorField(std::move(out));
}

SpectralField low_pass(int n, const SpectralField& f) {
    return SpectralField(f.grid(), build_partition(f.grid()).low_pass_symbol(n) * f.coeffs());
}

VectorField low_pass(int n, const VectorField& v) {
    const Eigen::ArrayXd sym = build_partition(v.grid()).low_pass_symbol(n);
    std::vector<SpectralField> out;
    for (const auto& c : v.components()) out.emplace_back(c.grid(), sym * c.coeffs());
    return VectorField(std::move(out));
}

bool BesovParams::admissible() const {
    const double critical = (std::isinf(p) ? 0.0 : d / p) + 1.0;
    if (s > critical) return std::isfinite(r);
    return s == critical && r == 1.0;
}

void BesovParams::validate() const {
    if (d != 2 && d != 3) {
        throw UnsupportedDimensionError("dimension must be 2 or 3, got " + std::to_string(d));
    }
    if (!(p >= 1.0) || !(r >= 1.0)) throw ValidationError("p and r must lie in [1, inf]; got " + describe());
    if (!admissible()) {
        throw ValidationError("(s, p, r) = " + describe() +
                              " violates condition (1.1): need s > d/p + 1 with r < inf, or s = d/p + 1 with r = 1");
    }
}

BesovParams BesovParams::with_s(double sigma) const {
    BesovParams out = *this;
    out.s = sigma;
    return out;
}

std::string BesovParams::describe() const {
    std::ostringstream os;
    os << "(s=" << s << ", p=" << p << ", r=" << r << ", d=" << d << ")";
    return os.str();
}

void set_warning_sink(void (*sink)(const std::string&)) { g_warning_sink = sink ? sink : stderr_sink; }

double combine_blocks(const std::vector<BlockNorm>& blocks, double r) {
    if (std::isinf(r)) {
        double m = 0.0;
        for (const auto& b : blocks) m = std::max(m, b.weighted);
        return m;
    }
    Accumulator acc;
    for (const auto& b : blocks) acc.add(std::pow(b.weighted, r));
    return std::pow(acc.value(), 1.0 / r);
}

std::vector<BlockNorm> block_spectrum_report(const VectorField& v, const BesovParams& bp) {
    require_exponents(bp);
    return bp.p == 2.0 ? report_l2(v, bp) : report_general(v, bp);
}

std::vector<BlockNorm> block_spectrum_report(const SpectralField& f, const BesovParams& bp) {
    return block_spectrum_report(VectorField({f}), bp);
}

double besov_norm(const VectorField& v, const BesovParams& bp, Strictness mode) {
    require_exponents(bp);
    check_resolution(v, mode);
    return combine_blocks(block_spectrum_report(v, bp), bp.r);
}

double besov_norm(const SpectralField& f, const BesovParams& bp, Strictness mode) {
    return besov_norm(VectorField({f}), bp, mode);
}

} // namespace invlab
