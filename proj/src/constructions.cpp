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

#include "invlab/constructions.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "invlab/errors.hpp"
#include "invlab/spectral_ops.hpp"

namespace invlab {

namespace {

constexpr int kQuadratureIntervals = 2048;
constexpr double kProfileStep = 0.25;
constexpr double kProfileExtent = 2000.0;

// Simpson nodes and weights for int_0^width hat(xi) g(xi) dxi.
struct ProfileQuadrature {
    Eigen::ArrayXd xi;
    Eigen::ArrayXd weight;
};

ProfileQuadrature quadrature(const ProfileBump& b) {
    const int k = kQuadratureIntervals;
    const double h = b.width / k;
    ProfileQuadrature q{Eigen::ArrayXd(k + 1), Eigen::ArrayXd(k + 1)};
    for (int i = 0; i <= k; ++i) {
        q.xi[i] = h * i;
        const double s = (i == 0 || i == k) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        q.weight[i] = s * h / 3.0 * b(q.xi[i]);
    }
    return q;
}

double physical_from(const ProfileQuadrature& q, double x) {
    return ((x * q.xi).cos() * q.weight).sum() / std::numbers::pi;
}

ProfileDiagnostics diagnose(const ProfileBump& b) {
    const ProfileQuadrature q = quadrature(b);
    ProfileDiagnostics out;
    out.phi0 = physical_from(q, 0.0);

    const int count = static_cast<int>(kProfileExtent / kProfileStep) + 1;
    Eigen::ArrayXd phi(count);
    for (int i = 0; i < count; ++i) phi[i] = physical_from(q, kProfileStep * i);

    int first_low = 1;
    while (first_low < count && phi[first_low] >= 0.5 * out.phi0) ++first_low;
    double lo = kProfileStep * (first_low - 1), hi = kProfileStep * first_low;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (physical_from(q, mid) >= 0.5 * out.phi0 ? lo : hi) = mid;
    }
    out.delta = lo;

    // Trapezoid over [0, extent], doubled for the even extension.
    auto integral = [&](const Eigen::ArrayXd& g) {
        return 2.0 * kProfileStep * (g.sum() - 0.5 * g[0] - 0.5 * g[count - 1]);
    };
    const Eigen::ArrayXd mag = phi.abs();
    const double l1 = integral(mag);
    out.norm = {l1, std::sqrt(integral(mag.square())), mag.maxCoeff()};
    out.sup_sampled = mag.maxCoeff();

    const double half_period = std::numbers::pi * b.radius;
    Eigen::ArrayXd outside = mag;
    for (int i = 0; i < count; ++i) {
        if (kProfileStep * i <= half_period) outside[i] = 0.0;
    }
    out.tail_mass = integral(outside) / l1;

    const std::array<double, 3> inv_p{1.0, 0.5, 0.0};
    for (int k = 0; k < 3; ++k) {
        out.c1[k] = 0.5 * out.phi0 * std::pow(2.0 * out.delta, inv_p[k]);
        out.c2[k] = std::pow(out.phi0, 1.0 - inv_p[k]) * std::pow(l1, inv_p[k]);
    }
    return out;
}

void require_shell(const ProfileBump& bump, int n) {
    if (n < 3) throw ConstructionError("shell index must be >= 3, got " + std::to_string(n));
    const double modes = 17.0 / 12.0 * std::ldexp(1.0, n) * bump.radius;
    if (std::abs(modes - std::round(modes)) > 1e-9) {
        throw ConstructionError("carrier 17/12 2^n is not on the lattice of radius " +
                                std::to_string(bump.radius));
    }
}

long carrier_modes(const ProfileBump& bump, int n) {
    return std::lround(17.0 / 12.0 * std::ldexp(1.0, n) * bump.radius);
}

} // namespace

double ProfileBump::operator()(double xi) const {
    const double a = std::abs(xi);
    return 1.0 - smooth_step((a - plateau) / (width - plateau));
}

double ProfileBump::physical(double x) const { return physical_from(quadrature(*this), x); }

ProfileBump build_profile_bump(const Grid& grid, std::optional<double> width_override) {
    ProfileBump b;
    b.dim = grid.dim();
    b.width = width_override.value_or(std::ldexp(1.0, -b.dim));
    if (!(b.width > 0.0) || std::sqrt(static_cast<double>(b.dim)) * b.width > 0.5) {
        throw ArgumentError("profile width " + std::to_string(b.width) +
                            " breaks the annulus containment sqrt(d) a <= 1/2");
    }
    b.plateau = std::ldexp(b.width, -b.dim);
    b.radius = grid.radius();
    long m = 0;
    while (b((m + 1) / b.radius) > 0.0) ++m;
    b.support_modes = m;
    b.diagnostics = diagnose(b);
    return b;
}

double ShellDatum::amplitude() const { return std::pow(2.0, -n * (bp.s + 1.0)); }

double ShellDatum::carrier() const { return 17.0 / 12.0 * std::ldexp(1.0, n); }

double ShellDatum::viscosity() const { return std::ldexp(1.0, -2 * n); }

long datum_max_mode(const ProfileBump& bump, int n) {
    return carrier_modes(bump, n) + bump.support_modes;
}

SpectralField build_fn_spectral(const ProfileBump& bump, int n, const Grid& grid, double shift) {
    require_shell(bump, n);
    if (grid.radius() != bump.radius || grid.dim() != bump.dim) {
        throw ConstructionError("profile bump was sampled for a different lattice");
    }
    const long top = datum_max_mode(bump, n);
    if (top > grid.dealias_limit()) {
        throw ResolutionError("shell " + std::to_string(n) + " datum reaches |m_1| = " + std::to_string(top) +
                              "; N = " + std::to_string(grid.n()) + " is too coarse, required N = " +
                              std::to_string(required_samples(top)));
    }
    const long c = carrier_modes(bump, n);
    const long w = bump.support_modes;
    const double r = grid.radius();
    const int d = grid.dim();

    // The cosine splits the mass between the two sidebands.
    SpectralField f(grid);
    for (int sign : {-1, 1}) {
        for (long m1 = sign * c - w; m1 <= sign * c + w; ++m1) {
            const double a1 = 0.5 * (bump((m1 - c) / r) + bump((m1 + c) / r));
            const double phase = -static_cast<double>(m1) / r * shift;
            const Complex rot(std::cos(phase), std::sin(phase));
            for (long m2 = -w; m2 <= w; ++m2) {
                const double a2 = bump(m2 / r);
                if (d == 2) {
                    f.at({m1, m2, 0}) = a1 * a2 * rot;
                    continue;
                }
                for (long m3 = -w; m3 <= w; ++m3) f.at({m1, m2, m3}) = a1 * a2 * bump(m3 / r) * rot;
            }
        }
    }
    return f;
}

RealField build_fn(const ProfileBump& bump, int n, const Grid& grid) {
    return to_physical(build_fn_spectral(bump, n, grid));
}

VectorField planar_curl(const SpectralField& stream) {
    const Grid& g = stream.grid();
    SpectralField v1 = partial(stream, 1);
    v1 *= Complex(-1.0, 0.0);
    std::vector<SpectralField> comps{std::move(v1), partial(stream, 0)};
    if (g.dim() == 3) comps.emplace_back(g);
    return VectorField(std::move(comps));
}

VectorField build_u0n(const ShellDatum& datum, const Grid& grid, const ProfileBump& bump) {
    if (datum.bp.d != grid.dim()) throw ConstructionError("datum dimension does not match the grid");
    VectorField u = planar_curl(build_fn_spectral(bump, datum.n, grid, datum.shift));
    u *= datum.amplitude();
    u.certify_solenoidal(1e-12);
    return u;
}

VectorField build_background_psi(const Grid& grid, std::uint64_t seed, int band, const BesovParams& bp) {
    const DyadicPartition part = build_partition(grid);
    if (band < 0 || band > part.j_max - 2) {
        throw ArgumentError("background band " + std::to_string(band) + " needs 0 <= band <= j_max - 2 = " +
                            std::to_string(part.j_max - 2));
    }
    const double r = grid.radius();
    const double cutoff = std::ldexp(1.0, band);
    const long box = static_cast<long>(std::floor(cutoff * r));
    const int d = grid.dim();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SpectralField stream(grid);
    std::array<long, 3> m{0, 0, 0};
    const long span = 2 * box + 1;
    const long total = d == 2 ? span * span : span * span * span;
    for (long flat = 0; flat < total; ++flat) {
        long rest = flat;
        for (int a = d - 1; a >= 0; --a) {
            m[a] = rest % span - box;
            rest /= span;
        }
        // Draw only for the half lattice whose first nonzero entry is positive.
        int lead = 0;
        while (lead < d && m[lead] == 0) ++lead;
        if (lead == d || m[lead] < 0) continue;
        const double re = normal(rng);
        const double im = normal(rng);
        double xi2 = 0.0;
        for (int a = 0; a < d; ++a) xi2 += (m[a] / r) * (m[a] / r);
        const double rho = std::sqrt(xi2);
        // Smooth decay, and zero at |xi| = 2^band.
        const double weight = std::pow(1.0 + xi2, -0.5 * (bp.s + 1.0)) * lp_theta(4.0 / 3.0 * rho / cutoff);
        if (weight == 0.0) continue;
        const Complex z(weight * re, weight * im);
        stream.at(m) = z;
        stream.at({-m[0], -m[1], -m[2]}) = std::conj(z);
    }
    VectorField psi = planar_curl(stream);
    const double norm = besov_norm(psi, bp);
    if (!(norm > 0.0)) throw ConstructionError("background field vanished");
    psi *= 1.0 / norm;
    psi.certify_solenoidal(1e-12);
    return psi;
}

} // namespace invlab
