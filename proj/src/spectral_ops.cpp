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

#include "invlab/spectral_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "invlab/errors.hpp"

namespace invlab {

namespace {

const Complex kI{0.0, 1.0};

void require_exponent(double p) {
    if (!(p >= 1.0)) throw ArgumentError("L^p exponent must lie in [1, inf], got " + std::to_string(p));
}

int oversampling_factor(const Grid& g) {
    int factor = 4;
    while (factor > 1 && g.n() * factor > 4096) factor /= 2;
    return factor;
}

} // namespace

double pairwise_sum(const Eigen::Ref<const Eigen::ArrayXd>& values) {
    constexpr Eigen::Index block = 1024;
    const Eigen::Index n = values.size();
    if (n <= block) return values.sum();
    const Eigen::Index half = n / 2;
    return pairwise_sum(values.head(half)) + pairwise_sum(values.tail(n - half));
}

// ---------------------------------------------------------------------------
// Multipliers

MultiplierSpec MultiplierSpec::radial(std::function<double(double)> symbol, Complex at_zero) {
    MultiplierSpec s;
    s.kind = Kind::radial;
    s.radial_symbol = std::move(symbol);
    s.at_zero = at_zero;
    return s;
}

MultiplierSpec MultiplierSpec::componentwise(std::function<Complex(std::span<const double>)> symbol,
                                             Complex at_zero) {
    MultiplierSpec s;
    s.kind = Kind::componentwise;
    s.vector_symbol = std::move(symbol);
    s.at_zero = at_zero;
    return s;
}

namespace {

Eigen::ArrayXcd evaluate_symbol(const Grid& g, const MultiplierSpec& sigma) {
    Eigen::ArrayXcd values(g.size());
    const auto& kabs = g.wavenumber_abs();
    std::array<double, 3> xi{0.0, 0.0, 0.0};
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto i = static_cast<Eigen::Index>(f);
        Complex v;
        if (kabs[i] == 0.0) {
            v = sigma.at_zero;
        } else if (sigma.kind == MultiplierSpec::Kind::radial) {
            v = sigma.radial_symbol(kabs[i]);
        } else {
            for (int a = 0; a < g.dim(); ++a) xi[a] = g.wavenumber(a)[i];
            v = sigma.vector_symbol(std::span<const double>(xi.data(), static_cast<std::size_t>(g.dim())));
        }
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            const auto idx = g.unflatten(f);
            std::string where;
            for (int a = 0; a < g.dim(); ++a) where += (a ? "," : "") + std::to_string(g.mode(idx[a]));
            throw ConfigurationError("multiplier undefined at lattice mode (" + where + ")");
        }
        values[i] = v;
    }
    return values;
}

} // namespace

SpectralField apply_multiplier(const SpectralField& f, const MultiplierSpec& sigma) {
    return SpectralField(f.grid(), f.coeffs() * evaluate_symbol(f.grid(), sigma));
}

VectorField apply_multiplier(const VectorField& v, const MultiplierSpec& sigma) {
    const Eigen::ArrayXcd s = evaluate_symbol(v.grid(), sigma);
    std::vector<SpectralField> out;
    for (const auto& c : v.components()) out.emplace_back(c.grid(), c.coeffs() * s);
    return VectorField(std::move(out));
}

// ---------------------------------------------------------------------------
// Differential operators

SpectralField partial(const SpectralField& f, int axis) {
    if (axis < 0 || axis >= f.grid().dim()) throw ArgumentError("derivative axis out of range");
    return SpectralField(f.grid(), (f.grid().wavenumber(axis) * f.coeffs()) * kI);
}

VectorField gradient(const SpectralField& f) {
    std::vector<SpectralField> comps;
    for (int a = 0; a < f.grid().dim(); ++a) comps.push_back(partial(f, a));
    return VectorField(std::move(comps));
}

SpectralField divergence(const VectorField& v) {
    const Grid& g = v.grid();
    Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(g.size());
    for (int a = 0; a < v.dim(); ++a) acc += g.wavenumber(a) * v[a].coeffs();
    return SpectralField(g, acc * kI);
}

SpectralField laplacian(const SpectralField& f) {
    return SpectralField(f.grid(), -(f.grid().wavenumber_sq() * f.coeffs()));
}

VectorField perp_gradient(const SpectralField& f) {
    if (f.grid().dim() != 2) {
        throw UnsupportedDimensionError("perp_gradient is defined for d = 2 only, got d = " +
                                        std::to_string(f.grid().dim()));
    }
    SpectralField d1 = partial(f, 0);
    SpectralField d2 = partial(f, 1);
    d2.coeffs() = -d2.coeffs();
    return VectorField({std::move(d2), std::move(d1)});
}

// ---------------------------------------------------------------------------
// Heat semigroup

namespace {

void require_heat_args(double t, double eps) {
    if (!(t >= 0.0)) throw ArgumentError("heat propagation needs t >= 0, got " + std::to_string(t));
    if (!(eps >= 0.0)) throw ArgumentError("viscosity must be >= 0, got " + std::to_string(eps));
}

} // namespace

SpectralField heat_propagate(const SpectralField& f, double t, double eps) {
    require_heat_args(t, eps);
    if (t == 0.0 || eps == 0.0) return f;
    const Eigen::ArrayXd factor = (-(t * eps) * f.grid().wavenumber_sq()).exp();
    return SpectralField(f.grid(), factor * f.coeffs());
}

VectorField heat_propagate(const VectorField& v, double t, double eps) {
    require_heat_args(t, eps);
    if (t == 0.0 || eps == 0.0) return v;
    const Eigen::ArrayXd factor = (-(t * eps) * v.grid().wavenumber_sq()).exp();
    std::vector<SpectralField> out;
    for (const auto& c : v.components()) out.emplace_back(c.grid(), factor * c.coeffs());
    return VectorField(std::move(out));
}

VectorField heat_minus_identity(const VectorField& v, double t, double eps) {
    require_heat_args(t, eps);
    const Eigen::ArrayXd factor = (-(t * eps) * v.grid().wavenumber_sq()).unaryExpr([](double x) {
        return std::expm1(x);
    });
    std::vector<SpectralField> out;
    for (const auto& c : v.components()) out.emplace_back(c.grid(), factor * c.coeffs());
    return VectorField(std::move(out));
}

// ---------------------------------------------------------------------------
// Leray projection

VectorField leray_complement(const VectorField& v) {
    const Grid& g = v.grid();
    const auto& k2 = g.wavenumber_sq();
    Eigen::ArrayXcd dot = Eigen::ArrayXcd::Zero(g.size());
    for (int a = 0; a < v.dim(); ++a) dot += g.wavenumber(a) * v[a].coeffs();
    const Eigen::ArrayXd inv = (k2 > 0.0).select(k2.inverse(), 0.0);
    dot *= inv;
    std::vector<SpectralField> out;
    for (int a = 0; a < v.dim(); ++a) out.emplace_back(g, g.wavenumber(a) * dot);
    return VectorField(std::move(out));
}

VectorField leray_project(const VectorField& v) { return v - leray_complement(v); }

// ---------------------------------------------------------------------------
// Dealiasing

SpectralField dealias(SpectralField f) {
    f.coeffs() *= f.grid().dealias_mask();
    return f;
}

VectorField dealias(VectorField v) {
    const auto& mask = v.grid().dealias_mask();
    for (int a = 0; a < v.dim(); ++a) v[a].coeffs() *= mask;
    return v;
}

long max_mode(const SpectralField& f, double rel_tol) {
    const Grid& g = f.grid();
    const Eigen::ArrayXd mag = f.coeffs().abs();
    const double top = mag.maxCoeff();
    if (top == 0.0) return 0;
    const double cut = rel_tol * top;
    long worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (mag[static_cast<Eigen::Index>(i)] <= cut) continue;
        const auto idx = g.unflatten(i);
        for (int a = 0; a < g.dim(); ++a) worst = std::max<long>(worst, std::abs(g.mode(idx[a])));
    }
    return worst;
}

long max_mode(const VectorField& v, double rel_tol) {
    double top = 0.0;
    for (const auto& c : v.components()) top = std::max(top, c.coeffs().abs().maxCoeff());
    if (top == 0.0) return 0;
    long worst = 0;
    for (const auto& c : v.components()) {
        const double own = c.coeffs().abs().maxCoeff();
        if (own == 0.0) continue;
        worst = std::max(worst, max_mode(c, rel_tol * top / own));
    }
    return worst;
}

void require_dealias_safe(const VectorField& v, const char* what) {
    const long m = max_mode(v);
    if (m > v.grid().dealias_limit()) {
        throw ResolutionError(std::string(what) + ": support reaches |m_j| = " + std::to_string(m) +
                              ", beyond the dealias-safe limit " +
                              std::to_string(v.grid().dealias_limit()) + " of N = " +
                              std::to_string(v.grid().n()) + "; required N = " +
                              std::to_string(required_samples(m)));
    }
}

// ---------------------------------------------------------------------------
// Nonlinearity

namespace detail {

VectorField advect_unchecked(const VectorField& u, const VectorField& v, bool dealias_output,
                             double* max_speed) {
    const Grid& g = u.grid();
    const int d = u.dim();
    std::vector<RealField> up = to_physical(u);
    if (max_speed) {
        Eigen::ArrayXd speed2 = Eigen::ArrayXd::Zero(g.size());
        for (const auto& c : up) speed2 += c.values().square();
        *max_speed = std::sqrt(speed2.maxCoeff());
    }
    std::vector<SpectralField> out;
    out.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < v.dim(); ++i) {
        RealField acc(g);
        for (int j = 0; j < d; ++j) {
            const RealField dv = to_physical(partial(v[i], j));
            acc.values() += up[static_cast<std::size_t>(j)].values() * dv.values();
        }
        SpectralField s = to_spectral(acc);
        if (dealias_output) s.coeffs() *= g.dealias_mask();
        out.push_back(std::move(s));
    }
    return VectorField(std::move(out));
}

} // namespace detail

VectorField advect(const VectorField& u, const VectorField& v, bool dealias_output) {
    require_same_grid(u.grid(), v.grid(), "advect");
    if (u.dim() != v.dim() || u.dim() != u.grid().dim()) {
        throw ConfigurationError("advect: fields need one component per dimension");
    }
    if (dealias_output) {
        require_dealias_safe(u, "advect (transport field)");
        require_dealias_safe(v, "advect (advected field)");
    }
    return detail::advect_unchecked(u, v, dealias_output, nullptr);
}

// ---------------------------------------------------------------------------
// Resampling

SpectralField resample(const SpectralField& f, const Grid& target) {
    const Grid& g = f.grid();
    if (g.dim() != target.dim() || g.radius() != target.radius()) {
        throw ArgumentError("resample: grids differ in dimension or radius");
    }
    if (g == target) return f;
    const int half = target.n() / 2;
    // Same cutoff as max_mode: transform roundoff is not content.
    const double floor = 1e-13 * (f.coeffs().size() ? f.coeffs().abs().maxCoeff() : 0.0);
    SpectralField out(target);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        const Complex c = f.coeffs()[static_cast<Eigen::Index>(flat)];
        const auto idx = g.unflatten(flat);
        std::array<int, 3> dst{0, 0, 0};
        bool fits = true;
        long reach = 0;
        for (int a = 0; a < g.dim(); ++a) {
            const int m = g.mode(idx[a]);
            reach = std::max(reach, static_cast<long>(std::abs(m)));
            // Keep the target's unpaired Nyquist index empty.
            if (m >= half || m <= -half || (g.n() % 2 == 0 && m == -g.n() / 2)) fits = false;
            dst[a] = target.index_of_mode(m);
        }
        if (!fits) {
            if (std::abs(c) > floor) {
                throw ResolutionError("resample: mode outside the target lattice; required N = " +
                                      std::to_string(required_samples(reach)));
            }
            continue;
        }
        out.coeffs()[static_cast<Eigen::Index>(target.flat_index(dst))] = c;
    }
    return out;
}

VectorField resample(const VectorField& v, const Grid& target) {
    std::vector<SpectralField> out;
    for (const auto& c : v.components()) out.push_back(resample(c, target));
    VectorField r(std::move(out));
    if (v.solenoidal()) r.certify_solenoidal(1e-10);
    return r;
}

// ---------------------------------------------------------------------------
// Translation

SpectralField translate(const SpectralField& f, std::span<const double> shift) {
    const Grid& g = f.grid();
    Eigen::ArrayXd phase = Eigen::ArrayXd::Zero(g.size());
    for (int a = 0; a < g.dim() && a < static_cast<int>(shift.size()); ++a) {
        if (shift[a] != 0.0) phase += shift[a] * g.wavenumber(a);
    }
    Eigen::ArrayXcd rot(g.size());
    rot.real() = phase.cos();
    rot.imag() = -phase.sin();
    return SpectralField(g, f.coeffs() * rot);
}

VectorField translate(const VectorField& v, std::span<const double> shift) {
    std::vector<SpectralField> out;
    for (const auto& c : v.components()) out.push_back(translate(c, shift));
    return VectorField(std::move(out));
}

// ---------------------------------------------------------------------------
// Norms

double lp_norm(const RealField& f, double p) {
    require_exponent(p);
    const auto& x = f.values();
    if (std::isinf(p)) return x.abs().maxCoeff();
    const double w = f.grid().cell_volume();
    if (p == 2.0) return std::sqrt(w * pairwise_sum(x.square()));
    if (p == 1.0) return w * pairwise_sum(x.abs());
    return std::pow(w * pairwise_sum(x.abs().pow(p)), 1.0 / p);
}

double lp_norm(std::span<const RealField> components, double p) {
    require_exponent(p);
    if (components.empty()) return 0.0;
    const Grid& g = components.front().grid();
    Eigen::ArrayXd mag2 = Eigen::ArrayXd::Zero(g.size());
    for (const auto& c : components) {
        require_same_grid(g, c.grid(), "lp_norm");
        mag2 += c.values().square();
    }
    return lp_norm(RealField(g, mag2.sqrt()), p);
}

double l2_norm(const SpectralField& f) {
    return std::sqrt(pairwise_sum(f.coeffs().abs2()) / f.grid().volume());
}

double l2_norm(const VectorField& v) {
    double total = 0.0;
    for (const auto& c : v.components()) total += pairwise_sum(c.coeffs().abs2());
    return std::sqrt(total / v.grid().volume());
}

double lp_norm(const SpectralField& f, double p) {
    require_exponent(p);
    if (p == 2.0) return l2_norm(f);
    if (std::isinf(p)) return lp_norm(to_physical_oversampled(f, oversampling_factor(f.grid())), p);
    return lp_norm(to_physical(f), p);
}

double lp_norm(const VectorField& v, double p) {
    require_exponent(p);
    if (p == 2.0) return l2_norm(v);
    std::vector<RealField> phys;
    if (std::isinf(p)) {
        const int factor = oversampling_factor(v.grid());
        for (const auto& c : v.components()) phys.push_back(to_physical_oversampled(c, factor));
    } else {
        phys = to_physical(v);
    }
    return lp_norm(std::span<const RealField>(phys), p);
}

} // namespace invlab
