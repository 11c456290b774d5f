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

#include "invlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "invlab/errors.hpp"
#include "invlab/spectral_ops.hpp"

namespace invlab {

namespace {

VectorField scaled(const VectorField& v, const Eigen::ArrayXd& factor) {
    std::vector<SpectralField> out;
    out.reserve(v.components().size());
    for (const auto& c : v.components()) out.emplace_back(c.grid(), factor * c.coeffs());
    return VectorField(std::move(out));
}

// a += s * b
void axpy(VectorField& a, double s, const VectorField& b) {
    for (int i = 0; i < a.dim(); ++i) a[i].coeffs() += s * b[i].coeffs();
}

double grid_max_speed(const VectorField& u) {
    const auto phys = to_physical(u);
    Eigen::ArrayXd s2 = Eigen::ArrayXd::Zero(u.grid().size());
    for (const auto& c : phys) s2 += c.values().square();
    return std::sqrt(s2.maxCoeff());
}

bool same_data(const VectorField& a, const VectorField& b) {
    if (a.grid() != b.grid() || a.dim() != b.dim()) return false;
    for (int i = 0; i < a.dim(); ++i) {
        if (!(a[i].coeffs() == b[i].coeffs()).all()) return false;
    }
    return true;
}

// Heat factors exp(-s eps |xi|^2), cached per step length.
class HeatFactors {
public:
    HeatFactors(const Grid& g, double eps) : k2_(g.wavenumber_sq()), eps_(eps) {}
    /// References stay valid until the next call to `trim`.
    const Eigen::ArrayXd& operator()(double s) {
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(s, (-(s * eps_) * k2_).exp()).first->second;
    }
    void trim() {
        if (cache_.size() > 6) cache_.clear();
    }

private:
    const Eigen::ArrayXd& k2_;
    double eps_;
    std::map<double, Eigen::ArrayXd> cache_;
};

} // namespace

// ---------------------------------------------------------------------------

void SolverConfig::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("solver horizon T must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ArgumentError("CFL factor must lie in (0, 1]");
    if (!(eps >= 0.0 && eps <= 1.0)) throw ArgumentError("viscosity must lie in [0, 1], got " + std::to_string(eps));
    if (dt_max && !(*dt_max > 0.0)) throw ArgumentError("dt_max must be positive");
    if (fixed_dt && !(*fixed_dt > 0.0)) throw ArgumentError("fixed_dt must be positive");
}

double SolverConfig::step_cap() const {
    if (fixed_dt) return *fixed_dt;
    return dt_max.value_or(T / 64.0);
}

Trajectory::Trajectory(VectorField initial, double eps) : initial_(std::move(initial)), eps_(eps) {}

std::size_t Trajectory::index_of(double t) const {
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (times_[i] == t) return i;
    }
    throw ArgumentError("trajectory has no sample at t = " + std::to_string(t));
}

VectorField Trajectory::state(std::size_t i) const {
    return heat_propagate(initial_, times_.at(i), eps_) + deviations_.at(i);
}

std::size_t Trajectory::bytes() const {
    const std::size_t per = initial_.grid().size() * sizeof(Complex) * static_cast<std::size_t>(initial_.dim());
    return per * (deviations_.size() + 1);
}

void Trajectory::append(double t, VectorField deviation) {
    times_.push_back(t);
    deviations_.push_back(std::move(deviation));
}

VectorField nonlinear_term(const VectorField& u, bool dealias_output) {
    return leray_project(advect(u, u, dealias_output));
}

VectorField u1_heat(const VectorField& u0, double t, double eps) { return heat_propagate(u0, t, eps); }

Trajectory evolve(const VectorField& u0, const SolverConfig& cfg, std::vector<double> sample_times) {
    cfg.validate();
    if (u0.dim() != u0.grid().dim()) throw ArgumentError("initial velocity needs d components");
    if (cfg.dealias) require_dealias_safe(u0, "evolve");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double s = sample_times[i];
        if (!(s >= 0.0 && s <= cfg.T)) {
            throw ArgumentError("sample time " + std::to_string(s) + " outside [0, T]");
        }
        if (i > 0 && !(s > sample_times[i - 1])) throw ArgumentError("sample times must increase strictly");
    }

    const Grid& g = u0.grid();
    const double eps = cfg.eps;
    Trajectory traj(u0, eps);
    HeatFactors heat(g, eps);

    auto rhs = [&](double tau, const VectorField& w, double* speed) {
        VectorField u = heat_propagate(u0, tau, eps);
        u += w;
        VectorField f = leray_project(detail::advect_unchecked(u, u, cfg.dealias, speed));
        f *= -1.0;
        return f;
    };

    const double initial_speed = grid_max_speed(u0);
    const double spacing = g.spacing();
    VectorField w = VectorField::zeros(g);
    double t = 0.0;
    std::size_t next = 0;
    if (!sample_times.empty() && sample_times.front() == 0.0) {
        traj.append(0.0, w);
        ++next;
    }

    while (next < sample_times.size()) {
        const double target = sample_times[next];
        double speed = 0.0;
        const VectorField k1 = rhs(t, w, &speed);
        if (!std::isfinite(speed)) throw NumericError("non-finite velocity at t = " + std::to_string(t));
        if (initial_speed > 0.0 && speed > 1e3 * initial_speed) {
            throw DivergenceError("max |u| grew beyond 1e3 times its initial value at t = " + std::to_string(t));
        }
        double dt = cfg.step_cap();
        if (!cfg.fixed_dt && speed > 0.0) dt = std::min(dt, cfg.cfl * spacing / speed);
        bool hit = false;
        if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
            dt = target - t;
            hit = true;
        }
        const double half = 0.5 * dt;
        heat.trim();
        const Eigen::ArrayXd& e_half = heat(half);
        const Eigen::ArrayXd& e_full = heat(dt);

        VectorField a = w;
        axpy(a, half, k1);
        a = scaled(a, e_half);
        const VectorField k2 = rhs(t + half, a, nullptr);

        VectorField b = scaled(w, e_half);
        axpy(b, half, k2);
        const VectorField k3 = rhs(t + half, b, nullptr);

        VectorField c = scaled(w, e_full);
        axpy(c, dt, scaled(k3, e_half));
        const VectorField k4 = rhs(t + dt, c, nullptr);

        VectorField next_w = scaled(w, e_full);
        axpy(next_w, dt / 6.0, scaled(k1, e_full));
        axpy(next_w, dt / 3.0, scaled(k2, e_half));
        axpy(next_w, dt / 3.0, scaled(k3, e_half));
        axpy(next_w, dt / 6.0, k4);
        w = std::move(next_w);
        t = hit ? target : t + dt;

        const VectorField u = heat_propagate(u0, t, eps) + w;
        const double norm = l2_norm(u);
        const double energy = 0.5 * norm * norm;
        if (!std::isfinite(energy)) throw NumericError("solution became non-finite at t = " + std::to_string(t));
        const double div = norm > 0.0 ? l2_norm(divergence(u)) / norm : 0.0;
        traj.record({t, dt, energy, div, speed});

        if (hit) {
            if (!(div <= 1e-9)) {
                throw NumericError("divergence constraint lost at t = " + std::to_string(t) +
                                   ": ||div u||/||u|| = " + std::to_string(div));
            }
            traj.append(t, w);
            ++next;
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Duhamel integrals

double DuhamelSeries::refinement_change(std::size_t i) const {
    const double base = l2_norm(fine.at(i));
    if (base == 0.0) return 0.0;
    return l2_norm(fine.at(i) - coarse.at(i)) / base;
}

DuhamelSeries duhamel_series(const VectorField& u0, double eps, const std::vector<double>& times, double h,
                             bool dealias_output) {
    if (!(h > 0.0)) throw ArgumentError("Duhamel step must be positive");
    if (!(eps >= 0.0)) throw ArgumentError("viscosity must be >= 0");
    if (dealias_output) require_dealias_safe(u0, "duhamel_series");
    std::vector<long> marks;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const long k = std::lround(t / h);
        if (!(t >= 0.0) || std::abs(k * h - t) > 1e-9 * h || k % 4 != 0) {
            throw ArgumentError("Duhamel sample time " + std::to_string(t) + " is not a multiple of 4h");
        }
        if (i > 0 && k <= marks.back()) throw ArgumentError("Duhamel sample times must increase strictly");
        marks.push_back(k);
    }

    const Grid& g = u0.grid();
    const Eigen::ArrayXd& k2 = g.wavenumber_sq();
    DuhamelSeries out;
    out.times = times;
    out.h = h;
    VectorField acc_fine = VectorField::zeros(g);
    VectorField acc_coarse = VectorField::zeros(g);
    const long last = marks.empty() ? -1 : marks.back();
    std::size_t mark = 0;
    for (long i = 0; i <= last; ++i) {
        const double tau = i * h;
        // exp(-tau eps Delta) G(tau), the integrand of J(t) = exp(-t eps Delta) I(t).
        const VectorField lin = heat_propagate(u0, tau, eps);
        VectorField gi = leray_project(detail::advect_unchecked(lin, lin, dealias_output, nullptr));
        if (eps > 0.0 && tau > 0.0) gi = scaled(gi, ((tau * eps) * k2).exp());
        ++out.evaluations;

        const double wf = (i == 0) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        axpy(acc_fine, wf * h / 3.0, gi);
        if (i % 2 == 0) {
            const long j = i / 2;
            const double wc = (j == 0) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            axpy(acc_coarse, wc * 2.0 * h / 3.0, gi);
        }
        while (mark < marks.size() && marks[mark] == i) {
            // The running sums count the endpoint with interior weight 2.
            VectorField jf = acc_fine;
            VectorField jc = acc_coarse;
            if (i > 0) {
                axpy(jf, -h / 3.0, gi);
                axpy(jc, -2.0 * h / 3.0, gi);
            } else {
                jf = VectorField::zeros(g);
                jc = VectorField::zeros(g);
            }
            const double t = times[mark];
            out.fine.push_back(heat_propagate(jf, t, eps));
            out.coarse.push_back(heat_propagate(jc, t, eps));
            ++mark;
        }
    }
    return out;
}

VectorField u2_duhamel(const VectorField& u0, double t, double eps, int nodes, Strictness mode, double* change) {
    if (nodes < 9 || nodes % 2 == 0) {
        throw ArgumentError("Duhamel quadrature needs an odd node count >= 9, got " + std::to_string(nodes));
    }
    if (!(t >= 0.0)) throw ArgumentError("Duhamel time must be >= 0");
    if (t == 0.0) {
        if (change) *change = 0.0;
        return VectorField::zeros(u0.grid());
    }
    const double h = t / (2.0 * (nodes - 1));
    const DuhamelSeries s = duhamel_series(u0, eps, {t}, h);
    const double delta = s.refinement_change(0);
    if (change) *change = delta;
    if (mode == Strictness::strict && !(delta <= 1e-8)) {
        throw QuadratureError("Duhamel quadrature with " + std::to_string(nodes) +
                              " nodes did not converge: relative change " + std::to_string(delta));
    }
    VectorField u2 = s.coarse.front();
    u2 *= -1.0;
    return u2;
}

double euler_residual_yy1(const VectorField& u0, double t, const Trajectory& traj, const BesovParams& bp) {
    if (traj.eps() != 0.0) throw ArgumentError("YY1 residual needs an Euler trajectory");
    if (!same_data(u0, traj.initial())) throw ArgumentError("trajectory was computed from different initial data");
    if (t == 0.0) return 0.0;
    VectorField r = traj.deviation(traj.index_of(t));
    axpy(r, t, nonlinear_term(u0));
    return besov_norm(r, bp);
}

double ns_residual_yy2(const VectorField& u0, double t, const Trajectory& traj, const VectorField& integral,
                       const BesovParams& bp) {
    if (!same_data(u0, traj.initial())) throw ArgumentError("trajectory was computed from different initial data");
    if (t == 0.0) return 0.0;
    return besov_norm(traj.deviation(traj.index_of(t)) + integral, bp);
}

double ns_residual_yy2(const VectorField& u0, double t, double eps, const Trajectory& traj, int nodes,
                       const BesovParams& bp) {
    if (traj.eps() != eps) throw ArgumentError("trajectory viscosity does not match");
    VectorField integral = u2_duhamel(u0, t, eps, nodes);
    integral *= -1.0;
    return ns_residual_yy2(u0, t, traj, integral, bp);
}

} // namespace invlab
