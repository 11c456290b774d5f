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

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "invlab/littlewood_paley.hpp"

namespace invlab {

struct SolverConfig {
    /// Viscosity; 0 gives the Euler equations.
    double eps = 0.0;
    /// Horizon. Sample times must lie in [0, T].
    double T = 0.1;
    double cfl = 0.5;
    /// Step cap; T/64 when unset.
    std::optional<double> dt_max;
    /// Forces a constant step (still shortened to hit sample times).
    std::optional<double> fixed_dt;
    bool dealias = true;

    void validate() const;
    double step_cap() const;
};

struct StepRecord {
    double t;
    double dt;
    /// (1/2) ||u||_{L^2}^2 after the step.
    double energy;
    /// ||div u|| / ||u|| in L^2 after the step.
    double divergence;
    /// Grid maximum of |u| at the start of the step.
    double max_speed;
};

/**
 * Sampled solution of the Leray-projected system.
 *
 * Each sample stores the deviation w(t) = u(t) - exp(t eps Delta) u0 from
 * the linear flow, which keeps the small nonlinear part at full relative
 * precision; `state()` rebuilds u(t).
 */
class Trajectory {
public:
    Trajectory(VectorField initial, double eps);

    const VectorField& initial() const { return initial_; }
    double eps() const { return eps_; }
    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    double time(std::size_t i) const { return times_.at(i); }
    /// Index of the sample at exactly t; ArgumentError if absent.
    std::size_t index_of(double t) const;

    const VectorField& deviation(std::size_t i) const { return deviations_.at(i); }
    VectorField state(std::size_t i) const;
    const std::vector<StepRecord>& steps() const { return steps_; }
    std::size_t bytes() const;

    void append(double t, VectorField deviation);
    void record(const StepRecord& step) { steps_.push_back(step); }

private:
    VectorField initial_;
    double eps_;
    std::vector<double> times_;
    std::vector<VectorField> deviations_;
    std::vector<StepRecord> steps_;
};

/// P(u . grad u), dealiased when requested.
VectorField nonlinear_term(const VectorField& u, bool dealias = true);

/**
 * Integrates du/dt = eps Delta u - P(u . grad u) from u0.
 *
 * Lawson (integrating-factor) RK4 on the deviation from the heat flow, so
 * the linear part is exact. dt = min(cfl (L/N) / max|u|, cap), shortened to
 * land on every sample time; integration stops at the last sample.
 */
Trajectory evolve(const VectorField& u0, const SolverConfig& cfg, std::vector<double> sample_times);

/// exp(t eps Delta) u0.
VectorField u1_heat(const VectorField& u0, double t, double eps);

/// Cumulative Duhamel integrals I(t) = int_0^t exp((t-tau) eps Delta) G(tau) dtau
/// with G(tau) = P(L . grad L), L = exp(tau eps Delta) u0.
struct DuhamelSeries {
    std::vector<double> times;
    /// Composite Simpson with step h.
    std::vector<VectorField> fine;
    /// Composite Simpson with step 2h, from the same evaluations.
    std::vector<VectorField> coarse;
    double h = 0.0;
    std::size_t evaluations = 0;

    /// ||fine - coarse|| / ||fine|| in L^2 at sample i (0 for a zero integral).
    double refinement_change(std::size_t i) const;
};

/// Every time must be a multiple of 4h. Streams one integrand evaluation
/// per node.
DuhamelSeries duhamel_series(const VectorField& u0, double eps, const std::vector<double>& times, double h,
                             bool dealias = true);

/**
 * u2(t) = -int_0^t exp((t-tau) eps Delta) P(u1 . grad u1) dtau with `nodes`
 * Simpson nodes (odd, >= 9). The result is compared against 2 nodes - 1
 * nodes; a relative change above 1e-8 raises QuadratureError in strict mode.
 */
VectorField u2_duhamel(const VectorField& u0, double t, double eps, int nodes,
                       Strictness mode = Strictness::relaxed, double* change = nullptr);

/// || S^0_t(u0) - u0 + t P(u0 . grad u0) ||_{B^s}; `traj` must be an Euler
/// trajectory from u0 that samples t.
double euler_residual_yy1(const VectorField& u0, double t, const Trajectory& traj, const BesovParams& bp);

/// || S^eps_t(u0) - exp(t eps Delta) u0 + int_0^t ... dtau ||_{B^s} with the
/// integral from u2_duhamel.
double ns_residual_yy2(const VectorField& u0, double t, double eps, const Trajectory& traj, int nodes,
                       const BesovParams& bp);
/// Same with a precomputed Duhamel integral I(t).
double ns_residual_yy2(const VectorField& u0, double t, const Trajectory& traj, const VectorField& integral,
                       const BesovParams& bp);

} // namespace invlab
