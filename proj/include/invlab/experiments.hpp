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

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "invlab/constructions.hpp"
#include "invlab/solver.hpp"

namespace invlab {

enum class Verdict { pass, fail, info };
const char* to_string(Verdict v);

struct ResultRecord {
    std::string experiment;
    std::optional<int> n;
    std::optional<double> eps;
    std::optional<double> t;
    std::string quantity;
    double value = 0.0;
    Verdict verdict = Verdict::info;
};

/// Grid choice for the shell-n datum.
enum class GridPolicy {
    /// Smallest dealias-safe N per n, capped by `samples`.
    per_n,
    /// `samples` for every n.
    fixed,
};

struct ExperimentConfig {
    BesovParams bp;
    double radius = 12.0;
    /// Grid size cap (per_n) or the grid size (fixed).
    int samples = 2048;
    GridPolicy grid_policy = GridPolicy::per_n;
    std::vector<int> n_list{3, 4, 5};
    std::vector<double> t_grid{0.005, 0.01, 0.02, 0.04, 0.05, 0.08};
    double T0 = 0.1;
    double t0 = 0.05;
    /// Viscosities for the fixed-datum limit, 2^-2m for m = 3..8.
    std::vector<double> eps_sweep{0x1p-6, 0x1p-8, 0x1p-10, 0x1p-12, 0x1p-14, 0x1p-16};
    /// Shell index of the fixed datum in the viscosity sweep.
    int limit_n = 3;
    std::uint64_t seed = 20260101;
    /// Translation of the datum for the background experiment; L/2 if unset.
    std::optional<double> shift_k;
    Strictness mode = Strictness::relaxed;
    double cfl = 0.5;
    /// Background field lives in |xi| <= 2^psi_band.
    int psi_band = 3;
    /// Multiplies the unit-norm background field (0 switches it off).
    double psi_scale = 1.0;
    std::vector<int> residual_n_list{3, 4};
    std::vector<int> thm13_n_list{3, 4};
    /// Simpson step of the Duhamel integrals; every t must be a multiple of 4h.
    double quadrature_step = 0x1p-4 * 0.005;
    std::optional<double> width_override;
    /// Radius of the bounded set the data family must stay in.
    double U_radius = 1.0;
    int threads = 1;

    /// Throws ValidationError / ArgumentError / UnsupportedDimensionError.
    void validate() const;
    /// Relative slack on slopes and ratios: 15% relaxed, 10% strict.
    double slack() const { return mode == Strictness::strict ? 0.10 : 0.15; }
    /// eps_n = 2^-2n.
    static double viscosity(int n);
    /// The sorted union of t_grid and t0: every evolution samples these.
    std::vector<double> sample_times() const;
};

using TrajectorySink = std::function<void(const std::string& run_id, const Trajectory& traj)>;

/**
 * Shared state of one experiment session: grid policy, constructed data and
 * a byte-capped cache of trajectories keyed by run id.
 */
class Lab {
public:
    explicit Lab(ExperimentConfig cfg);

    const ExperimentConfig& config() const { return cfg_; }
    /// Policy grid for the shell-n datum; ResolutionError above the cap.
    Grid grid_for(int n) const;
    /// Smallest power-of-two grid (same radius) on which products of the
    /// shell-n datum are exact, with no truncation and no aliasing.
    Grid product_grid(int n) const;
    /// Policy grid, enlarged until the background band is resolved.
    Grid background_grid(int n) const;

    const ProfileBump& bump(const Grid& g);
    VectorField datum(int n, const Grid& g, double shift = 0.0);
    VectorField background(const Grid& g);

    /// Evolution from u0 sampled at `samples`, memoized under `run_id`.
    std::shared_ptr<const Trajectory> evolve(const std::string& run_id, const VectorField& u0, double eps,
                                             const std::vector<double>& samples);
    void drop(const std::string& run_id);
    void clear();
    std::size_t cached_bytes() const { return bytes_; }

    std::size_t cache_limit = std::size_t{1536} << 20;
    TrajectorySink sink;

private:
    ExperimentConfig cfg_;
    std::map<std::string, ProfileBump> bumps_;
    std::list<std::pair<std::string, std::shared_ptr<const Trajectory>>> cache_;
    std::size_t bytes_ = 0;
};

/// Run id "<tag>_N<N>_eps<eps>_s<#samples>".
std::string run_id(const std::string& tag, const Grid& g, double eps, std::size_t samples);

/// Least-squares slope of log(values) against log(t); NaN if any value <= 0.
double log_log_slope(const std::vector<double>& t, const std::vector<double>& values);

/// u . grad v evaluated exactly on the product grid and returned there.
VectorField exact_advect(const VectorField& u, const VectorField& v, const Grid& product_grid);

/// Largest |xi| carrying a coefficient above rel_tol * max.
double support_radius(const VectorField& v, double rel_tol = 1e-13);

/// Taylor-Green vortex (-cos x sin y, sin x cos y) on a two-dimensional grid.
VectorField taylor_green(const Grid& g);
/// Taylor-Green plus a sheared mode so the nonlinearity does not vanish.
VectorField perturbed_taylor_green(const Grid& g);

std::vector<ResultRecord> run_prop31(Lab& lab);
std::vector<ResultRecord> run_prop32(Lab& lab);
std::vector<ResultRecord> run_prop33(Lab& lab);
std::vector<ResultRecord> run_thm12(Lab& lab);
std::vector<ResultRecord> run_thm11_limit(Lab& lab);
std::vector<ResultRecord> run_thm13(Lab& lab);
std::vector<ResultRecord> run_validation_suite(Lab& lab);

using FieldSink = std::function<void(const std::string& name, const VectorField& field)>;

/// Shell data on their policy grids plus the background field; each field
/// is also handed to `sink`.
std::vector<ResultRecord> run_make_data(Lab& lab, const FieldSink& sink = {});
/// Euler and viscous evolutions of every shell datum.
std::vector<ResultRecord> run_evolve(Lab& lab);

} // namespace invlab
