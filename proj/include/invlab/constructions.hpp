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

#include <array>
#include <cstdint>
#include <optional>

#include "invlab/littlewood_paley.hpp"

namespace invlab {

/// Whole-line norms of the physical profile and the bounds derived from
/// them, indexed by p in {1, 2, inf}.
struct ProfileDiagnostics {
    double phi0 = 0.0;
    /// Largest delta with phi(x) >= phi(0)/2 on [0, delta].
    double delta = 0.0;
    std::array<double, 3> norm{};
    /// 0.5 phi(0) (2 delta)^(1/p).
    std::array<double, 3> c1{};
    /// ||phi||_inf^(1 - 1/p) ||phi||_1^(1/p), the interpolation bound.
    std::array<double, 3> c2{};
    /// Sample maximum of |phi| over the quadrature grid.
    double sup_sampled = 0.0;
    /// Fraction of ||phi||_{L^1} carried outside |x| <= L/2.
    double tail_mass = 0.0;
};

/**
 * Even, nonnegative one-dimensional frequency bump.
 *
 * hat(xi) = 1 for |xi| <= plateau, 0 for |xi| >= width, with the smooth_step
 * ramp in between. The default width is 2^-d and the plateau is width 2^-d.
 */
struct ProfileBump {
    int dim = 2;
    double width = 0.25;
    double plateau = 0.0625;
    /// Radius of the lattice the bump is sampled on.
    double radius = 1.0;
    /// Largest |m| with hat(m/R) != 0.
    long support_modes = 0;
    ProfileDiagnostics diagnostics;

    double operator()(double xi) const;
    /// phi(x) = (1/2pi) int hat(xi) cos(x xi) dxi, by quadrature.
    double physical(double x) const;
};

/// Throws ArgumentError if sqrt(d) * width > 1/2.
ProfileBump build_profile_bump(const Grid& grid, std::optional<double> width_override = std::nullopt);

/// Shell-n datum parameters.
struct ShellDatum {
    int n = 3;
    BesovParams bp;
    /// Translation k along e_1.
    double shift = 0.0;

    double amplitude() const;
    double carrier() const;
    double viscosity() const;
};

/// Largest |m_j| in the support of the shell-n datum on a lattice of radius R.
long datum_max_mode(const ProfileBump& bump, int n);

/// Spectral coefficients of f_n(x - shift e_1), built mode by mode.
SpectralField build_fn_spectral(const ProfileBump& bump, int n, const Grid& grid, double shift = 0.0);
RealField build_fn(const ProfileBump& bump, int n, const Grid& grid);

/// 2^{-n(s+1)} (-d_2 f_n, d_1 f_n, 0) translated by shift e_1.
VectorField build_u0n(const ShellDatum& datum, const Grid& grid, const ProfileBump& bump);

/// (-d_2 g, d_1 g) in d = 2 and (-d_2 g, d_1 g, 0) in d = 3.
VectorField planar_curl(const SpectralField& stream);

/**
 * Random divergence-free field band-limited to |xi| <= 2^band.
 *
 * Stream coefficients are drawn in a fixed lattice order that does not
 * depend on N, so the same seed yields the same field on every grid that
 * holds the band. Normalized to unit B^s_{p,r} norm.
 */
VectorField build_background_psi(const Grid& grid, std::uint64_t seed, int band, const BesovParams& bp);

} // namespace invlab
