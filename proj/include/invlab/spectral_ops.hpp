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

#include <functional>
#include <span>
#include <vector>

#include "invlab/field.hpp"

namespace invlab {

/**
 * Symbol sigma of a Fourier multiplier sigma(D).
 *
 * Either a function of |xi| or of the full frequency vector. The value at
 * xi = 0 is always given explicitly and never evaluated from the function.
 */
struct MultiplierSpec {
    enum class Kind { radial, componentwise };

    Kind kind = Kind::radial;
    std::function<double(double)> radial_symbol;
    std::function<Complex(std::span<const double>)> vector_symbol;
    Complex at_zero{1.0, 0.0};

    static MultiplierSpec radial(std::function<double(double)> symbol, Complex at_zero);
    static MultiplierSpec componentwise(std::function<Complex(std::span<const double>)> symbol,
                                        Complex at_zero);
};

/// coeffs'(m) = sigma(m/R) coeffs(m). Throws ConfigurationError if sigma is
/// not finite at some lattice point.
SpectralField apply_multiplier(const SpectralField& f, const MultiplierSpec& sigma);
VectorField apply_multiplier(const VectorField& v, const MultiplierSpec& sigma);

// Exact spectral differentiation: d/dx_j <-> i xi_j.
SpectralField partial(const SpectralField& f, int axis);
VectorField gradient(const SpectralField& f);
SpectralField divergence(const VectorField& v);
SpectralField laplacian(const SpectralField& f);
/// (-d_2 f, d_1 f); two dimensions only.
VectorField perp_gradient(const SpectralField& f);

/// Multiplies every component by exp(-t eps |xi|^2).
VectorField heat_propagate(const VectorField& v, double t, double eps);
SpectralField heat_propagate(const SpectralField& f, double t, double eps);
/// (exp(t eps Delta) - Id) v, evaluated with expm1 so small t eps keeps full
/// relative precision.
VectorField heat_minus_identity(const VectorField& v, double t, double eps);

/// Leray projector P: u - xi (xi.u)/|xi|^2; the mean mode passes through.
VectorField leray_project(const VectorField& v);
/// Q = Id - P: xi (xi.u)/|xi|^2; kills the mean mode.
VectorField leray_complement(const VectorField& v);

/// Zeroes every mode with some |m_j| >= N/3.
SpectralField dealias(SpectralField f);
VectorField dealias(VectorField v);

/// Largest |m_j| over coefficients above rel_tol * max |coeff| (0 for the
/// zero field).
long max_mode(const SpectralField& f, double rel_tol = 1e-13);
long max_mode(const VectorField& v, double rel_tol = 1e-13);
/// Throws ResolutionError naming the required N when the support is not
/// dealias-safe on the field's grid.
void require_dealias_safe(const VectorField& v, const char* what);

/// u . grad v computed pseudo-spectrally. With `dealias` the inputs must be
/// dealias-safe and the product is truncated by the two-thirds rule.
VectorField advect(const VectorField& u, const VectorField& v, bool dealias);

/// Copies the coefficients onto a grid of the same dimension and radius but
/// a different N. Throws ResolutionError if a nonzero mode does not fit.
SpectralField resample(const SpectralField& f, const Grid& target);
VectorField resample(const VectorField& v, const Grid& target);

/// Exact torus translation f(x - shift).
SpectralField translate(const SpectralField& f, std::span<const double> shift);
VectorField translate(const VectorField& v, std::span<const double> shift);

/// ((L/N)^d sum |f|^p)^(1/p); p = infinity gives the sample maximum.
double lp_norm(const RealField& f, double p);
/// Pointwise Euclidean magnitude of the components, then L^p.
double lp_norm(std::span<const RealField> components, double p);
/// L^p of the represented function. p = 2 uses discrete Parseval; p = inf
/// evaluates on an oversampled grid (factor 4, capped at 4096 samples per
/// axis); other p transform to the sampling grid.
double lp_norm(const SpectralField& f, double p);
double lp_norm(const VectorField& v, double p);
/// Discrete L^2 norm via Parseval: sqrt(L^-d sum |c|^2).
double l2_norm(const SpectralField& f);
double l2_norm(const VectorField& v);

/// Pairwise (cascade) sum with a fixed reduction tree.
double pairwise_sum(const Eigen::Ref<const Eigen::ArrayXd>& values);

namespace detail {
/// advect() without input checks; optionally reports max |u| on the grid.
VectorField advect_unchecked(const VectorField& u, const VectorField& v, bool dealias,
                             double* max_speed);
} // namespace detail

} // namespace invlab
