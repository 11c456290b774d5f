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

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "invlab/grid.hpp"

namespace invlab {

using Complex = std::complex<double>;

/// Real samples of a scalar function on the grid.
class RealField {
public:
    explicit RealField(Grid grid);
    RealField(Grid grid, Eigen::ArrayXd values);

    const Grid& grid() const { return grid_; }
    const Eigen::ArrayXd& values() const { return values_; }
    Eigen::ArrayXd& values() { return values_; }

private:
    Grid grid_;
    Eigen::ArrayXd values_;
};

/**
 * Fourier coefficients of a scalar function on the torus.
 *
 * The coefficient of mode m is (L/N)^d sum_x f(x) exp(-i (m/R).x), the
 * Riemann-sum restriction of the whole-space transform, so a periodized
 * profile with transform a(xi) has coefficients a(m/R).
 */
class SpectralField {
public:
    explicit SpectralField(Grid grid);
    SpectralField(Grid grid, Eigen::ArrayXcd coeffs);

    const Grid& grid() const { return grid_; }
    const Eigen::ArrayXcd& coeffs() const { return coeffs_; }
    Eigen::ArrayXcd& coeffs() { return coeffs_; }

    /// Coefficient of the integer mode m (components beyond dim ignored).
    Complex at(std::array<long, 3> m) const;
    Complex& at(std::array<long, 3> m);

    /// Largest |c(-m) - conj(c(m))| relative to max |c|.
    double hermitian_defect() const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(Complex factor);

private:
    Grid grid_;
    Eigen::ArrayXcd coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(Complex factor, SpectralField a);
SpectralField operator*(double factor, SpectralField a);

/// d spectral components sharing one grid.
class VectorField {
public:
    explicit VectorField(std::vector<SpectralField> components);
    /// Zero field with `grid.dim()` components.
    static VectorField zeros(const Grid& grid);

    const Grid& grid() const { return components_.front().grid(); }
    int dim() const { return static_cast<int>(components_.size()); }
    const SpectralField& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
    SpectralField& operator[](int i) { return components_[static_cast<std::size_t>(i)]; }
    const std::vector<SpectralField>& components() const { return components_; }

    /// Set once the field passed `certify_solenoidal`.
    bool solenoidal() const { return solenoidal_; }
    /// Checks ||div u|| / ||u|| <= tol in L^2 and sets the flag; throws
    /// NumericError otherwise.
    VectorField& certify_solenoidal(double tol = 1e-10);

    VectorField& operator+=(const VectorField& other);
    VectorField& operator-=(const VectorField& other);
    VectorField& operator*=(double factor);

private:
    std::vector<SpectralField> components_;
    bool solenoidal_ = false;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double factor, VectorField a);

/// Forward transform with the torus normalization above.
SpectralField to_spectral(const RealField& f);
/// Inverse transform of a Hermitian spectrum; returns the real function.
RealField to_physical(const SpectralField& f);
VectorField to_spectral(const std::vector<RealField>& components);
std::vector<RealField> to_physical(const VectorField& v);

/// Inverse transform onto a finer grid of `factor * N` samples per axis
/// (zero padding). Used for grid-maximum estimates.
RealField to_physical_oversampled(const SpectralField& f, int factor);

/// Number of FFTW threads used for new transform plans.
void set_transform_threads(int threads);

/// Keeps freed field-sized blocks in the process heap (glibc) so the many
/// short-lived N^d temporaries do not each pay for a fresh zeroed mapping.
void reuse_large_allocations();

void require_same_grid(const Grid& a, const Grid& b, const char* what);

} // namespace invlab
