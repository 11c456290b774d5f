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
#include <cstddef>
#include <memory>
#include <numbers>

#include <Eigen/Dense>

namespace invlab {

/**
 * Periodic sampling lattice on the torus [0, L)^d with L = 2*pi*R.
 *
 * Samples sit at x = (L/N) * i for i in [0, N)^d, stored row-major with
 * axis 0 slowest. The dual lattice is xi = m / R for m in [-N/2, N/2)^d;
 * spectral arrays use the same row-major layout with FFT index order along
 * each axis (index i carries mode i for i < N/2 and i - N otherwise).
 *
 * Grids are cheap handles: all wavenumber tables are shared between grids
 * with equal (d, N, R) and built on first use.
 */
class Grid {
public:
    Grid(int dim, int samples_per_axis, double radius);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double radius() const { return radius_; }
    double period() const { return 2.0 * std::numbers::pi * radius_; }
    double spacing() const { return period() / n_; }
    /// (L/N)^d, the Riemann-sum weight of one sample.
    double cell_volume() const;
    /// L^d.
    double volume() const;
    std::size_t size() const { return size_; }
    double nyquist() const { return n_ / (2.0 * radius_); }

    /// Integer mode carried by FFT index i along one axis.
    int mode(int i) const { return i < n_ / 2 ? i : i - n_; }
    /// FFT index holding integer mode m (m taken modulo N).
    int index_of_mode(long m) const;
    std::size_t flat_index(std::array<int, 3> idx) const;
    std::array<int, 3> unflatten(std::size_t flat) const;
    /// Flat index of the mode -m for the mode stored at `flat`.
    std::size_t mirror(std::size_t flat) const;

    /// xi_axis at every spectral index.
    const Eigen::ArrayXd& wavenumber(int axis) const;
    /// |xi|^2 at every spectral index.
    const Eigen::ArrayXd& wavenumber_sq() const;
    /// |xi| at every spectral index.
    const Eigen::ArrayXd& wavenumber_abs() const;
    /// 1 where every |m_j| < N/3, 0 elsewhere (two-thirds rule).
    const Eigen::ArrayXd& dealias_mask() const;
    /// x_axis at every physical sample.
    Eigen::ArrayXd coordinate(int axis) const;

    /// Largest |m_j| that keeps quadratic products alias-free, i.e. the
    /// largest integer strictly below N/3.
    long dealias_limit() const;

    friend bool operator==(const Grid& a, const Grid& b);
    friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

    struct Tables;

private:
    int dim_;
    int n_;
    double radius_;
    std::size_t size_;
    std::shared_ptr<Tables> tables_;
};

/// Smallest power of two N >= 16 for which modes up to |m_j| = max_mode are
/// dealias-safe.
int required_samples(long max_mode);

} // namespace invlab
