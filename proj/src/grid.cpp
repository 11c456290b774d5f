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

#include "invlab/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "invlab/errors.hpp"

namespace invlab {

struct Grid::Tables {
    std::once_flag k_once, k2_once, kabs_once, mask_once;
    std::array<Eigen::ArrayXd, 3> k;
    Eigen::ArrayXd k2;
    Eigen::ArrayXd kabs;
    Eigen::ArrayXd mask;
};

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::shared_ptr<Grid::Tables> shared_tables(int d, int n, double r) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, double>, std::weak_ptr<Grid::Tables>> registry;
    std::lock_guard lock(mutex);
    auto& slot = registry[{d, n, r}];
    if (auto existing = slot.lock()) return existing;
    auto fresh = std::make_shared<Grid::Tables>();
    slot = fresh;
    return fresh;
}

} // namespace

Grid::Grid(int dim, int samples_per_axis, double radius)
    : dim_(dim), n_(samples_per_axis), radius_(radius) {
    if (dim != 2 && dim != 3) {
        throw ConfigurationError("grid dimension must be 2 or 3, got " + std::to_string(dim));
    }
    if (samples_per_axis < 16 || !is_power_of_two(samples_per_axis)) {
        throw ConfigurationError("samples per axis must be a power of two >= 16, got " +
                                 std::to_string(samples_per_axis));
    }
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw ConfigurationError("grid radius must be positive and finite");
    }
    size_ = 1;
    for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n_);
    tables_ = shared_tables(dim_, n_, radius_);
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::volume() const { return std::pow(period(), dim_); }

int Grid::index_of_mode(long m) const {
    long r = m % n_;
    if (r < 0) r += n_;
    return static_cast<int>(r);
}

std::size_t Grid::flat_index(std::array<int, 3> idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat = flat * n_ + static_cast<std::size_t>(idx[a]);
    return flat;
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % n_);
        flat /= n_;
    }
    return idx;
}

std::size_t Grid::mirror(std::size_t flat) const {
    auto idx = unflatten(flat);
    for (int a = 0; a < dim_; ++a) idx[a] = (n_ - idx[a]) % n_;
    return flat_index(idx);
}

const Eigen::ArrayXd& Grid::wavenumber(int axis) const {
    std::call_once(tables_->k_once, [this] {
        for (int a = 0; a < dim_; ++a) {
            Eigen::ArrayXd k(size_);
            std::size_t stride = 1;
            for (int b = dim_ - 1; b > a; --b) stride *= n_;
            for (std::size_t f = 0; f < size_; ++f) {
                int i = static_cast<int>((f / stride) % n_);
                k[static_cast<Eigen::Index>(f)] = mode(i) / radius_;
            }
            tables_->k[a] = std::move(k);
        }
    });
    return tables_->k[axis];
}

const Eigen::ArrayXd& Grid::wavenumber_sq() const {
    std::call_once(tables_->k2_once, [this] {
        Eigen::ArrayXd k2 = Eigen::ArrayXd::Zero(size_);
        for (int a = 0; a < dim_; ++a) k2 += wavenumber(a).square();
        tables_->k2 = std::move(k2);
    });
    return tables_->k2;
}

const Eigen::ArrayXd& Grid::wavenumber_abs() const {
    std::call_once(tables_->kabs_once, [this] { tables_->kabs = wavenumber_sq().sqrt(); });
    return tables_->kabs;
}

const Eigen::ArrayXd& Grid::dealias_mask() const {
    std::call_once(tables_->mask_once, [this] {
        Eigen::ArrayXd mask = Eigen::ArrayXd::Ones(size_);
        std::size_t stride = 1;
        for (int a = dim_ - 1; a >= 0; --a) {
            for (std::size_t f = 0; f < size_; ++f) {
                int m = mode(static_cast<int>((f / stride) % n_));
                if (3L * std::abs(m) >= n_) mask[static_cast<Eigen::Index>(f)] = 0.0;
            }
            stride *= n_;
        }
        tables_->mask = std::move(mask);
    });
    return tables_->mask;
}

Eigen::ArrayXd Grid::coordinate(int axis) const {
    Eigen::ArrayXd x(size_);
    std::size_t stride = 1;
    for (int b = dim_ - 1; b > axis; --b) stride *= n_;
    const double h = spacing();
    for (std::size_t f = 0; f < size_; ++f) {
        x[static_cast<Eigen::Index>(f)] = h * static_cast<double>((f / stride) % n_);
    }
    return x;
}

long Grid::dealias_limit() const { return (n_ - 1) / 3; }

bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.radius_ == b.radius_;
}

int required_samples(long max_mode) {
    int n = 16;
    while (3L * max_mode >= n) n *= 2;
    return n;
}

} // namespace invlab
