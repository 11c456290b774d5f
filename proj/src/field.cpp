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

#include "invlab/field.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include <fftw3.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "invlab/errors.hpp"

namespace invlab {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (a != b) throw ConfigurationError(std::string(what) + ": fields live on different grids");
}

// ---------------------------------------------------------------------------
// Transform engine

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::atomic<int> g_threads{1};

// Real-to-half-complex plans on internally owned FFTW buffers. Plans are
// created with FFTW_ESTIMATE so the chosen algorithm, and therefore every
// rounding, is reproducible from run to run.
class Engine {
public:
    Engine(int dim, int n, int threads) : dim_(dim), n_(n) {
        real_size_ = 1;
        for (int a = 0; a < dim; ++a) real_size_ *= static_cast<std::size_t>(n);
        half_size_ = real_size_ / n * (n / 2 + 1);
        real_ = fftw_alloc_real(real_size_);
        half_ = fftw_alloc_complex(half_size_);
        int dims[3] = {n, n, n};
        std::lock_guard lock(planner_mutex());
        static bool threads_ready = [] { return fftw_init_threads() != 0; }();
        if (threads_ready) fftw_plan_with_nthreads(threads);
        forward_ = fftw_plan_dft_r2c(dim, dims, real_, half_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r(dim, dims, half_, real_, FFTW_ESTIMATE);
    }
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;
    ~Engine() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(half_);
    }

    void forward(const Eigen::ArrayXd& in, Eigen::ArrayXcd& out, double scale) {
        std::memcpy(real_, in.data(), real_size_ * sizeof(double));
        fftw_execute(forward_);
        const std::size_t rows = real_size_ / n_;
        const std::size_t nh = static_cast<std::size_t>(n_ / 2 + 1);
        out.resize(static_cast<Eigen::Index>(real_size_));
        auto* dst = out.data();
        for (std::size_t row = 0; row < rows; ++row) {
            const std::size_t mrow = mirror_row(row);
            const fftw_complex* src = half_ + row * nh;
            const fftw_complex* msrc = half_ + mrow * nh;
            Complex* d = dst + row * n_;
            for (int i = 0; i <= n_ / 2; ++i) d[i] = Complex(src[i][0], src[i][1]) * scale;
            for (int i = n_ / 2 + 1; i < n_; ++i) {
                d[i] = Complex(msrc[n_ - i][0], -msrc[n_ - i][1]) * scale;
            }
        }
    }

    void backward(const Eigen::ArrayXcd& in, Eigen::ArrayXd& out, double scale) {
        const std::size_t rows = real_size_ / n_;
        const std::size_t nh = static_cast<std::size_t>(n_ / 2 + 1);
        const Complex* src = in.data();
        for (std::size_t row = 0; row < rows; ++row) {
            fftw_complex* d = half_ + row * nh;
            const Complex* s = src + row * n_;
            for (std::size_t i = 0; i < nh; ++i) {
                d[i][0] = s[i].real();
                d[i][1] = s[i].imag();
            }
        }
        fftw_execute(backward_);
        out.resize(static_cast<Eigen::Index>(real_size_));
        Eigen::Map<Eigen::ArrayXd> r(real_, static_cast<Eigen::Index>(real_size_));
        out = r * scale;
    }

private:
    std::size_t mirror_row(std::size_t row) const {
        if (dim_ == 2) return (n_ - row) % n_;
        const std::size_t i0 = row / n_, i1 = row % n_;
        return ((n_ - i0) % n_) * n_ + (n_ - i1) % n_;
    }

    int dim_;
    int n_;
    std::size_t real_size_ = 0;
    std::size_t half_size_ = 0;
    double* real_ = nullptr;
    fftw_complex* half_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

Engine& engine_for(const Grid& grid) {
    thread_local std::map<std::tuple<int, int, int>, std::unique_ptr<Engine>> engines;
    const int threads = g_threads.load();
    auto& slot = engines[{grid.dim(), grid.n(), threads}];
    if (!slot) slot = std::make_unique<Engine>(grid.dim(), grid.n(), threads);
    return *slot;
}

} // namespace

void set_transform_threads(int threads) { g_threads.store(threads < 1 ? 1 : threads); }

void reuse_large_allocations() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

// ---------------------------------------------------------------------------
// RealField

RealField::RealField(Grid grid) : grid_(std::move(grid)), values_(Eigen::ArrayXd::Zero(grid_.size())) {}

RealField::RealField(Grid grid, Eigen::ArrayXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
        throw ConfigurationError("real field has " + std::to_string(values_.size()) +
                                 " samples, grid expects " + std::to_string(grid_.size()));
    }
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(Grid grid)
    : grid_(std::move(grid)), coeffs_(Eigen::ArrayXcd::Zero(grid_.size())) {}

SpectralField::SpectralField(Grid grid, Eigen::ArrayXcd coeffs)
    : grid_(std::move(grid)), coeffs_(std::move(coeffs)) {
    if (static_cast<std::size_t>(coeffs_.size()) != grid_.size()) {
        throw ConfigurationError("spectral field has " + std::to_string(coeffs_.size()) +
                                 " coefficients, grid expects " + std::to_string(grid_.size()));
    }
}

Complex SpectralField::at(std::array<long, 3> m) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < grid_.dim(); ++a) idx[a] = grid_.index_of_mode(m[a]);
    return coeffs_[static_cast<Eigen::Index>(grid_.flat_index(idx))];
}

Complex& SpectralField::at(std::array<long, 3> m) {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < grid_.dim(); ++a) idx[a] = grid_.index_of_mode(m[a]);
    return coeffs_[static_cast<Eigen::Index>(grid_.flat_index(idx))];
}

double SpectralField::hermitian_defect() const {
    const double scale = coeffs_.abs().maxCoeff();
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t f = 0; f < grid_.size(); ++f) {
        const Complex a = coeffs_[static_cast<Eigen::Index>(f)];
        const Complex b = coeffs_[static_cast<Eigen::Index>(grid_.mirror(f))];
        worst = std::max(worst, std::abs(a - std::conj(b)));
    }
    return worst / scale;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same_grid(grid_, other.grid_, "spectral sum");
    coeffs_ += other.coeffs_;
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    require_same_grid(grid_, other.grid_, "spectral difference");
    coeffs_ -= other.coeffs_;
    return *this;
}

SpectralField& SpectralField::operator*=(Complex factor) {
    coeffs_ *= factor;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(Complex factor, SpectralField a) { return a *= factor; }
SpectralField operator*(double factor, SpectralField a) {
    a.coeffs() *= factor;
    return a;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(std::vector<SpectralField> components) : components_(std::move(components)) {
    if (components_.empty()) throw ConfigurationError("vector field needs at least one component");
    for (const auto& c : components_) require_same_grid(components_.front().grid(), c.grid(), "vector field");
}

VectorField VectorField::zeros(const Grid& grid) {
    std::vector<SpectralField> comps;
    for (int a = 0; a < grid.dim(); ++a) comps.emplace_back(grid);
    return VectorField(std::move(comps));
}

VectorField& VectorField::certify_solenoidal(double tol) {
    const Grid& g = grid();
    Eigen::ArrayXcd div = Eigen::ArrayXcd::Zero(g.size());
    double energy = 0.0;
    for (int a = 0; a < dim(); ++a) {
        div += (g.wavenumber(a) * components_[a].coeffs()) * Complex(0.0, 1.0);
        energy += components_[a].coeffs().abs2().sum();
    }
    const double ratio = energy > 0.0 ? std::sqrt(div.abs2().sum() / energy) : 0.0;
    if (!(ratio <= tol)) {
        throw NumericError("field is not divergence-free: ||div u||/||u|| = " + std::to_string(ratio));
    }
    solenoidal_ = true;
    return *this;
}

VectorField& VectorField::operator+=(const VectorField& other) {
    if (other.dim() != dim()) throw ConfigurationError("vector sum: component count mismatch");
    for (int a = 0; a < dim(); ++a) components_[a] += other.components_[a];
    solenoidal_ = solenoidal_ && other.solenoidal_;
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
    if (other.dim() != dim()) throw ConfigurationError("vector difference: component count mismatch");
    for (int a = 0; a < dim(); ++a) components_[a] -= other.components_[a];
    solenoidal_ = solenoidal_ && other.solenoidal_;
    return *this;
}

VectorField& VectorField::operator*=(double factor) {
    for (auto& c : components_) c.coeffs() *= factor;
    return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double factor, VectorField a) { return a *= factor; }

// ---------------------------------------------------------------------------
// Transforms

SpectralField to_spectral(const RealField& f) {
    SpectralField out(f.grid());
    engine_for(f.grid()).forward(f.values(), out.coeffs(), f.grid().cell_volume());
    return out;
}

RealField to_physical(const SpectralField& f) {
    RealField out(f.grid());
    engine_for(f.grid()).backward(f.coeffs(), out.values(), 1.0 / f.grid().volume());
    return out;
}

VectorField to_spectral(const std::vector<RealField>& components) {
    std::vector<SpectralField> out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(to_spectral(c));
    return VectorField(std::move(out));
}

std::vector<RealField> to_physical(const VectorField& v) {
    std::vector<RealField> out;
    out.reserve(static_cast<std::size_t>(v.dim()));
    for (const auto& c : v.components()) out.push_back(to_physical(c));
    return out;
}

RealField to_physical_oversampled(const SpectralField& f, int factor) {
    if (factor <= 1) return to_physical(f);
    const Grid& g = f.grid();
    Grid fine(g.dim(), g.n() * factor, g.radius());
    SpectralField padded(fine);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        const auto idx = g.unflatten(flat);
        std::array<int, 3> fine_idx{0, 0, 0};
        for (int a = 0; a < g.dim(); ++a) fine_idx[a] = fine.index_of_mode(g.mode(idx[a]));
        padded.coeffs()[static_cast<Eigen::Index>(fine.flat_index(fine_idx))] =
            f.coeffs()[static_cast<Eigen::Index>(flat)];
    }
    return to_physical(padded);
}

} // namespace invlab
