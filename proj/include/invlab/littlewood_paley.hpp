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

#include <string>
#include <vector>

#include "invlab/field.hpp"

namespace invlab {

/// C^infinity step: 0 for u <= 0, 1 for u >= 1, B(u) / (B(u) + B(1 - u))
/// with B(u) = exp(-1/u).
double smooth_step(double u);

/// Radial low-pass cutoff: 1 on [0, 3/4], 0 on [4/3, inf).
double lp_theta(double rho);
/// Annulus cutoff theta(rho/2) - theta(rho), supported in [3/4, 8/3].
double lp_phi(double rho);

/**
 * Dyadic partition of unity on a grid's dual lattice.
 *
 * Block -1 is theta(|xi|), block j >= 0 is phi(2^-j |xi|). Blocks above
 * `j_max` vanish on the sampled lattice ball of radius xi_Nyquist.
 */
struct DyadicPartition {
    Grid grid;
    int j_max;
    /// Largest |xi| on which the truncated sum of blocks equals 1.
    double resolved_radius() const;
    /// Symbol of block j evaluated at every spectral index.
    Eigen::ArrayXd block_symbol(int j) const;
    /// theta(2^-n |xi|) at every spectral index.
    Eigen::ArrayXd low_pass_symbol(int n) const;
};

DyadicPartition build_partition(const Grid& grid);

SpectralField dyadic_block(int j, const SpectralField& f);
VectorField dyadic_block(int j, const VectorField& v);
/// S_n = theta(2^-n D).
SpectralField low_pass(int n, const SpectralField& f);
VectorField low_pass(int n, const VectorField& v);

/// Regularity triple (s, p, r) in dimension d. Infinite exponents are
/// represented by `std::numeric_limits<double>::infinity()`.
struct BesovParams {
    double s = 3.0;
    double p = 2.0;
    double r = 2.0;
    int d = 2;

    /// True when s > d/p + 1 with r finite, or s = d/p + 1 with r = 1.
    bool admissible() const;
    /// Throws ValidationError naming the violated condition.
    void validate() const;
    /// Same exponents at a different regularity.
    BesovParams with_s(double sigma) const;
    std::string describe() const;
};

enum class Strictness { relaxed, strict };

/// Sink for resolution warnings issued in relaxed mode (stderr by default).
void set_warning_sink(void (*sink)(const std::string&));

/**
 * Nonhomogeneous Besov norm || 2^{js} ||Delta_j f||_{L^p} ||_{l^r(j >= -1)}.
 *
 * p = 2 is evaluated in one spectral pass through Parseval; other p go
 * through physical space block by block. Only the exponents s, p, r of `bp`
 * are used here, so inadmissible triples can still be evaluated (the
 * product-law checks need s - 1). Support reaching the Nyquist shell is a
 * warning, or a ResolutionError under Strictness::strict.
 */
double besov_norm(const SpectralField& f, const BesovParams& bp,
                  Strictness mode = Strictness::relaxed);
double besov_norm(const VectorField& v, const BesovParams& bp,
                  Strictness mode = Strictness::relaxed);

struct BlockNorm {
    int j;
    /// 2^{js} ||Delta_j f||_{L^p}.
    double weighted;
};

std::vector<BlockNorm> block_spectrum_report(const VectorField& v, const BesovParams& bp);
std::vector<BlockNorm> block_spectrum_report(const SpectralField& f, const BesovParams& bp);

/// l^r combination of the weighted block norms in increasing j.
double combine_blocks(const std::vector<BlockNorm>& blocks, double r);

} // namespace invlab
