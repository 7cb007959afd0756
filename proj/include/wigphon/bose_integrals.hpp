// Copyright 2026 The wigphon project developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied. See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

/// @file
///
/// Bose-Einstein moment integrals: the dimensionless reduced moments, the
/// closure integrals I_1(d) and I_2(d), unit-sphere measures and angular
/// tensor moments, and per-branch equilibrium energy densities.
///
/// Divergence of the dimensionless integrals is decided analytically by
/// small-argument power counting, never probed numerically:
///   - z^n e^z/(e^z-1)^2        ~ z^(n-2)  near 0: integrable iff n >= 2
///   - I_1: z^d   * d2 kernel   ~ z^(d-3)  near 0: integrable iff d >= 3
///   - I_2: z^(d+1) * d3 kernel ~ z^(d-3)  near 0: integrable iff d >= 3

#include <cmath>
#include <functional>
#include <string>

#include "bose_math.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace wigphon {

/// One phonon branch: identity, dispersion and BGK relaxation data.
/// bz_volume regularizes Einstein-branch moments, whose constant symbol is
/// not integrable over R^d; acoustic branches integrate over all of R^d
/// and ignore it.
struct BranchConfig {
    std::string label = "LA";
    int dim = 3;
    DispersionModel dispersion = DispersionModel::debye(1.0, 3);
    double tau_W = 1.0;
    double tau_Q = 1.0;
    double bz_volume = 0.0;

    // Optional temperature dependence of the relaxation times; constant
    // when unset.
    std::function<double(double)> tau_W_of_T;
    std::function<double(double)> tau_Q_of_T;

    double tau_W_at(double T) const { return tau_W_of_T ? tau_W_of_T(T) : tau_W; }
    double tau_Q_at(double T) const { return tau_Q_of_T ? tau_Q_of_T(T) : tau_Q; }

    void validate() const {
        if (!(tau_W > 0.0) || !(tau_Q > 0.0))
            throw domain_error("BranchConfig: relaxation times must be > 0");
        if (dim != dispersion.dim)
            throw unsupported_dimension("BranchConfig: branch and dispersion dimensions differ");
        if (dispersion.kind == DispersionModel::Kind::einstein && !(bz_volume > 0.0))
            throw domain_error("BranchConfig: Einstein branch needs a Brillouin-zone volume");
    }
};

/// Measure of the unit sphere S_d, 2 pi^(d/2) / Gamma(d/2).
inline double sphere_measure(int d) {
    switch (d) {
    case 1:
        return 2.0;
    case 2:
        return 2.0 * M_PI;
    case 3:
        return 4.0 * M_PI;
    default:
        throw unsupported_dimension("sphere_measure: d must be in {1,2,3}");
    }
}

/// int_{S_d} n_i n_j dOmega = (mis(S_d)/d) delta_ij (components beyond d
/// vanish).
inline Mat3 angular_tensor2(int d) {
    const double v = sphere_measure(d) / d;
    Mat3 t = Mat3::Zero();
    for (int i = 0; i < d; ++i)
        t(i, i) = v;
    return t;
}

/// int_{S_d} n_i n_j n_h n_k dOmega
///   = mis(S_d)/(d(d+2)) (d_ij d_hk + d_ih d_jk + d_ik d_jh).
inline Tensor4 angular_tensor4(int d) {
    const double v = sphere_measure(d) / (d * (d + 2.0));
    Tensor4 t;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int h = 0; h < d; ++h)
                for (int k = 0; k < d; ++k) {
                    double s = 0.0;
                    if (i == j && h == k)
                        s += 1.0;
                    if (i == h && j == k)
                        s += 1.0;
                    if (i == k && j == h)
                        s += 1.0;
                    t(i, j, h, k) = v * s;
                }
    return t;
}

/// Checked component access for the rank-2/rank-4 sphere moments. Odd ranks
/// vanish identically by parity and are rejected together with any other
/// rank.
inline double angular_tensor_entry(int rank, int d, int i, int j, int h = 0, int k = 0) {
    if (rank == 2)
        return angular_tensor2(d)(i, j);
    if (rank == 4)
        return angular_tensor4(d)(i, j, h, k);
    throw unsupported_rank("angular_tensor: only ranks 2 and 4 are supported (odd ranks "
                           "vanish by parity)");
}

/// int_0^inf z^n e^z/(e^z - 1)^2 dz for integer n >= 2. Equals n! zeta(n).
inline double reduced_moment(int n, const QuadratureSpec& spec = {}) {
    if (n < 2)
        throw divergent_integral("reduced_moment: integrand ~ z^(n-2) near 0, divergent for "
                                 "n < 2");
    return integrate_half_line([n](double z) { return std::pow(z, n) * (-occupancy_d1(z)); },
                               spec);
}

enum class ClosureIntegralKind { I1, I2 };

/// The d-dimensional closure integrals of the quantum heat-flux correction:
///   I_1(d) = int z^d     e^z (e^z + 1)            / (e^z - 1)^3 dz
///   I_2(d) = int z^(d+1) e^z (e^{2z} + 4e^z + 1)  / (e^z - 1)^4 dz
/// Both are divergent for d = 1 and d = 2; only d = 3 is admissible.
inline double closure_integral(ClosureIntegralKind kind, int d, const QuadratureSpec& spec = {}) {
    if (d == 1 || d == 2)
        throw divergent_integral("closure_integral: I_1 and I_2 behave like z^(d-3) near 0 "
                                 "and diverge for d = " +
                                 std::to_string(d));
    if (d != 3)
        throw unsupported_dimension("closure_integral: d must be in {1,2,3}");
    if (kind == ClosureIntegralKind::I1)
        return integrate_half_line(
            [d](double z) { return std::pow(z, d) * occupancy_d2(z); }, spec);
    return integrate_half_line(
        [d](double z) { return std::pow(z, d + 1) * (-occupancy_d3(z)); }, spec);
}

/// Equilibrium energy density of one branch at temperature T:
///   W(T) = (2 pi)^-d int h(q) / (e^{h(q)/k_B T} - 1) dq.
/// Radial integrals run in the dimensionless variable z = h/(k_B T); the
/// Einstein branch has the closed form (V_B/(2 pi)^d) eps0 occ(eps0/k_B T).
inline double equilibrium_energy_density(const BranchConfig& branch, double T,
                                         const QuadratureSpec& spec = {},
                                         const PhysicalScales& scales = {}) {
    branch.validate();
    if (!(T > 0.0))
        throw domain_error("equilibrium_energy_density: T must be > 0");
    const int d = branch.dim;
    const double kT = scales.k_B * T;
    const double norm = std::pow(2.0 * M_PI, -d);
    const DispersionModel& m = branch.dispersion;

    switch (m.kind) {
    case DispersionModel::Kind::einstein:
        return norm * branch.bz_volume * m.energy0 * occupancy(m.energy0 / kT);
    case DispersionModel::Kind::debye: {
        // r = (kT/c) z, h = kT z.
        const double scale = kT / m.sound_speed;
        const double pref = norm * sphere_measure(d) * kT * std::pow(scale, d);
        return pref *
               integrate_half_line(
                   [d](double z) { return std::pow(z, d) * occupancy(z); }, spec);
    }
    case DispersionModel::Kind::quadratic: {
        // r = sqrt(kT z / alpha_bar), r^{d-1} dr = (1/2) (kT/alpha_bar)^{d/2}
        // z^{d/2 - 1} dz.
        const double pref =
            norm * sphere_measure(d) * 0.5 * kT * std::pow(kT / m.alpha_bar, 0.5 * d);
        return pref * integrate_half_line(
                          [d](double z) {
                              return std::pow(z, 0.5 * d) * occupancy(z);
                          },
                          spec);
    }
    }
    return 0.0;
}

} // namespace wigphon
