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
/// Local-equilibrium temperature of a multi-branch phonon system: the
/// common temperature whose summed equilibrium energy densities match the
/// actual total energy density. Solved at order hbar^0; the hbar^2 shift of
/// a branch temperature is exposed read-only through
/// branch_temperature_correction.

#include <cmath>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "bose_integrals.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace wigphon {

struct BranchEnsemble {
    std::vector<BranchConfig> branches;
    PhysicalScales scales;

    void validate() const {
        if (branches.empty())
            throw domain_error("BranchEnsemble: at least one branch required");
        for (const auto& b : branches) {
            b.validate();
            if (b.dim != branches.front().dim)
                throw unsupported_dimension("BranchEnsemble: all branches must share d");
        }
        scales.validate();
    }
};

/// Sum of the branch equilibrium energy densities at temperature T;
/// strictly increasing in T.
inline double total_energy(const BranchEnsemble& ens, double T, const QuadratureSpec& spec = {}) {
    ens.validate();
    double w = 0.0;
    for (const auto& b : ens.branches)
        w += equilibrium_energy_density(b, T, spec, ens.scales);
    return w;
}

struct TleResult {
    double T_le = 0.0;
    double eta0_le = 0.0; // 1/(k_B T_le)
};

/// Solves sum_mu W_mu^eq(T) = sum_mu W_mu for the local-equilibrium
/// temperature: geometric bracket expansion followed by TOMS-748 root
/// refinement. When the tau_W of the branches differ the BGK model does not
/// conserve the total energy; that imbalance is the caller's to monitor
/// (see bgk_energy_imbalance), never silently renormalized here.
inline TleResult solve_t_le(const BranchEnsemble& ens, const std::vector<double>& per_branch_W,
                            const QuadratureSpec& spec = {}) {
    ens.validate();
    if (per_branch_W.size() != ens.branches.size())
        throw domain_error("solve_t_le: one energy density per branch required");
    double target = 0.0;
    for (double w : per_branch_W) {
        if (!(w > 0.0))
            throw domain_error("solve_t_le: branch energies must be > 0");
        target += w;
    }

    auto f = [&](double T) { return total_energy(ens, T, spec) - target; };

    // Initial scale from the dominant branch, assuming a Debye-like
    // power law W ~ T^(d+1) as a first guess.
    const int d = ens.branches.front().dim;
    double t_lo = 1.0, t_hi = 1.0;
    {
        const double w1 = total_energy(ens, 1.0, spec);
        const double guess = std::pow(target / w1, 1.0 / (d + 1));
        t_lo = guess;
        t_hi = guess;
    }
    double f_lo = f(t_lo), f_hi = f_lo;
    int tries = 0;
    while (f_lo > 0.0) {
        t_lo *= 0.5;
        f_lo = f(t_lo);
        if (++tries > 600)
            throw no_bracket("solve_t_le: failed to bracket from below");
    }
    tries = 0;
    while (f_hi < 0.0) {
        t_hi *= 2.0;
        if (t_hi > 1e300)
            throw no_bracket("solve_t_le: target outside representable energies");
        f_hi = f(t_hi);
        if (++tries > 600)
            throw no_bracket("solve_t_le: failed to bracket from above");
    }

    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t max_iter = 200;
    auto r = boost::math::tools::toms748_solve(f, t_lo, t_hi, f_lo, f_hi, tol, max_iter);
    if (max_iter >= 200)
        throw no_convergence("solve_t_le: root refinement did not converge");
    TleResult out;
    out.T_le = 0.5 * (r.first + r.second);
    out.eta0_le = 1.0 / (ens.scales.k_B * out.T_le);
    return out;
}

/// Equilibrium Wigner function, the Bose occupancy at h(q)/k_B T.
inline double equilibrium_wigner(const DispersionModel& model, double T, const Vec3& q,
                                 double k_B = 1.0) {
    if (!(T > 0.0))
        throw domain_error("equilibrium_wigner: T must be > 0");
    return occupancy(model.energy(q) / (k_B * T));
}

/// Net BGK energy exchange sum_mu (W_mu - W_mu^LE(T_le)) / tau_W. Zero (to
/// solver tolerance) whenever all tau_W agree.
inline double bgk_energy_imbalance(const BranchEnsemble& ens,
                                   const std::vector<double>& per_branch_W, double T_le,
                                   const QuadratureSpec& spec = {}) {
    ens.validate();
    double s = 0.0;
    for (size_t i = 0; i < ens.branches.size(); ++i) {
        const double wle = equilibrium_energy_density(ens.branches[i], T_le, spec, ens.scales);
        s += (per_branch_W[i] - wle) / ens.branches[i].tau_W_at(T_le);
    }
    return s;
}

/// hbar^2 shift of the branch temperature implied by the multiplier
/// expansion: k_B T = 1/eta0^(0) - hbar^2 eta0^(2)/(eta0^(0))^2 + ...
/// Returns the coefficient of hbar^2 (read-only diagnostic; the
/// local-equilibrium solve itself stays at order zero).
inline double branch_temperature_correction(double eta0_zero, double eta0_second,
                                            double k_B = 1.0) {
    if (!(eta0_zero > 0.0))
        throw domain_error("branch_temperature_correction: eta0 must be > 0");
    return -eta0_second / (k_B * eta0_zero * eta0_zero);
}

} // namespace wigphon
