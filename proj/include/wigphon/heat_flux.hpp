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
/// Long-time asymptotic heat flux: the Fourier part Q^(0) = -K^(0) grad T
/// with its conductivity tensor, and the hbar^2 correction
/// Q^(2) = -tau_Q div J^(2) built from the closed form of the order-two
/// flux tensor for Debye branches in d = 3. The |grad T|^2-quadratic part
/// of the correction is kept in full; it is genuinely non-Fourier.

#include <cmath>
#include <vector>

#include "bose_integrals.hpp"
#include "errors.hpp"
#include "qmep.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace wigphon {

struct ConductivityResult {
    Mat3 K = Mat3::Zero();
    double k_trace = 0.0;
    double t_exponent = 0.0; // analytic d(log k)/d(log T) for this branch kind
};

/// Zero-order thermal conductivity tensor
///   K^(0) = tau_Q / ((2 pi)^d k_B T^2) int c (x) c h^2 occ'(h/k_B T) dq.
/// For Debye branches the reduced chain
///   k = (k_B tau_Q c^(3-d)/(2 pi)^d) mis(S_d) (k_B T)^(d-1)
///       int z^(d+1) e^z/(e^z-1)^2 dz
/// is used, giving the T^(d-1) temperature dependence; isotropy makes
/// K = (k/d) I. Einstein branches conduct nothing.
inline ConductivityResult conductivity_zero(const BranchConfig& branch, double T,
                                            const QuadratureSpec& spec = {},
                                            const PhysicalScales& scales = {}) {
    branch.validate();
    if (!(T > 0.0))
        throw domain_error("conductivity_zero: T must be > 0");
    const int d = branch.dim;
    const double kB = scales.k_B;
    const double tau = branch.tau_Q_at(T);
    ConductivityResult out;

    switch (branch.dispersion.kind) {
    case DispersionModel::Kind::einstein:
        return out; // zero group velocity, zero conductivity
    case DispersionModel::Kind::debye: {
        const double c = branch.dispersion.sound_speed;
        const double k = kB * tau * std::pow(c, 3 - d) * std::pow(2.0 * M_PI, -d) *
                         sphere_measure(d) * std::pow(kB * T, d - 1) *
                         reduced_moment(d + 1, spec);
        out.k_trace = k;
        for (int i = 0; i < d; ++i)
            out.K(i, i) = k / d;
        out.t_exponent = d - 1;
        return out;
    }
    case DispersionModel::Kind::quadratic: {
        // c_i c_j h^2 = 4 ab^4 r^6 n_i n_j; z = ab r^2/(k_B T).
        const double ab = branch.dispersion.alpha_bar;
        const double kT = kB * T;
        const double kv = tau / (std::pow(2.0 * M_PI, d) * kB * T * T) * sphere_measure(d) /
                          d * 2.0 * std::pow(ab, 4) * std::pow(kT / ab, 0.5 * (d + 6)) *
                          integrate_half_line(
                              [d](double z) {
                                  return std::pow(z, 0.5 * (d + 4)) * (-occupancy_d1(z));
                              },
                              spec);
        for (int i = 0; i < d; ++i)
            out.K(i, i) = kv;
        out.k_trace = kv * d;
        out.t_exponent = 0.5 * (d + 2);
        return out;
    }
    }
    return out;
}

/// Fourier flux Q^(0) = -K^(0) grad T.
inline Vec3 fourier_flux(const BranchConfig& branch, const TemperatureJet& tjet,
                         const QuadratureSpec& spec = {}, const PhysicalScales& scales = {}) {
    return -conductivity_zero(branch, tjet.T, spec, scales).K * tjet.grad;
}

/// Closed form of the order-two flux tensor for a Debye branch in d = 3:
///   J2_hk = -P { (mis/d) [ (2|g|^2 - T lap T) I1 - (1/3)|g|^2 I2 ] d_hk
///                + (mis/(d(d+2))) [ tr S d_hk + 2 S_hk ] },
///   S_ij  = (I1 + I2/3) T H_ij + (-3 I1 + I2/3) g_i g_j,
///   P     = (c^5/(8 (2 pi)^d)) (k_B T/c)^(d+1) / (k_B^2 T^4),
/// with g = grad T and H = hess T. Einstein branches contribute nothing;
/// the closed form does not apply to other dispersion shapes.
inline Mat3 j2_tensor(const BranchConfig& branch, const TemperatureJet& tjet,
                      const QuadratureSpec& spec = {}, const PhysicalScales& scales = {}) {
    branch.validate();
    if (!(tjet.T > 0.0))
        throw domain_error("j2_tensor: T must be > 0");
    if (branch.dispersion.kind == DispersionModel::Kind::einstein)
        return Mat3::Zero();
    if (branch.dispersion.kind != DispersionModel::Kind::debye)
        throw domain_error("j2_tensor: closed form applies to Debye branches only");
    const int d = branch.dim;
    if (d != 3)
        throw unsupported_dimension("j2_tensor: the quantum correction is valid only in the "
                                    "bulk (d = 3) case");

    const double i1 = closure_integral(ClosureIntegralKind::I1, d, spec);
    const double i2 = closure_integral(ClosureIntegralKind::I2, d, spec);
    const double c = branch.dispersion.sound_speed;
    const double kB = scales.k_B;
    const double T = tjet.T;
    const double mis = sphere_measure(d);

    const double pref = std::pow(c, 5) / (8.0 * std::pow(2.0 * M_PI, d)) *
                        std::pow(kB * T / c, d + 1) / (kB * kB * std::pow(T, 4));
    const Vec3& g = tjet.grad;
    const Mat3& H = tjet.hess;
    const double g2 = g.squaredNorm();
    const double lap = H.trace();

    const double b1 = (2.0 * g2 - T * lap) * i1 - g2 * i2 / 3.0;
    const Mat3 S = (i1 + i2 / 3.0) * T * H + (-3.0 * i1 + i2 / 3.0) * g * g.transpose();

    Mat3 j = (mis / d) * b1 * Mat3::Identity() +
             (mis / (d * (d + 2.0))) * (S.trace() * Mat3::Identity() + 2.0 * S);
    return -pref * j;
}

/// Analytic divergence (div J^(2))_h = d_k J2_hk at one point, using the
/// third temperature derivatives of the jet. Valid for d = 3, where the
/// prefactor of the closed form is temperature independent.
inline Vec3 j2_divergence(const BranchConfig& branch, const TemperatureJet& tjet,
                          const QuadratureSpec& spec = {}, const PhysicalScales& scales = {}) {
    branch.validate();
    if (branch.dispersion.kind == DispersionModel::Kind::einstein)
        return Vec3::Zero();
    if (branch.dispersion.kind != DispersionModel::Kind::debye)
        throw domain_error("j2_divergence: closed form applies to Debye branches only");
    if (branch.dim != 3)
        throw unsupported_dimension("j2_divergence: valid only for d = 3");

    const int d = 3;
    const double i1 = closure_integral(ClosureIntegralKind::I1, d, spec);
    const double i2 = closure_integral(ClosureIntegralKind::I2, d, spec);
    const double c = branch.dispersion.sound_speed;
    const double kB = scales.k_B;
    const double T = tjet.T;
    const double mis = sphere_measure(d);
    const double pref = std::pow(c, 5) / (8.0 * std::pow(2.0 * M_PI, d)) *
                        std::pow(kB * T / c, d + 1) / (kB * kB * std::pow(T, 4));

    const Vec3& g = tjet.grad;
    const Mat3& H = tjet.hess;
    const double lap = H.trace();
    const Vec3 Hg = H * g;
    Vec3 L; // L_h = d_h (lap T) = sum_i third(i, i, h)
    for (int h = 0; h < 3; ++h) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            s += tjet.third(i, i, h);
        L[h] = s;
    }

    const double a = i1 + i2 / 3.0;
    const double b = -3.0 * i1 + i2 / 3.0;
    const Vec3 db1 = i1 * (4.0 * Hg - lap * g - T * L) - (2.0 / 3.0) * i2 * Hg;
    const Vec3 dtrS = a * (lap * g + T * L) + 2.0 * b * Hg;
    const Vec3 divS = a * (Hg + T * L) + b * (Hg + lap * g);

    const Vec3 divj = (mis / d) * db1 + (mis / (d * (d + 2.0))) * (dtrS + 2.0 * divS);
    return -pref * divj;
}

/// Quantum heat-flux correction at one point, Q^(2) = -tau_Q div J^(2),
/// via the analytic divergence.
inline Vec3 quantum_flux_correction_at(const BranchConfig& branch, const TemperatureJet& tjet,
                                       const QuadratureSpec& spec = {},
                                       const PhysicalScales& scales = {}) {
    return -branch.tau_Q_at(tjet.T) * j2_divergence(branch, tjet, spec, scales);
}

/// Temperature jets sampled on a uniform 1-D spatial grid (slab geometry,
/// the profile varies along x_1 only).
struct TemperatureField1D {
    double dx = 0.0;
    std::vector<TemperatureJet> jets;

    void validate() const {
        if (!(dx > 0.0))
            throw domain_error("TemperatureField1D: dx must be > 0");
        if (jets.size() < 5)
            throw grid_too_small("TemperatureField1D: need at least 5 nodes for divergence "
                                 "stencils");
    }
};

enum class DivergenceMode { analytic, grid };

/// Q^(2) field on a 1-D grid. The grid mode differences the J^(2)_h1 column
/// along x_1 (second-order central inside, one-sided at the ends); the
/// analytic mode uses the third-derivative jets pointwise.
inline std::vector<Vec3> quantum_flux_correction(const BranchConfig& branch,
                                                 const TemperatureField1D& field,
                                                 const QuadratureSpec& spec = {},
                                                 const PhysicalScales& scales = {},
                                                 DivergenceMode mode = DivergenceMode::analytic) {
    field.validate();
    const size_t n = field.jets.size();
    std::vector<Vec3> out(n, Vec3::Zero());
    if (mode == DivergenceMode::analytic) {
        for (size_t i = 0; i < n; ++i)
            out[i] = quantum_flux_correction_at(branch, field.jets[i], spec, scales);
        return out;
    }
    std::vector<Mat3> j2(n);
    for (size_t i = 0; i < n; ++i)
        j2[i] = j2_tensor(branch, field.jets[i], spec, scales);
    const double inv2dx = 1.0 / (2.0 * field.dx);
    for (size_t i = 0; i < n; ++i) {
        Vec3 div;
        if (i == 0)
            div = (-3.0 * j2[0].col(0) + 4.0 * j2[1].col(0) - j2[2].col(0)) * inv2dx;
        else if (i == n - 1)
            div = (3.0 * j2[n - 1].col(0) - 4.0 * j2[n - 2].col(0) + j2[n - 3].col(0)) * inv2dx;
        else
            div = (j2[i + 1].col(0) - j2[i - 1].col(0)) * inv2dx;
        out[i] = -branch.tau_Q_at(field.jets[i].T) * div;
    }
    return out;
}

/// Composed long-time flux Q = Q^(0) + hbar_eff^2 Q^(2). The eta1-coupled
/// term of order hbar^2 (dT/T) is dropped, as appropriate for small
/// deviations from local equilibrium.
struct FluxDecomposition {
    std::vector<Vec3> q0;
    std::vector<Vec3> q2; // unscaled order-two part
    std::vector<Vec3> total;
};

inline FluxDecomposition asymptotic_flux(const BranchConfig& branch,
                                         const TemperatureField1D& field, double hbar_eff,
                                         const QuadratureSpec& spec = {},
                                         const PhysicalScales& scales = {},
                                         DivergenceMode mode = DivergenceMode::analytic) {
    field.validate();
    FluxDecomposition out;
    const size_t n = field.jets.size();
    out.q0.resize(n);
    for (size_t i = 0; i < n; ++i)
        out.q0[i] = fourier_flux(branch, field.jets[i], spec, scales);
    if (hbar_eff > 0.0 && branch.dispersion.kind == DispersionModel::Kind::debye)
        out.q2 = quantum_flux_correction(branch, field, spec, scales, mode);
    else
        out.q2.assign(n, Vec3::Zero());
    out.total.resize(n);
    for (size_t i = 0; i < n; ++i)
        out.total[i] = out.q0[i] + hbar_eff * hbar_eff * out.q2[i];
    return out;
}

} // namespace wigphon
