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
/// Phonon dispersion relations: the energy symbol h(q) of a branch together
/// with the derivatives entering the transport operator and the closure.
///
/// Three standard shapes are supported:
///   - Debye (acoustic):     h(q) = c |q|
///   - Einstein (optical):   h(q) = eps0
///   - quadratic (flexural): h(q) = alpha_bar |q|^2
///
/// The Debye symbol is non-smooth at the cone point q = 0, so derivative
/// evaluations reject |q| below q_min. All radial quadratures in this
/// library are open and never place a node at q = 0.

#include <cmath>

#include "errors.hpp"
#include "types.hpp"

namespace wigphon {

struct DispersionModel {
    enum class Kind { debye, einstein, quadratic };

    static constexpr double q_min = 1e-12;

    Kind kind = Kind::debye;
    int dim = 3; // spatial/momentum dimension d
    double sound_speed = 1.0;
    double energy0 = 0.0;
    double alpha_bar = 0.0;

    static DispersionModel debye(double c, int d = 3) {
        if (!(c > 0.0))
            throw domain_error("DispersionModel: Debye sound speed must be > 0");
        check_dim(d);
        DispersionModel m;
        m.kind = Kind::debye;
        m.dim = d;
        m.sound_speed = c;
        return m;
    }

    static DispersionModel einstein(double eps0, int d = 3) {
        if (!(eps0 > 0.0))
            throw domain_error("DispersionModel: Einstein energy must be > 0");
        check_dim(d);
        DispersionModel m;
        m.kind = Kind::einstein;
        m.dim = d;
        m.energy0 = eps0;
        return m;
    }

    static DispersionModel quadratic(double alpha_bar, int d = 3) {
        if (!(alpha_bar > 0.0))
            throw domain_error("DispersionModel: quadratic coefficient must be > 0");
        check_dim(d);
        DispersionModel m;
        m.kind = Kind::quadratic;
        m.dim = d;
        m.alpha_bar = alpha_bar;
        return m;
    }

    bool has_zero_velocity() const { return kind == Kind::einstein; }

    /// h(q).
    double energy(const Vec3& q) const {
        switch (kind) {
        case Kind::debye:
            return sound_speed * q.norm();
        case Kind::einstein:
            return energy0;
        case Kind::quadratic:
            return alpha_bar * q.squaredNorm();
        }
        return 0.0;
    }

    /// Group velocity grad_q h. Debye requires |q| >= q_min.
    Vec3 group_velocity(const Vec3& q) const {
        switch (kind) {
        case Kind::debye: {
            const double r = q.norm();
            if (r < q_min)
                throw degenerate_momentum("group_velocity: Debye symbol is not "
                                          "differentiable at q = 0");
            return sound_speed / r * q;
        }
        case Kind::einstein:
            return Vec3::Zero();
        case Kind::quadratic:
            return 2.0 * alpha_bar * q;
        }
        return Vec3::Zero();
    }

    /// Hessian of h; needed to assemble phase-space jets of xi.
    Mat3 hessian(const Vec3& q) const {
        switch (kind) {
        case Kind::debye: {
            const double r = q.norm();
            if (r < q_min)
                throw degenerate_momentum("hessian: Debye symbol below momentum cutoff");
            const Vec3 n = q / r;
            return sound_speed / r * (Mat3::Identity() - n * n.transpose());
        }
        case Kind::einstein:
            return Mat3::Zero();
        case Kind::quadratic:
            return 2.0 * alpha_bar * Mat3::Identity();
        }
        return Mat3::Zero();
    }

    /// Third momentum derivatives of h, fully symmetric. For Debye,
    ///   d^3(c|q|)/dq_i dq_j dq_k
    ///     = c (3 n_i n_j n_k - d_ij n_k - d_ik n_j - d_jk n_i) / |q|^2.
    /// Einstein and quadratic symbols have identically zero third
    /// derivatives.
    Tensor3 third_derivatives(const Vec3& q) const {
        Tensor3 t;
        if (kind != Kind::debye)
            return t;
        const double r = q.norm();
        if (r < q_min)
            throw degenerate_momentum("third_derivatives: Debye symbol below momentum cutoff");
        const Vec3 n = q / r;
        const double pref = sound_speed / (r * r);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    double v = 3.0 * n[i] * n[j] * n[k];
                    if (i == j)
                        v -= n[k];
                    if (i == k)
                        v -= n[j];
                    if (j == k)
                        v -= n[i];
                    t(i, j, k) = pref * v;
                }
        return t;
    }

private:
    static void check_dim(int d) {
        if (d < 1 || d > 3)
            throw unsupported_dimension("DispersionModel: d must be in {1,2,3}");
    }
};

} // namespace wigphon
