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
/// Quadrature plumbing: adaptive Gauss-Kronrod on the half line (with the
/// radial substitution already applied by the caller), Gauss-Legendre node
/// tables, and unit-sphere product grids for d = 1, 2, 3.
///
/// Half-line integrands are assumed smooth with exponential decay. The
/// half line is mapped to a finite interval and truncated where the
/// exponential tail bound drops below the absolute tolerance; the mapped
/// quadrature never evaluates the endpoints, so integrands that are only
/// defined on the open interval (0, inf) are safe.

#include <cmath>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include "types.hpp"

namespace wigphon {

enum class RadialTransform { exp_substitution, algebraic_mapping };

struct QuadratureSpec {
    double relative_tolerance = 1e-11;
    double absolute_tolerance = 1e-14;
    int max_subdivisions = 2048;
    RadialTransform radial_transform = RadialTransform::exp_substitution;

    // Orders of the fixed product rules used by the closure moment
    // integrals (radial x polar; the azimuthal count is twice the polar).
    int radial_nodes = 48;
    int angular_nodes = 24;

    void validate() const {
        if (!(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0))
            throw domain_error("QuadratureSpec: tolerances must be > 0");
        if (max_subdivisions < 8)
            throw domain_error("QuadratureSpec: max_subdivisions must be >= 8");
        if (radial_nodes < 4 || angular_nodes < 2)
            throw domain_error("QuadratureSpec: product rule orders too small");
    }

    /// Truncation point for exponentially decaying tails: beyond z_max,
    /// poly(z) * e^-z is below the absolute tolerance with a wide margin.
    double tail_cutoff() const {
        const double l = -std::log(absolute_tolerance);
        return std::max(60.0, l + 12.0 * std::log(std::max(l, 3.0)) + 20.0);
    }
};

namespace detail {

inline int adaptive_depth(int max_subdivisions) {
    int depth = 3;
    while ((1 << depth) < max_subdivisions && depth < 30)
        ++depth;
    return depth;
}

} // namespace detail

/// Integrates f over (a, b) adaptively; throws tolerance_not_reached when
/// the error estimate stays above both tolerances after subdivision.
template <class F>
double integrate_interval(F&& f, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, detail::adaptive_depth(spec.max_subdivisions), spec.relative_tolerance, &err);
    if (err > std::max(spec.absolute_tolerance, spec.relative_tolerance * std::abs(value)) * 10.0)
        throw tolerance_not_reached("integrate_interval: adaptive quadrature exhausted "
                                    "subdivisions, error estimate " +
                                    std::to_string(err));
    return value;
}

/// Integrates f over (0, inf) for integrands with exponentially decaying
/// tails, using the transform selected in the spec.
template <class F>
double integrate_half_line(F&& f, const QuadratureSpec& spec) {
    const double zmax = spec.tail_cutoff();
    if (spec.radial_transform == RadialTransform::exp_substitution) {
        // z = -log(1 - u), dz = du/(1 - u); u in (0, 1 - e^-zmax).
        const double umax = 1.0 - std::exp(-zmax);
        auto g = [&f](double u) {
            const double one_minus = 1.0 - u;
            return f(-std::log(one_minus)) / one_minus;
        };
        return integrate_interval(g, 0.0, umax, spec);
    }
    // z = u/(1 - u), dz = du/(1 - u)^2; u in (0, zmax/(1 + zmax)).
    const double umax = zmax / (1.0 + zmax);
    auto g = [&f](double u) {
        const double one_minus = 1.0 - u;
        return f(u / one_minus) / (one_minus * one_minus);
    };
    return integrate_interval(g, 0.0, umax, spec);
}

/// Gauss-Legendre nodes and weights on (-1, 1), by Newton iteration on the
/// Legendre recurrence.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1)
        throw domain_error("gauss_legendre: order must be >= 1");
    std::vector<double> x(size_t(n)), w(size_t(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15)
                break;
        }
        x[size_t(i)] = -z;
        x[size_t(n - 1 - i)] = z;
        w[size_t(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[size_t(n - 1 - i)] = w[size_t(i)];
    }
    return {x, w};
}

/// Quadrature nodes on the unit sphere S_d embedded in R^3. Weights sum to
/// mis(S_d). For d = 3 the polar axis is x_1, so axisymmetric integrands
/// around x_1 are resolved by the polar nodes alone.
struct AngularGrid {
    int dim = 3;
    std::vector<Vec3> nodes;
    std::vector<double> weights;

    static AngularGrid make(int d, int polar_order) {
        AngularGrid g;
        g.dim = d;
        if (d == 1) {
            g.nodes = {Vec3(1, 0, 0), Vec3(-1, 0, 0)};
            g.weights = {1.0, 1.0};
        } else if (d == 2) {
            const int m = std::max(8, 4 * polar_order);
            g.nodes.reserve(size_t(m));
            g.weights.assign(size_t(m), 2.0 * M_PI / m);
            for (int k = 0; k < m; ++k) {
                const double phi = 2.0 * M_PI * (k + 0.5) / m;
                g.nodes.emplace_back(std::cos(phi), std::sin(phi), 0.0);
            }
        } else if (d == 3) {
            auto [u, wu] = gauss_legendre(polar_order);
            const int nphi = 2 * polar_order;
            const double wphi = 2.0 * M_PI / nphi;
            g.nodes.reserve(size_t(polar_order * nphi));
            g.weights.reserve(size_t(polar_order * nphi));
            for (int i = 0; i < polar_order; ++i) {
                const double s = std::sqrt(std::max(0.0, 1.0 - u[size_t(i)] * u[size_t(i)]));
                for (int k = 0; k < nphi; ++k) {
                    const double phi = 2.0 * M_PI * (k + 0.5) / nphi;
                    g.nodes.emplace_back(u[size_t(i)], s * std::cos(phi), s * std::sin(phi));
                    g.weights.push_back(wu[size_t(i)] * wphi);
                }
            }
        } else {
            throw unsupported_dimension("AngularGrid: d must be 1, 2 or 3");
        }
        return g;
    }
};

} // namespace wigphon
