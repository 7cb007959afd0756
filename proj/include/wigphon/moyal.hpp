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
/// Grid-level Moyal machinery on a 2-D (x, q) phase-space grid: the product
/// terms #_0, #_1, #_2 and the hbar^2-corrected transport operator, both as
/// finite-difference stencils and in the spectral symbol-difference form.
/// These operators are the reference oracles for the closure's expansion
/// checks; they are not the production transport path.
///
/// Fields are complex (the odd Moyal terms are imaginary). Derivatives use
/// central stencils; nodes whose stencil would leave the grid are marked
/// invalid through the margin counters. On x-periodic grids the x stencils
/// wrap and cost no margin.

#include <complex>
#include <functional>
#include <vector>

#include "dispersion.hpp"
#include "errors.hpp"

namespace wigphon {

using Complex = std::complex<double>;

struct PhaseSpaceGrid {
    int nx = 0;
    int nq = 0;
    double x0 = 0.0;
    double dx = 0.0;
    double q0 = 0.0;
    double dq = 0.0;
    bool periodic_x = false;

    double x(int i) const { return x0 + i * dx; }
    double q(int j) const { return q0 + j * dq; }

    bool operator==(const PhaseSpaceGrid& o) const {
        return nx == o.nx && nq == o.nq && x0 == o.x0 && dx == o.dx && q0 == o.q0 &&
               dq == o.dq && periodic_x == o.periodic_x;
    }

    void validate() const {
        if (nx < 7 || nq < 7)
            throw grid_too_small("PhaseSpaceGrid: need at least 7 nodes per axis");
        if (!(dx > 0.0) || !(dq > 0.0))
            throw domain_error("PhaseSpaceGrid: spacings must be > 0");
    }
};

/// Complex field on a phase-space grid. margin_x / margin_q count boundary
/// layers whose values are not meaningful.
struct GridField {
    PhaseSpaceGrid grid;
    std::vector<Complex> values;
    int margin_x = 0;
    int margin_q = 0;

    explicit GridField(const PhaseSpaceGrid& g = {})
        : grid(g), values(size_t(std::max(0, g.nx) * std::max(0, g.nq)), Complex(0.0)) {}

    Complex& at(int i, int j) { return values[size_t(i) * size_t(grid.nq) + size_t(j)]; }
    const Complex& at(int i, int j) const {
        return values[size_t(i) * size_t(grid.nq) + size_t(j)];
    }

    bool valid(int i, int j) const {
        const bool xok = grid.periodic_x || (i >= margin_x && i < grid.nx - margin_x);
        return xok && j >= margin_q && j < grid.nq - margin_q;
    }

    template <class F>
    static GridField sample(const PhaseSpaceGrid& g, F&& f) {
        g.validate();
        GridField out(g);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.nq; ++j)
                out.at(i, j) = f(g.x(i), g.q(j));
        return out;
    }

    /// Max abs difference against another field over the common valid
    /// interior.
    double max_interior_diff(const GridField& o) const {
        if (!(grid == o.grid))
            throw grid_mismatch("max_interior_diff: fields live on different grids");
        double m = 0.0;
        for (int i = 0; i < grid.nx; ++i)
            for (int j = 0; j < grid.nq; ++j)
                if (valid(i, j) && o.valid(i, j))
                    m = std::max(m, std::abs(at(i, j) - o.at(i, j)));
        return m;
    }
};

namespace detail {

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

/// Central first derivative in x (order 2).
inline Complex ddx(const GridField& f, int i, int j) {
    const int n = f.grid.nx;
    const int ip = f.grid.periodic_x ? wrap(i + 1, n) : i + 1;
    const int im = f.grid.periodic_x ? wrap(i - 1, n) : i - 1;
    return (f.at(ip, j) - f.at(im, j)) / (2.0 * f.grid.dx);
}

inline Complex ddq(const GridField& f, int i, int j) {
    return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * f.grid.dq);
}

inline Complex d2dx2(const GridField& f, int i, int j) {
    const int n = f.grid.nx;
    const int ip = f.grid.periodic_x ? wrap(i + 1, n) : i + 1;
    const int im = f.grid.periodic_x ? wrap(i - 1, n) : i - 1;
    return (f.at(ip, j) - 2.0 * f.at(i, j) + f.at(im, j)) / (f.grid.dx * f.grid.dx);
}

inline Complex d2dq2(const GridField& f, int i, int j) {
    return (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) / (f.grid.dq * f.grid.dq);
}

inline Complex d2dxdq(const GridField& f, int i, int j) {
    const int n = f.grid.nx;
    const int ip = f.grid.periodic_x ? wrap(i + 1, n) : i + 1;
    const int im = f.grid.periodic_x ? wrap(i - 1, n) : i - 1;
    return (f.at(ip, j + 1) - f.at(ip, j - 1) - f.at(im, j + 1) + f.at(im, j - 1)) /
           (4.0 * f.grid.dx * f.grid.dq);
}

} // namespace detail

/// n-th Moyal product term of two grid symbols:
///   a #_0 b = a b
///   a #_1 b = (i/2) (d_x a d_q b - d_q a d_x b)
///   a #_2 b = -(1/8) (d_xx a d_qq b - 2 d_xq a d_qx b + d_qq a d_xx b)
/// with the parity a #_n b = (-1)^n b #_n a.
inline GridField moyal_term(int n, const GridField& a, const GridField& b) {
    if (!(a.grid == b.grid))
        throw grid_mismatch("moyal_term: operands live on different grids");
    a.grid.validate();
    if (n < 0 || n > 2)
        throw domain_error("moyal_term: n must be 0, 1 or 2");

    GridField out(a.grid);
    const int grow = (n == 0) ? 0 : 1;
    out.margin_x = std::max(a.margin_x, b.margin_x) + (a.grid.periodic_x ? 0 : grow);
    out.margin_q = std::max(a.margin_q, b.margin_q) + grow;

    const int ilo = a.grid.periodic_x ? 0 : out.margin_x;
    const int ihi = a.grid.periodic_x ? a.grid.nx : a.grid.nx - out.margin_x;
    for (int i = ilo; i < ihi; ++i)
        for (int j = out.margin_q; j < a.grid.nq - out.margin_q; ++j) {
            if (n == 0) {
                out.at(i, j) = a.at(i, j) * b.at(i, j);
            } else if (n == 1) {
                out.at(i, j) = Complex(0.0, 0.5) *
                               (detail::ddx(a, i, j) * detail::ddq(b, i, j) -
                                detail::ddq(a, i, j) * detail::ddx(b, i, j));
            } else {
                out.at(i, j) = -0.125 * (detail::d2dx2(a, i, j) * detail::d2dq2(b, i, j) -
                                         2.0 * detail::d2dxdq(a, i, j) * detail::d2dxdq(b, i, j) +
                                         detail::d2dq2(a, i, j) * detail::d2dx2(b, i, j));
            }
        }
    return out;
}

/// A one-dimensional radial energy symbol with the derivatives the
/// transport operator needs.
struct RadialSymbol {
    std::function<double(double)> h;
    std::function<double(double)> dh;
    std::function<double(double)> d3h;

    static RadialSymbol from_model(const DispersionModel& m) {
        RadialSymbol s;
        s.h = [m](double q) { return m.energy(Vec3(q, 0, 0)); };
        s.dh = [m](double q) { return m.group_velocity(Vec3(q, 0, 0))[0]; };
        s.d3h = [m](double q) { return m.third_derivatives(Vec3(q, 0, 0))(0, 0, 0); };
        return s;
    }
};

/// Finite-difference transport operator
///   S[h] g = h'(q) d_x g - (hbar^2/24) h'''(q) d^3_x g,
/// with central stencils of the requested order (2 or 4).
inline GridField transport_apply(const RadialSymbol& symbol, const GridField& g, double hbar_eff,
                                 int stencil_order = 2) {
    g.grid.validate();
    if (stencil_order != 2 && stencil_order != 4)
        throw domain_error("transport_apply: stencil order must be 2 or 4");

    GridField out(g.grid);
    const int width = (stencil_order == 2) ? 2 : 3;
    out.margin_x = g.margin_x + (g.grid.periodic_x ? 0 : width);
    out.margin_q = g.margin_q;

    const double dx = g.grid.dx;
    const bool per = g.grid.periodic_x;
    const int nx = g.grid.nx;
    const int ilo = per ? 0 : out.margin_x;
    const int ihi = per ? nx : nx - out.margin_x;

    auto node = [&](int i, int j) -> const Complex& {
        return g.at(per ? detail::wrap(i, nx) : i, j);
    };

    for (int j = out.margin_q; j < g.grid.nq - out.margin_q; ++j) {
        const double q = g.grid.q(j);
        const double c = symbol.dh(q);
        const double h3 = symbol.d3h(q);
        const double disp = hbar_eff * hbar_eff / 24.0 * h3;
        for (int i = ilo; i < ihi; ++i) {
            Complex gx, gxxx;
            if (stencil_order == 2) {
                gx = (node(i + 1, j) - node(i - 1, j)) / (2.0 * dx);
                gxxx = (node(i + 2, j) - 2.0 * node(i + 1, j) + 2.0 * node(i - 1, j) -
                        node(i - 2, j)) /
                       (2.0 * dx * dx * dx);
            } else {
                gx = (-node(i + 2, j) + 8.0 * node(i + 1, j) - 8.0 * node(i - 1, j) +
                      node(i - 2, j)) /
                     (12.0 * dx);
                gxxx = (-node(i + 3, j) + 8.0 * node(i + 2, j) - 13.0 * node(i + 1, j) +
                        13.0 * node(i - 1, j) - 8.0 * node(i - 2, j) + node(i - 3, j)) /
                       (8.0 * dx * dx * dx);
            }
            out.at(i, j) = c * gx - disp * gxxx;
        }
    }
    return out;
}

inline GridField transport_apply(const DispersionModel& model, const GridField& g,
                                 double hbar_eff, int stencil_order = 2) {
    return transport_apply(RadialSymbol::from_model(model), g, hbar_eff, stencil_order);
}

/// Spectral (integral) form of the transport operator on an x-periodic
/// grid: per q row, multiply the x spectrum by
///   i [h(q + hbar nu/2) - h(q - hbar nu/2)] / hbar,
/// which reduces to i h'(q) nu in the semiclassical limit. Agrees with
/// transport_apply up to O(hbar^4) plus discretization error.
inline GridField integral_form_apply(const RadialSymbol& symbol, const GridField& g,
                                     double hbar_eff) {
    g.grid.validate();
    if (!g.grid.periodic_x)
        throw non_periodic_domain("integral_form_apply: requires an x-periodic grid");

    const int nx = g.grid.nx;
    const int nq = g.grid.nq;
    const double L = nx * g.grid.dx;

    // Direct DFT; the grids used for verification stay small.
    std::vector<Complex> tw(size_t(nx));
    for (int k = 0; k < nx; ++k)
        tw[size_t(k)] = std::polar(1.0, -2.0 * M_PI * k / nx);

    GridField out(g.grid);
    out.margin_x = 0;
    out.margin_q = g.margin_q;

    std::vector<Complex> spec(size_t(nx));
    for (int j = out.margin_q; j < nq - out.margin_q; ++j) {
        const double q = g.grid.q(j);
        for (int k = 0; k < nx; ++k) {
            Complex s(0.0);
            for (int i = 0; i < nx; ++i)
                s += g.at(i, j) * tw[size_t((long(i) * k) % nx)];
            spec[size_t(k)] = s / double(nx);
        }
        for (int k = 0; k < nx; ++k) {
            const int kk = (k <= nx / 2) ? k : k - nx;
            const double nu = 2.0 * M_PI * kk / L;
            double mult;
            if (hbar_eff > 0.0)
                mult = (symbol.h(q + 0.5 * hbar_eff * nu) - symbol.h(q - 0.5 * hbar_eff * nu)) /
                       hbar_eff;
            else
                mult = symbol.dh(q) * nu;
            spec[size_t(k)] *= Complex(0.0, mult);
        }
        for (int i = 0; i < nx; ++i) {
            Complex s(0.0);
            for (int k = 0; k < nx; ++k)
                s += spec[size_t(k)] * std::conj(tw[size_t((long(i) * k) % nx)]);
            out.at(i, j) = s;
        }
    }
    return out;
}

inline GridField integral_form_apply(const DispersionModel& model, const GridField& g,
                                     double hbar_eff) {
    return integral_form_apply(RadialSymbol::from_model(model), g, hbar_eff);
}

} // namespace wigphon
