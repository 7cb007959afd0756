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
/// Maximum-entropy closure of the (W, Q) moment system at orders hbar^0 and
/// hbar^2.
///
/// The order-zero distribution is g0 = 1/(e^xi - 1) with exponent
/// xi = eta0 h(q) + eta1 . c(q) h(q). The order-two correction g2 is the
/// even second term of the expansion of the quantum exponential; it needs
/// the full phase-space jet of xi, i.e. spatial derivatives of the
/// multipliers.
///
/// For Debye branches every radial integral factors out of the angular one
/// and reduces to Gamma/zeta constants; the angular part is done on a
/// product sphere grid. Einstein branches have closed-form moments. For
/// quadratic branches a nonzero eta1 makes the exponent unbounded below,
/// so only the isotropic state is admissible and the radial integrals are
/// evaluated adaptively.
///
/// Note on the order-two multiplier relation: eta^(2) enters both the W^(2)
/// and the Q^(2) linear terms with the same kernel matrix as the zero-order
/// Jacobian, which is what a consistent first-order Taylor expansion in
/// hbar^2 of g0(eta) produces.

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "bose_integrals.hpp"
#include "bose_math.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace wigphon {

/// Lagrange multipliers of one order: eta0 conjugate to the energy density,
/// eta1 to the energy flux. At equilibrium eta1 = 0 and eta0 = 1/(k_B T).
struct Multipliers {
    double eta0 = 0.0;
    Vec3 eta1 = Vec3::Zero();
};

/// hbar-order split of the multipliers: eta = zero + hbar^2 * second.
struct MultiplierSplit {
    Multipliers zero;
    Multipliers second;
};

/// Per-branch conserved fields with their hbar-order split:
/// W = W0 + hbar^2 W2, Q = Q0 + hbar^2 Q2.
struct MomentState {
    double W0 = 0.0;
    Vec3 Q0 = Vec3::Zero();
    double W2 = 0.0;
    Vec3 Q2 = Vec3::Zero();
};

/// Value and derivatives of a scalar symbol at one phase-space point.
/// dxdq(i, j) = d^2 / dx_i dq_j; dxdx and dqdq are symmetric.
struct PhaseSpaceJet {
    double value = 0.0;
    Vec3 dx = Vec3::Zero();
    Vec3 dq = Vec3::Zero();
    Mat3 dxdx = Mat3::Zero();
    Mat3 dxdq = Mat3::Zero();
    Mat3 dqdq = Mat3::Zero();
};

/// Temperature with spatial derivatives up to third order; the input of the
/// Debye g2 closed form and of the quantum heat-flux divergence.
struct TemperatureJet {
    double T = 1.0;
    Vec3 grad = Vec3::Zero();
    Mat3 hess = Mat3::Zero();
    Tensor3 third;
};

/// Multipliers together with their spatial derivatives.
/// eta1_grad(m, i) = d eta1_m / dx_i; eta1_hess[m](i, j) = d^2 eta1_m / dx_i dx_j.
struct MultiplierJet {
    Multipliers value;
    Vec3 eta0_grad = Vec3::Zero();
    Mat3 eta0_hess = Mat3::Zero();
    Mat3 eta1_grad = Mat3::Zero();
    std::array<Mat3, 3> eta1_hess{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};

    static MultiplierJet from_value(const Multipliers& m) {
        MultiplierJet j;
        j.value = m;
        return j;
    }
};

/// The closure tensors entering the hbar^2 transport terms.
struct ClosureTensors {
    Mat3 J = Mat3::Zero();
    Tensor3 T3;
    Tensor4 U4;
};

/// Momentum integrals of the g2 correction against the closure weights:
/// W = <h g2>, Q = <c h g2>, J = <c (x) c h g2>.
struct G2Moments {
    double W = 0.0;
    Vec3 Q = Vec3::Zero();
    Mat3 J = Mat3::Zero();
};

// ---------------------------------------------------------------------------
// Pointwise evaluations
// ---------------------------------------------------------------------------

/// xi(q) = eta0 h + eta1 . (c h). Throws non_positive_exponent when the
/// result is not positive.
inline double xi_value(const Multipliers& eta, const DispersionModel& model, const Vec3& q) {
    const double h = model.energy(q);
    double xi = eta.eta0 * h;
    if (!model.has_zero_velocity() && h > 0.0)
        xi += eta.eta1.dot(model.group_velocity(q)) * h;
    if (!(xi > 0.0))
        throw non_positive_exponent("xi_value: exponent must be positive, got " +
                                    std::to_string(xi));
    return xi;
}

/// Order-zero maximum-entropy distribution, the Bose occupancy of xi.
inline double g0_mep(const Multipliers& eta, const DispersionModel& model, const Vec3& q) {
    return occupancy(xi_value(eta, model, q));
}

/// Order-two term of the maximum-entropy Wigner expansion for a general
/// exponent jet:
///   g2 = -(1/8) [ occ''(xi) (xi_xx : xi_qq - xi_xq : xi_qx)
///                 + (occ'''(xi)/3) (xi_xx,ij xi_q,i xi_q,j
///                                   - 2 xi_xq,ij xi_q,i xi_x,j
///                                   + xi_qq,ij xi_x,i xi_x,j) ].
inline double g2_mep_generic(const PhaseSpaceJet& xi) {
    if (!(xi.value > 0.0))
        throw non_positive_exponent("g2_mep_generic: exponent must be positive");
    const double d2 = occupancy_d2(xi.value);
    const double d3 = occupancy_d3(xi.value);

    const double pair_term = (xi.dxdx.cwiseProduct(xi.dqdq)).sum() -
                             (xi.dxdq.cwiseProduct(xi.dxdq.transpose())).sum();
    const double triple_term = xi.dq.dot(xi.dxdx * xi.dq) -
                               2.0 * xi.dq.dot(xi.dxdq.transpose() * xi.dx) +
                               xi.dx.dot(xi.dqdq * xi.dx);
    return -0.125 * (d2 * pair_term + d3 / 3.0 * triple_term);
}

/// hbar^2 coefficient of the quantum exponential Exp(a) of a smooth symbol:
///   Exp(a) = e^a - (hbar^2/8) e^a [ a_xx : a_pp - a_xp : a_px
///              + (1/3) a_xx,ij a_p,i a_p,j - (2/3) a_xp,ij a_p,i a_x,j
///              + (1/3) a_pp,ij a_x,i a_x,j ] + O(hbar^4).
inline double quantum_exp_term2(const PhaseSpaceJet& a) {
    const double pair_term = (a.dxdx.cwiseProduct(a.dqdq)).sum() -
                             (a.dxdq.cwiseProduct(a.dxdq.transpose())).sum();
    const double triple_term = a.dq.dot(a.dxdx * a.dq) -
                               2.0 * a.dq.dot(a.dxdq.transpose() * a.dx) +
                               a.dx.dot(a.dqdq * a.dx);
    return -0.125 * std::exp(a.value) * (pair_term + triple_term / 3.0);
}

/// Phase-space jet of xi = c|q|/(k_B T(x)) built from a temperature jet
/// (Debye dispersion, eta1 = 0).
inline PhaseSpaceJet xi_jet_debye(const TemperatureJet& tj, double c, const Vec3& q,
                                  double k_B = 1.0) {
    if (!(tj.T > 0.0))
        throw domain_error("xi_jet_debye: T must be > 0");
    const double r = q.norm();
    if (r < DispersionModel::q_min)
        throw degenerate_momentum("xi_jet_debye: momentum below cutoff");
    const Vec3 n = q / r;
    const double T = tj.T;

    PhaseSpaceJet jet;
    jet.value = c * r / (k_B * T);
    jet.dx = -(c * r / (k_B * T * T)) * tj.grad;
    jet.dq = (c / (k_B * T)) * n;
    jet.dxdx = (c * r / k_B) *
               (2.0 / (T * T * T) * tj.grad * tj.grad.transpose() - tj.hess / (T * T));
    jet.dxdq = -(c / (k_B * T * T)) * tj.grad * n.transpose();
    jet.dqdq = (c / (k_B * T * r)) * (Mat3::Identity() - n * n.transpose());
    return jet;
}

/// Phase-space jet of xi = eta0(x) h(q) + eta1(x) . c(q) h(q) from a
/// multiplier jet, for any dispersion model.
inline PhaseSpaceJet xi_jet_from_multipliers(const MultiplierJet& mj, const DispersionModel& model,
                                             const Vec3& q) {
    const double h = model.energy(q);
    const Vec3 hg = model.group_velocity(q);
    const Mat3 hh = model.hessian(q);
    const Tensor3 h3 = model.third_derivatives(q);
    const Multipliers& eta = mj.value;

    // ch_m = h_m * h; first and second momentum derivatives of ch.
    Vec3 ch = hg * h;
    Mat3 dch; // dch(m, j) = d(ch_m)/dq_j = h_mj h + h_m h_j
    for (int m = 0; m < 3; ++m)
        for (int j = 0; j < 3; ++j)
            dch(m, j) = hh(m, j) * h + hg[m] * hg[j];
    std::array<Mat3, 3> d2ch; // d2ch[m](i, j) = h_mij h + h_mi h_j + h_mj h_i + h_m h_ij
    for (int m = 0; m < 3; ++m)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                d2ch[size_t(m)](i, j) =
                    h3(m, i, j) * h + hh(m, i) * hg[j] + hh(m, j) * hg[i] + hg[m] * hh(i, j);

    PhaseSpaceJet jet;
    jet.value = eta.eta0 * h + eta.eta1.dot(ch);
    for (int i = 0; i < 3; ++i) {
        jet.dx[i] = mj.eta0_grad[i] * h;
        jet.dq[i] = eta.eta0 * hg[i];
        for (int m = 0; m < 3; ++m) {
            jet.dx[i] += mj.eta1_grad(m, i) * ch[m];
            jet.dq[i] += eta.eta1[m] * dch(m, i);
        }
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double xx = mj.eta0_hess(i, j) * h;
            double xq = mj.eta0_grad[i] * hg[j];
            double qq = eta.eta0 * hh(i, j);
            for (int m = 0; m < 3; ++m) {
                xx += mj.eta1_hess[size_t(m)](i, j) * ch[m];
                xq += mj.eta1_grad(m, i) * dch(m, j);
                qq += eta.eta1[m] * d2ch[size_t(m)](i, j);
            }
            jet.dxdx(i, j) = xx;
            jet.dxdq(i, j) = xq;
            jet.dqdq(i, j) = qq;
        }
    return jet;
}

/// Closed form of g2 for a Debye branch with xi = c|q|/(k_B T(x)):
///   g2 = -(1/8) { occ''(xi) c^2/(k_B^2 T^4)
///                   [ 2|grad T|^2 - T lap T + n_i n_j (T T_ij - 3 T_i T_j) ]
///               + (occ'''(xi)/3) c^3 |q|/(k_B^3 T^5)
///                   [ (d_ij - n_i n_j) T_i T_j - T n_i n_j T_ij ] }.
inline double g2_mep_debye(const TemperatureJet& tj, double c, const Vec3& q, double k_B = 1.0) {
    if (!(tj.T > 0.0))
        throw domain_error("g2_mep_debye: T must be > 0");
    const double r = q.norm();
    if (r < DispersionModel::q_min)
        throw degenerate_momentum("g2_mep_debye: momentum below cutoff");
    const Vec3 n = q / r;
    const double T = tj.T;
    const double xi = c * r / (k_B * T);

    const double g2abs = tj.grad.squaredNorm();
    const double gn = n.dot(tj.grad);
    const double lap = tj.hess.trace();
    const double nHn = n.dot(tj.hess * n);
    const double nGGn = gn * gn;

    const double block_a = c * c / (k_B * k_B * std::pow(T, 4)) *
                           (2.0 * g2abs - T * lap + T * nHn - 3.0 * nGGn);
    const double block_b = c * c * c * r / (std::pow(k_B, 3) * std::pow(T, 5)) *
                           ((g2abs - nGGn) - T * nHn);
    return -0.125 * (occupancy_d2(xi) * block_a + occupancy_d3(xi) / 3.0 * block_b);
}

// ---------------------------------------------------------------------------
// Moment integrals
// ---------------------------------------------------------------------------

namespace detail {

inline const AngularGrid& cached_angular_grid(int d, int order) {
    static std::map<std::pair<int, int>, AngularGrid> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(d, order);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, AngularGrid::make(d, order)).first;
    return it->second;
}

/// int_0^inf z^p occ(z) dz = Gamma(p+1) zeta(p+1), p > 0.
inline double zeta_moment_occ(int p) {
    return std::tgamma(p + 1.0) * std::riemann_zeta(p + 1.0);
}
/// int_0^inf z^p (-occ'(z)) dz = Gamma(p+1) zeta(p), p >= 2.
inline double zeta_moment_g1(int p) { return std::tgamma(p + 1.0) * std::riemann_zeta(double(p)); }
/// int_0^inf z^p occ''(z) dz = Gamma(p+1) zeta(p-1), p >= 3.
inline double zeta_moment_d2(int p) {
    return std::tgamma(p + 1.0) * std::riemann_zeta(p - 1.0);
}
/// int_0^inf z^p (-occ'''(z)) dz = Gamma(p+1) zeta(p-2), p >= 4.
inline double zeta_moment_d3(int p) {
    return std::tgamma(p + 1.0) * std::riemann_zeta(p - 2.0);
}

struct ClosureFlags {
    bool jacobian = false;
    bool flux_tensor = false;
    bool g2_moments = false;
    bool tensors_tu = false;
};

/// Everything the closure can produce at one multiplier state. Fields are
/// only filled when the corresponding flag was requested.
struct ClosureEvaluation {
    double W0 = 0.0;
    Vec3 Q0 = Vec3::Zero();
    Eigen::Matrix4d jac = Eigen::Matrix4d::Zero(); // d(W,Q)/d(eta0,eta1)
    Mat3 J0 = Mat3::Zero();
    std::array<Mat3, 4> dJ{};                      // dJ/d eta_alpha
    G2Moments g2;
    Tensor3 T3;
    Tensor4 U4;
};

/// Debye evaluation: radial integrals in closed Gamma/zeta form, angular
/// integrals on the product sphere grid.
inline ClosureEvaluation closure_eval_debye(const MultiplierJet& mj, const BranchConfig& branch,
                                            const QuadratureSpec& spec, const ClosureFlags& flags) {
    const int d = branch.dim;
    const double c = branch.dispersion.sound_speed;
    const Multipliers& eta = mj.value;
    const double norm = std::pow(2.0 * M_PI, -d);

    if (flags.g2_moments && d < 3)
        throw divergent_integral("g2 moments: the order-two radial integrals diverge for d < 3");
    if (flags.tensors_tu && d < 3)
        throw divergent_integral("closure tensors T/U: radial integrand ~ q^(d-3) near 0 "
                                 "diverges for Debye with d < 3");

    const double r_occ = zeta_moment_occ(d);            // W, Q, J radial factor
    const double r_g1 = flags.jacobian || flags.flux_tensor ? zeta_moment_g1(d + 1) : 0.0;
    const double r_d2 = flags.g2_moments ? zeta_moment_d2(d) : 0.0;      // = I_1(d)
    const double r_d3 = flags.g2_moments ? zeta_moment_d3(d + 1) : 0.0;  // = I_2(d)
    const double r_tu = flags.tensors_tu ? zeta_moment_occ(d - 2) : 0.0;

    ClosureEvaluation out;
    const AngularGrid& grid = cached_angular_grid(d, spec.angular_nodes);

    for (size_t k = 0; k < grid.nodes.size(); ++k) {
        const Vec3& n = grid.nodes[k];
        const double w = grid.weights[k];
        const double a = eta.eta0 + c * eta.eta1.dot(n);
        if (!(a > 0.0))
            throw non_positive_exponent("closure: xi <= 0 along direction (" +
                                        std::to_string(n[0]) + ", " + std::to_string(n[1]) +
                                        ", " + std::to_string(n[2]) + ")");
        const double ca = c * a;
        const double f_mom = w * std::pow(ca, -(d + 1));

        out.W0 += f_mom;
        out.Q0 += (c * f_mom) * n;
        if (flags.flux_tensor || flags.jacobian) {
            const double f_jac = w * std::pow(ca, -(d + 2));
            if (flags.flux_tensor)
                out.J0 += (c * c * f_mom) * n * n.transpose();
            // psi_hat = (1, c n); jac_ab ~ -sum w psi_hat_a psi_hat_b a^-(d+2)
            Eigen::Vector4d psi;
            psi << 1.0, c * n[0], c * n[1], c * n[2];
            const Eigen::Matrix4d outer = psi * psi.transpose();
            out.jac -= f_jac * outer;
            if (flags.flux_tensor) {
                const Mat3 nn = n * n.transpose();
                for (int al = 0; al < 4; ++al)
                    out.dJ[size_t(al)] -= (c * c * f_jac * psi[al]) * nn;
            }
        }

        if (flags.g2_moments) {
            // xi = c a r; spatial pieces scale linearly in r:
            //   xi_x = c r A, xi_xx = c r B, xi_xq = c C, xi_q = c P,
            //   xi_qq = c eta0 (I - nn)/r.
            Vec3 A = mj.eta0_grad;
            Mat3 B = mj.eta0_hess;
            Mat3 C; // C(i,j) = d eta0/dx_i n_j + c d eta1_j/dx_i
            const Vec3 P = eta.eta0 * n + c * eta.eta1;
            for (int m = 0; m < 3; ++m) {
                A += c * n[m] * mj.eta1_grad.row(m).transpose();
                B += c * n[m] * mj.eta1_hess[size_t(m)];
            }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    C(i, j) = mj.eta0_grad[i] * n[j] + c * mj.eta1_grad(j, i);

            const double alpha =
                eta.eta0 * (B.trace() - n.dot(B * n)) - (C.cwiseProduct(C.transpose())).sum();
            const double beta = P.dot(B * P) - 2.0 * P.dot(C.transpose() * A) +
                                eta.eta0 * (A.squaredNorm() - std::pow(A.dot(n), 2));

            // <h g2> radial pieces; extra velocity factors only change the
            // angular monomial, not the radial power.
            const double t_a = -(std::pow(c, 3) * alpha / 8.0) * std::pow(ca, -(d + 1)) * r_d2;
            const double t_b = (std::pow(c, 4) * beta / 24.0) * std::pow(ca, -(d + 2)) * r_d3;
            const double base = w * (t_a + t_b);
            out.g2.W += base;
            out.g2.Q += (c * base) * n;
            out.g2.J += (c * c * base) * n * n.transpose();
        }

        if (flags.tensors_tu) {
            const double f_tu = w * std::pow(ca, -(d - 1));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int kk = 0; kk < 3; ++kk) {
                        double theta = 3.0 * n[i] * n[j] * n[kk];
                        if (i == j)
                            theta -= n[kk];
                        if (i == kk)
                            theta -= n[j];
                        if (j == kk)
                            theta -= n[i];
                        out.T3(i, j, kk) += f_tu * theta;
                        for (int r = 0; r < 3; ++r)
                            out.U4(i, j, kk, r) += f_tu * theta * c * n[r];
                    }
        }
    }

    const double mom_pref = norm * r_occ * std::pow(c, -d);
    out.W0 *= mom_pref;
    out.Q0 *= mom_pref;
    out.J0 *= mom_pref;
    const double jac_pref = norm * r_g1 * std::pow(c, -d);
    out.jac *= jac_pref;
    for (auto& m : out.dJ)
        m *= jac_pref;
    out.g2.W *= norm;
    out.g2.Q *= norm;
    out.g2.J *= norm;
    const double tu_pref = norm * r_tu * std::pow(c, 3 - d) * (flags.tensors_tu ? 1.0 : 0.0);
    out.T3 *= tu_pref;
    out.U4 *= tu_pref;
    return out;
}

/// Einstein evaluation: the symbol is constant, the group velocity vanishes
/// and g2 is identically zero; only W and dW/deta0 are nontrivial.
inline ClosureEvaluation closure_eval_einstein(const MultiplierJet& mj, const BranchConfig& branch,
                                               const ClosureFlags& flags) {
    const int d = branch.dim;
    const double eps0 = branch.dispersion.energy0;
    const double norm = std::pow(2.0 * M_PI, -d) * branch.bz_volume;
    const double xi = mj.value.eta0 * eps0;
    if (!(xi > 0.0))
        throw non_positive_exponent("closure (Einstein): eta0 must be positive");

    ClosureEvaluation out;
    out.W0 = norm * eps0 * occupancy(xi);
    if (flags.jacobian || flags.flux_tensor)
        out.jac(0, 0) = norm * eps0 * eps0 * occupancy_d1(xi);
    return out;
}

/// Quadratic evaluation. A nonzero eta1 makes xi = h (eta0 + eta1 . c)
/// unbounded below (the cubic flux term dominates at large |q|), so only
/// isotropic states are admissible. Radial integrals are adaptive in
/// z = eta0 h.
inline ClosureEvaluation closure_eval_quadratic(const MultiplierJet& mj,
                                                const BranchConfig& branch,
                                                const QuadratureSpec& spec,
                                                const ClosureFlags& flags) {
    const int d = branch.dim;
    const double ab = branch.dispersion.alpha_bar;
    const Multipliers& eta = mj.value;
    if (eta.eta1.norm() > 0.0)
        throw non_positive_exponent("closure (quadratic): nonzero eta1 makes the exponent "
                                    "unbounded below; only isotropic states are realizable");
    if (!(eta.eta0 > 0.0))
        throw non_positive_exponent("closure (quadratic): eta0 must be positive");

    const double norm = std::pow(2.0 * M_PI, -d) * sphere_measure(d);
    const double s = eta.eta0 * ab; // z = s r^2
    auto zmom = [&spec](double p, auto kernel) {
        return integrate_half_line(
            [p, kernel](double z) { return std::pow(z, p) * kernel(z); }, spec);
    };

    ClosureEvaluation out;
    // W = norm/(2 eta0) s^(-d/2) int z^(d/2) occ dz
    out.W0 = norm * 0.5 / eta.eta0 * std::pow(s, -0.5 * d) *
             zmom(0.5 * d, [](double z) { return occupancy(z); });
    if (flags.jacobian || flags.flux_tensor) {
        // dW/deta0 = -norm/(2 eta0^2) s^(-d/2) int z^(d/2+1) g1 dz
        out.jac(0, 0) = -norm * 0.5 / (eta.eta0 * eta.eta0) * std::pow(s, -0.5 * d) *
                        zmom(0.5 * d + 1.0, [](double z) { return -occupancy_d1(z); });
        // dQ_i/deta1_j = -delta_ij (norm/d) 2 ab^2 s^(-(d+6)/2) ... with
        // c_i c_j h^2 = 4 ab^4 r^6 n_i n_j.
        const double mqq = -sphere_measure(d) / d * std::pow(2.0 * M_PI, -d) * 2.0 *
                           std::pow(ab, 4) * std::pow(s, -0.5 * (d + 6)) *
                           zmom(0.5 * (d + 4), [](double z) { return -occupancy_d1(z); });
        for (int i = 0; i < d; ++i)
            out.jac(1 + i, 1 + i) = mqq;
    }
    if (flags.flux_tensor) {
        // J = delta_ij (norm/d) 2 ab^3 s^(-(d+4)/2) int z^((d+2)/2) occ dz
        const double jv = sphere_measure(d) / d * std::pow(2.0 * M_PI, -d) * 2.0 *
                          std::pow(ab, 3) * std::pow(s, -0.5 * (d + 4)) *
                          zmom(0.5 * (d + 2), [](double z) { return occupancy(z); });
        for (int i = 0; i < d; ++i)
            out.J0(i, i) = jv;
        // dJ/deta0: differentiate occ under the integral.
        const double djv = -sphere_measure(d) / d * std::pow(2.0 * M_PI, -d) * 2.0 *
                           std::pow(ab, 3) / eta.eta0 * std::pow(s, -0.5 * (d + 4)) *
                           zmom(0.5 * (d + 4), [](double z) { return -occupancy_d1(z); });
        for (int i = 0; i < d; ++i)
            out.dJ[0](i, i) = djv;
    }
    if (flags.g2_moments) {
        // Generic pointwise route: radial nodes in z, sphere grid, g2 from
        // the multiplier-jet phase-space jet.
        const AngularGrid& grid = cached_angular_grid(d, spec.angular_nodes);
        auto [gx, gw] = gauss_legendre(spec.radial_nodes);
        const double zmax = spec.tail_cutoff();
        for (int iz = 0; iz < spec.radial_nodes; ++iz) {
            const double z = 0.5 * zmax * (gx[size_t(iz)] + 1.0);
            const double wz = 0.5 * zmax * gw[size_t(iz)];
            const double r = std::sqrt(z / s);
            const double dr_dz = 0.5 / std::sqrt(z * s);
            const double h = z / eta.eta0;
            for (size_t k = 0; k < grid.nodes.size(); ++k) {
                const Vec3 q = r * grid.nodes[k];
                const double g2v = g2_mep_generic(xi_jet_from_multipliers(
                    mj, branch.dispersion, q));
                const double base = std::pow(2.0 * M_PI, -d) * grid.weights[k] * wz * dr_dz *
                                    std::pow(r, d - 1) * h * g2v;
                const Vec3 cv = branch.dispersion.group_velocity(q);
                out.g2.W += base;
                out.g2.Q += base * cv;
                out.g2.J += base * cv * cv.transpose();
            }
        }
    }
    // T3 and U4 vanish identically: the quadratic symbol has zero third
    // derivatives.
    return out;
}

inline ClosureEvaluation closure_eval(const MultiplierJet& mj, const BranchConfig& branch,
                                      const QuadratureSpec& spec, const ClosureFlags& flags) {
    branch.validate();
    spec.validate();
    switch (branch.dispersion.kind) {
    case DispersionModel::Kind::debye:
        return closure_eval_debye(mj, branch, spec, flags);
    case DispersionModel::Kind::einstein:
        return closure_eval_einstein(mj, branch, flags);
    case DispersionModel::Kind::quadratic:
        return closure_eval_quadratic(mj, branch, spec, flags);
    }
    throw error("closure_eval: unknown dispersion kind");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Public moment operations
// ---------------------------------------------------------------------------

/// Forward closure map: moments of the MEP distribution at both orders.
/// The order-two part combines the -eta^(2)-weighted Bose-kernel integrals
/// with the g2 integrals built from the multiplier jet:
///   (W2, Q2) = M(eta^(0)) eta^(2) + (<h g2>, <c h g2>).
inline MomentState moments_from_multipliers(const MultiplierJet& jet, const BranchConfig& branch,
                                            const QuadratureSpec& spec = {},
                                            const Multipliers& eta2 = {}) {
    detail::ClosureFlags flags;
    const bool has_eta2 = eta2.eta0 != 0.0 || eta2.eta1.norm() != 0.0;
    const bool has_derivatives = jet.eta0_grad.norm() != 0.0 || jet.eta0_hess.norm() != 0.0 ||
                                 jet.eta1_grad.norm() != 0.0 ||
                                 jet.eta1_hess[0].norm() + jet.eta1_hess[1].norm() +
                                         jet.eta1_hess[2].norm() !=
                                     0.0;
    flags.jacobian = has_eta2;
    flags.g2_moments = has_derivatives;
    const auto ev = detail::closure_eval(jet, branch, spec, flags);

    MomentState m;
    m.W0 = ev.W0;
    m.Q0 = ev.Q0;
    m.W2 = ev.g2.W;
    m.Q2 = ev.g2.Q;
    if (has_eta2) {
        Eigen::Vector4d e2;
        e2 << eta2.eta0, eta2.eta1[0], eta2.eta1[1], eta2.eta1[2];
        const Eigen::Vector4d lin = ev.jac * e2;
        m.W2 += lin[0];
        m.Q2 += lin.tail<3>();
    }
    return m;
}

/// Convenience overload without spatial derivatives or order-two input.
inline MomentState moments_from_multipliers(const Multipliers& eta, const BranchConfig& branch,
                                            const QuadratureSpec& spec = {}) {
    return moments_from_multipliers(MultiplierJet::from_value(eta), branch, spec);
}

/// Inverse closure map. Newton iteration with the analytic Jacobian on the
/// zero-order map eta^(0) -> (W0, Q0), with damped steps whenever a step
/// would leave the positivity region; then eta^(2) from the linear order-two
/// relation given the g2 integrals of the zero-order solution.
inline MultiplierSplit multipliers_from_moments(const MomentState& target,
                                                const BranchConfig& branch,
                                                const QuadratureSpec& spec = {},
                                                std::optional<Multipliers> guess = {},
                                                std::optional<G2Moments> g2 = {}) {
    branch.validate();
    if (!(target.W0 > 0.0))
        throw outside_realizable_set("multipliers_from_moments: W0 must be > 0");
    const int d = branch.dim;
    const auto kind = branch.dispersion.kind;

    if (kind == DispersionModel::Kind::debye) {
        const double c = branch.dispersion.sound_speed;
        if (target.Q0.norm() * d / (c * target.W0) >= 0.5)
            throw outside_realizable_set("multipliers_from_moments: flux too large relative "
                                         "to the energy density");
    }

    // Einstein: closed form; the flux rows are degenerate because the
    // branch cannot carry flux.
    if (kind == DispersionModel::Kind::einstein) {
        const double eps0 = branch.dispersion.energy0;
        const double norm = std::pow(2.0 * M_PI, -d) * branch.bz_volume;
        const double occ = target.W0 / (norm * eps0);
        if (target.Q0.norm() > 1e-12 * target.W0)
            throw outside_realizable_set("multipliers_from_moments: Einstein branch cannot "
                                         "carry an energy flux");
        MultiplierSplit out;
        out.zero.eta0 = std::log1p(1.0 / occ) / eps0;
        const auto ev = detail::closure_eval(MultiplierJet::from_value(out.zero), branch, spec,
                                             {.jacobian = true});
        const double g2w = g2 ? g2->W : 0.0;
        out.second.eta0 = (target.W2 - g2w) / ev.jac(0, 0);
        return out;
    }

    // Initial guess from the closed-form isotropic inverse plus the
    // linearized flux relation.
    Multipliers eta;
    if (guess) {
        eta = *guess;
    } else {
        detail::ClosureFlags f0;
        f0.jacobian = true;
        if (kind == DispersionModel::Kind::debye) {
            const double c = branch.dispersion.sound_speed;
            const double cw = detail::zeta_moment_occ(d) * sphere_measure(d) *
                              std::pow(2.0 * M_PI, -d) * std::pow(c, -d);
            eta.eta0 = std::pow(cw / target.W0, 1.0 / (d + 1));
            const auto ev0 =
                detail::closure_eval(MultiplierJet::from_value(eta), branch, spec, f0);
            for (int i = 0; i < d; ++i)
                eta.eta1[i] = target.Q0[i] / ev0.jac(1 + i, 1 + i);
        } else {
            eta.eta0 = 1.0;
        }
    }

    const double wq_scale = (kind == DispersionModel::Kind::debye)
                                ? branch.dispersion.sound_speed
                                : 1.0;
    const double tol = std::max(1e-13, spec.relative_tolerance * 1e-2);
    const int max_iter = 80;
    bool converged = false;
    Eigen::Matrix4d jac = Eigen::Matrix4d::Zero();

    auto residual_norm = [&](const Eigen::Vector4d& res) {
        double s = std::abs(res[0]) / target.W0;
        for (int i = 0; i < 3; ++i)
            s = std::max(s, std::abs(res[1 + i]) / (wq_scale * target.W0));
        return s;
    };

    detail::ClosureFlags flags;
    flags.jacobian = true;
    Eigen::Vector4d res;
    for (int it = 0; it < max_iter; ++it) {
        const auto ev = detail::closure_eval(MultiplierJet::from_value(eta), branch, spec, flags);
        jac = ev.jac;
        res << ev.W0 - target.W0, ev.Q0[0] - target.Q0[0], ev.Q0[1] - target.Q0[1],
            ev.Q0[2] - target.Q0[2];
        if (residual_norm(res) <= tol) {
            converged = true;
            break;
        }

        Eigen::Matrix4d m = jac;
        // For d < 3 or degenerate transverse directions keep the system
        // well posed by pinning unused multiplier components.
        for (int i = 0; i < 4; ++i)
            if (std::abs(m(i, i)) < 1e-300)
                m(i, i) = 1.0;
        Eigen::Vector4d step = m.fullPivLu().solve(-res);

        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving) {
            Multipliers trial;
            trial.eta0 = eta.eta0 + lambda * step[0];
            trial.eta1 = eta.eta1 + lambda * step.tail<3>();
            const bool positive =
                (kind != DispersionModel::Kind::debye)
                    ? trial.eta0 > 0.0
                    : trial.eta0 - branch.dispersion.sound_speed * trial.eta1.norm() > 0.0;
            if (positive) {
                eta = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw no_convergence("multipliers_from_moments: damped Newton left the "
                                 "positivity region");
    }
    if (!converged)
        throw no_convergence("multipliers_from_moments: Newton did not reach tolerance " +
                             std::to_string(tol));

    MultiplierSplit out;
    out.zero = eta;

    // Order-two linear solve: (W2, Q2) = M eta^(2) + G2.
    Eigen::Vector4d rhs;
    const G2Moments g2m = g2 ? *g2 : G2Moments{};
    rhs << target.W2 - g2m.W, target.Q2[0] - g2m.Q[0], target.Q2[1] - g2m.Q[1],
        target.Q2[2] - g2m.Q[2];
    Eigen::Matrix4d m2 = jac;
    for (int i = 0; i < 4; ++i)
        if (std::abs(m2(i, i)) < 1e-300)
            m2(i, i) = 1.0;
    const Eigen::Vector4d e2 = m2.fullPivLu().solve(rhs);
    out.second.eta0 = e2[0];
    out.second.eta1 = e2.tail<3>();
    return out;
}

/// Flux tensor J at the requested hbar order:
///   J^(0) = <c (x) c h g0>,
///   J^(2) = (dJ/d eta) . eta^(2) + <c (x) c h g2>.
inline Mat3 flux_tensor_j(const MultiplierJet& jet, const BranchConfig& branch,
                          const QuadratureSpec& spec, int order, const Multipliers& eta2 = {}) {
    if (order != 0 && order != 2)
        throw domain_error("flux_tensor_j: order must be 0 or 2");
    detail::ClosureFlags flags;
    flags.flux_tensor = true;
    if (order == 2) {
        const bool has_derivatives =
            jet.eta0_grad.norm() != 0.0 || jet.eta0_hess.norm() != 0.0 ||
            jet.eta1_grad.norm() != 0.0;
        flags.g2_moments = has_derivatives;
        flags.jacobian = true;
    }
    const auto ev = detail::closure_eval(jet, branch, spec, flags);
    if (order == 0)
        return ev.J0;
    Mat3 j2 = ev.g2.J;
    const std::array<double, 4> e2{eta2.eta0, eta2.eta1[0], eta2.eta1[1], eta2.eta1[2]};
    for (int al = 0; al < 4; ++al)
        j2 += e2[size_t(al)] * ev.dJ[size_t(al)];
    return j2;
}

/// The fully symmetric hbar^2 transport tensors
///   T_ijk  = <h (d^3 h/dq_i dq_j dq_k) g0>,
///   U_ijkr = <c_r h (d^3 h/dq_i dq_j dq_k) g0>,
/// evaluated at the zero-order multipliers. Identically zero for Einstein
/// and quadratic symbols; divergent for Debye below d = 3.
inline ClosureTensors closure_tensors_TU(const Multipliers& eta0, const BranchConfig& branch,
                                         const QuadratureSpec& spec = {}) {
    detail::ClosureFlags flags;
    flags.tensors_tu = true;
    flags.flux_tensor = true;
    const auto ev = detail::closure_eval(MultiplierJet::from_value(eta0), branch, spec, flags);
    ClosureTensors out;
    out.J = ev.J0;
    out.T3 = ev.T3;
    out.U4 = ev.U4;
    return out;
}

} // namespace wigphon
