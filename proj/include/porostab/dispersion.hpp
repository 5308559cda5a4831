#ifndef POROSTAB_DISPERSION_HPP
#define POROSTAB_DISPERSION_HPP

/// @file dispersion.hpp
/// Characteristic polynomial P(phi;k^2) = P1^{d-1} P2 of the linearised
/// coupled system, and the plane-wave symbol matrix whose generalized
/// eigenvalues provide an independent ground truth for the roots of P2.
///
/// The quintic is assembled from the factorised closed form
///   P2(phi) = (S*M + alpha^2 k^2 phi) * Q + gamma k^2 phi * S * T,
/// with S = c0 phi + (kappa/eta) k^2 the storage/Darcy factor,
/// M = rho phi^2 + (2 mu + lambda) k^2 the longitudinal elastic factor,
/// Q = (phi + D1 k^2 - fw1)(phi + D2 k^2 - gw2) - fw2 gw1 the
/// reaction-diffusion factor, and
/// T = theta1 (w10 (phi + D2 k^2 - gw2) + w20 fw2)
///   + theta2 (w20 (phi + D1 k^2 - fw1) + w10 gw1)
/// the active-stress/volume-source coupling term, all under Upsilon = I.

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "porostab/common.hpp"
#include "porostab/model.hpp"
#include "porostab/polyroots.hpp"

namespace porostab {

enum class Regime { General, Uncoupled, ZeroBeta1, ZeroBeta2, ZeroBeta3 };

/// Real coefficients of P2 for one wavenumber. coeffs[i] multiplies phi^i;
/// degree is 5 for rho > 0 and 3 in the quasi-static case (a4 = a5 = 0).
struct DispersionPoly {
    int degree = 5;
    std::array<double, 6> coeffs{}; // ascending, a0..a5
    Regime regime = Regime::General;
    double k2 = 0.0;

    /// Descending coefficient vector of length degree+1 for poly_roots.
    std::vector<double> descending() const {
        std::vector<double> d(degree + 1);
        for (int i = 0; i <= degree; ++i) d[i] = coeffs[degree - i];
        return d;
    }
};

/// First-order pencil M dz/dt = L z of the linearised system for a plane
/// wave exp(phi t + i k.x), with z = (u, v = du/dt, p, psi, w1, w2) and the
/// total pressure kept as an algebraic constraint row (M is singular).
struct SymbolMatrix {
    Eigen::MatrixXcd M;
    Eigen::MatrixXcd L;
    std::vector<double> k_vec;
    bool upsilon_identity = true;
};

namespace detail {

/// Multiply two small polynomials stored ascending.
inline std::array<double, 6> pmul(const std::array<double, 6>& a, int da,
                                  const std::array<double, 6>& b, int db) {
    std::array<double, 6> r{};
    for (int i = 0; i <= da; ++i)
        for (int j = 0; j <= db; ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline void check_regime(const ModelParams& p, Regime regime) {
    if (regime == Regime::ZeroBeta1 && p.beta1 != 0.0)
        throw RegimeMismatch("regime ZeroBeta1 requires beta1 = 0");
    if (regime == Regime::ZeroBeta2 && p.beta2 != 0.0)
        throw RegimeMismatch("regime ZeroBeta2 requires beta2 = 0");
    if (regime == Regime::ZeroBeta3 && p.beta3 != 0.0)
        throw RegimeMismatch("regime ZeroBeta3 requires beta3 = 0");
}

} // namespace detail

/// Coefficients of P2(phi;k^2) for the given regime under Upsilon = I.
/// Uncoupled drops every term carrying gamma or tau; the ZeroBeta regimes
/// require the corresponding rate to vanish in `params`.
inline DispersionPoly assemble_quintic(const ModelParams& p, const SteadyState& ss,
                                       double k2, Regime regime = Regime::General) {
    if (k2 < 0) throw Error("assemble_quintic: k2 must be non-negative");
    detail::check_regime(p, regime);

    const bool coupled = (regime != Regime::Uncoupled);
    const double mu = p.mu(), lam = p.lambda();
    const double kn = p.kappa / p.eta;
    const double th1 = coupled ? ss.theta1 : 0.0;
    const double th2 = coupled ? ss.theta2 : 0.0;
    const double gamma = coupled ? p.gamma : 0.0;

    using P = std::array<double, 6>;
    const P S = {kn * k2, p.c0};
    const P M = {(2.0 * mu + lam) * k2, 0.0, p.rho};
    const P chi1 = {p.D1 * k2 - ss.fw1, 1.0};
    const P chi2 = {p.D2 * k2 - ss.gw2, 1.0};
    P Q = detail::pmul(chi1, 1, chi2, 1);
    Q[0] -= ss.fw2 * ss.gw1;

    P lhs = detail::pmul(S, 1, M, 2); // degree 3
    lhs[1] += p.alpha * p.alpha * k2; // + alpha^2 k^2 phi

    P P2 = detail::pmul(lhs, 3, Q, 2);

    if (gamma != 0.0 && (th1 != 0.0 || th2 != 0.0)) {
        P T{};
        T[0] = th1 * (ss.w10 * chi2[0] + ss.w20 * ss.fw2) +
               th2 * (ss.w20 * chi1[0] + ss.w10 * ss.gw1);
        T[1] = th1 * ss.w10 + th2 * ss.w20;
        P ST = detail::pmul(S, 1, T, 1); // degree 2
        for (int i = 0; i <= 2; ++i) P2[i + 1] += gamma * k2 * ST[i];
    }

    DispersionPoly out;
    out.degree = (p.rho > 0.0) ? 5 : 3;
    out.coeffs = P2;
    out.regime = regime;
    out.k2 = k2;
    return out;
}

/// Roots of the transverse factor P1 = rho phi^2 + mu k^2.
inline std::pair<Complex, Complex> p1_factor_roots(const ModelParams& p, double k2) {
    if (p.rho <= 0.0) throw RhoZero("p1_factor_roots: P1 degenerates for rho = 0");
    if (k2 < 0) throw Error("p1_factor_roots: k2 must be non-negative");
    const double w = std::sqrt(p.mu() * k2 / p.rho);
    return {Complex(0.0, w), Complex(0.0, -w)};
}

/// Plane-wave symbol pencil for wavenumber vector k_vec (d = 2 or 3).
/// Size is 2d+4 with layout (u_1..u_d, v_1..v_d, p, psi, w1, w2).
/// With upsilon_identity = false the active-stress direction tensor
/// Upsilon = k_dir (x) k_dir is used instead of the identity.
inline SymbolMatrix assemble_symbol_matrix(const ModelParams& p, const SteadyState& ss,
                                           const std::vector<double>& k_vec,
                                           bool upsilon_identity = true) {
    const int d = static_cast<int>(k_vec.size());
    if (d != 2 && d != 3) throw Error("assemble_symbol_matrix: k_vec must have 2 or 3 components");
    const int n = 2 * d + 4;
    const int iu = 0, iv = d, ip = 2 * d, ipsi = 2 * d + 1, iw1 = 2 * d + 2, iw2 = 2 * d + 3;
    const Complex I(0.0, 1.0);

    double k2 = 0.0;
    for (double kj : k_vec) k2 += kj * kj;
    const double mu = p.mu(), lam = p.lambda();

    SymbolMatrix sm;
    sm.k_vec = k_vec;
    sm.upsilon_identity = upsilon_identity;
    sm.M = Eigen::MatrixXcd::Zero(n, n);
    sm.L = Eigen::MatrixXcd::Zero(n, n);

    // Upsilon k, with Upsilon either the identity or k_dir (x) k_dir
    // (third direction component zero for d = 3)
    std::vector<double> Yk(k_vec);
    if (!upsilon_identity) {
        std::array<double, 3> kd = {p.k_dir[0], p.k_dir[1], 0.0};
        double kdotk = 0.0;
        for (int m = 0; m < d; ++m) kdotk += kd[m] * k_vec[m];
        for (int j = 0; j < d; ++j) Yk[j] = kd[j] * kdotk;
    }

    // du/dt = v
    for (int j = 0; j < d; ++j) {
        sm.M(iu + j, iu + j) = 1.0;
        sm.L(iu + j, iv + j) = 1.0;
    }
    // rho dv/dt = -mu (k^2 u + k (k.u)) - i k psi + i (Upsilon k) (theta . w)
    for (int j = 0; j < d; ++j) {
        sm.M(iv + j, iv + j) = p.rho;
        for (int m = 0; m < d; ++m)
            sm.L(iv + j, iu + m) = -mu * ((j == m ? k2 : 0.0) + k_vec[j] * k_vec[m]);
        sm.L(iv + j, ipsi) = -I * k_vec[j];
        sm.L(iv + j, iw1) = I * Yk[j] * ss.theta1;
        sm.L(iv + j, iw2) = I * Yk[j] * ss.theta2;
    }
    // (c0 + alpha^2/lambda) dp/dt - (alpha/lambda) dpsi/dt = -(kappa/eta) k^2 p
    sm.M(ip, ip) = p.c0 + p.alpha * p.alpha / lam;
    sm.M(ip, ipsi) = -p.alpha / lam;
    sm.L(ip, ip) = -(p.kappa / p.eta) * k2;
    // algebraic constraint: psi = alpha p - lambda i k.u
    sm.L(ipsi, ipsi) = -1.0;
    sm.L(ipsi, ip) = p.alpha;
    for (int j = 0; j < d; ++j) sm.L(ipsi, iu + j) = -lam * I * k_vec[j];
    // dw1/dt - gamma w10 d(i k.u)/dt = (fw1 - D1 k^2) w1 + fw2 w2
    sm.M(iw1, iw1) = 1.0;
    sm.M(iw2, iw2) = 1.0;
    for (int j = 0; j < d; ++j) {
        sm.M(iw1, iu + j) = -p.gamma * ss.w10 * I * k_vec[j];
        sm.M(iw2, iu + j) = -p.gamma * ss.w20 * I * k_vec[j];
    }
    sm.L(iw1, iw1) = ss.fw1 - p.D1 * k2;
    sm.L(iw1, iw2) = ss.fw2;
    sm.L(iw2, iw1) = ss.gw1;
    sm.L(iw2, iw2) = ss.gw2 - p.D2 * k2;

    return sm;
}

/// Finite eigenvalues of the pencil det(phi M - L) = 0 by shift-and-invert:
/// eigenvalues zeta of (L - s M)^{-1} M map to phi = s + 1/zeta; zeta near
/// zero corresponds to the infinite eigenvalues of the singular M.
inline std::vector<Complex> pencil_eigenvalues(const SymbolMatrix& sm,
                                               double infinite_cutoff = 1e-8) {
    const int n = static_cast<int>(sm.M.rows());
    double scale = std::max(sm.L.cwiseAbs().maxCoeff(), 1.0);

    const std::array<Complex, 5> shifts = {
        Complex(0.31, 0.47), Complex(-0.83, 0.29), Complex(1.7, -0.61),
        Complex(-2.9, -1.3), Complex(0.11, 2.3)};
    for (const Complex& s0 : shifts) {
        const Complex s = s0 * scale / std::max(sm.M.cwiseAbs().maxCoeff(), 1e-30);
        Eigen::MatrixXcd A = sm.L - s * sm.M;
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
        if (!lu.isInvertible()) continue;
        Eigen::MatrixXcd B = lu.solve(sm.M);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(B, false);
        std::vector<Complex> finite;
        for (int i = 0; i < n; ++i) {
            const Complex zeta = es.eigenvalues()[i];
            if (std::abs(zeta) > infinite_cutoff / std::abs(s))
                finite.push_back(s + 1.0 / zeta);
        }
        return finite;
    }
    throw Error("pencil_eigenvalues: pencil appears singular for every shift");
}

} // namespace porostab

#endif
