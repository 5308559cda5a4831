#ifndef POROSTAB_POLYROOTS_HPP
#define POROSTAB_POLYROOTS_HPP

/// @file polyroots.hpp
/// Root finding for low-degree real polynomials (Aberth-Ehrlich iteration
/// with a companion-matrix fallback) and Routh-Hurwitz classification for
/// degrees 2, 3 and 5.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "porostab/common.hpp"

namespace porostab {

using Complex = std::complex<double>;

/// Outcome of the Routh-Hurwitz evaluation. Condition values must all be
/// strictly positive for stability; no tolerance is applied.
struct RhReport {
    int degree = 0;
    std::vector<std::pair<std::string, double>> condition_values;
    bool all_satisfied = false;
    std::optional<std::string> first_violated;
};

namespace detail {

inline Complex horner(const std::vector<Complex>& c, Complex z) {
    Complex v = c.front();
    for (std::size_t i = 1; i < c.size(); ++i) v = v * z + c[i];
    return v;
}

/// Scale-relative residual bound: sum |a_j| |z|^j.
inline double residual_scale(const std::vector<double>& desc, Complex z) {
    const double az = std::abs(z);
    double s = 0.0, pw = 1.0;
    for (auto it = desc.rbegin(); it != desc.rend(); ++it) {
        s += std::abs(*it) * pw;
        pw *= az;
    }
    return s;
}

/// Companion-matrix eigenvalues of a monic-normalised polynomial,
/// coefficients descending.
inline std::vector<Complex> companion_roots(const std::vector<double>& desc) {
    const int n = static_cast<int>(desc.size()) - 1;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) C(i, n - 1) = -desc[n - i] / desc[0];
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C);
    std::vector<Complex> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()[i];
    return roots;
}

} // namespace detail

/// All complex roots of a real polynomial; coefficients descending
/// (leading first). Leading zeros below 1e-300 * max|coeff| are stripped.
/// Every returned root satisfies |P(z)| <= 1e-10 * sum_j |a_j||z|^j.
inline std::vector<Complex> poly_roots(const std::vector<double>& coeffs_in) {
    double amax = 0.0;
    for (double c : coeffs_in) amax = std::max(amax, std::abs(c));
    if (amax == 0.0) throw DegenerateAllZero("poly_roots: all coefficients are zero");

    std::vector<double> desc = coeffs_in;
    while (desc.size() > 1 && std::abs(desc.front()) <= 1e-300 * amax)
        desc.erase(desc.begin());
    const int n = static_cast<int>(desc.size()) - 1;
    if (n < 1) throw DegenerateAllZero("poly_roots: degree zero after stripping");

    std::vector<Complex> c(desc.begin(), desc.end());
    std::vector<Complex> dc(n);
    for (int i = 0; i < n; ++i) dc[i] = c[i] * double(n - i);

    // Aberth-Ehrlich from a Cauchy-bound circle with an irrational angular
    // offset so no starting point sits on a symmetry axis.
    double cauchy = 0.0;
    for (int i = 1; i <= n; ++i) cauchy = std::max(cauchy, std::abs(desc[i] / desc[0]));
    const double radius = 1.0 + cauchy;
    std::vector<Complex> z(n);
    for (int i = 0; i < n; ++i) {
        const double ang = 2.0 * M_PI * i / n + 0.4;
        z[i] = radius * Complex(std::cos(ang), std::sin(ang));
    }

    bool converged = false;
    for (int iter = 0; iter < 200 && !converged; ++iter) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            const Complex p = detail::horner(c, z[i]);
            const Complex dp = detail::horner(dc, z[i]);
            if (p == Complex(0.0)) continue;
            Complex newton = (dp != Complex(0.0)) ? p / dp : Complex(0.0);
            Complex sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) sum += 1.0 / (z[i] - z[j]);
            const Complex denom = 1.0 - newton * sum;
            const Complex w = (std::abs(denom) > 1e-300) ? newton / denom : newton;
            z[i] -= w;
            if (std::abs(w) > 1e-14 * (1.0 + std::abs(z[i]))) converged = false;
        }
    }

    auto residual_ok = [&](const std::vector<Complex>& roots) {
        for (const Complex& r : roots) {
            const double res = std::abs(detail::horner(c, r));
            if (res > 1e-10 * detail::residual_scale(desc, r)) return false;
        }
        return true;
    };

    if (!converged || !residual_ok(z)) {
        z = detail::companion_roots(desc);
        // a few Newton polishing steps
        for (Complex& r : z) {
            for (int it = 0; it < 5; ++it) {
                const Complex p = detail::horner(c, r);
                const Complex dp = detail::horner(dc, r);
                if (std::abs(dp) < 1e-300) break;
                const Complex step = p / dp;
                r -= step;
                if (std::abs(step) < 1e-15 * (1.0 + std::abs(r))) break;
            }
        }
        if (!residual_ok(z))
            throw Error("poly_roots: residual bound violated after fallback");
    }
    return z;
}

/// Routh-Hurwitz conditions for degrees 2, 3 and 5; coefficients descending.
/// The sign of the leading coefficient is normalised away first (stability of
/// c*P equals stability of P for c != 0).
inline RhReport routh_hurwitz(const std::vector<double>& coeffs_in, int degree) {
    if (degree != 2 && degree != 3 && degree != 5)
        throw UnsupportedDegree("routh_hurwitz: degree must be 2, 3 or 5");
    if (static_cast<int>(coeffs_in.size()) != degree + 1)
        throw UnsupportedDegree("routh_hurwitz: coefficient count does not match degree");
    if (coeffs_in.front() == 0.0)
        throw ZeroLeadingCoefficient("routh_hurwitz: zero leading coefficient");

    // ascending indexing a[0]..a[degree], normalised so the leading
    // coefficient is positive
    std::vector<double> a(degree + 1);
    const double sign = coeffs_in.front() > 0 ? 1.0 : -1.0;
    for (int i = 0; i <= degree; ++i) a[degree - i] = sign * coeffs_in[i];

    RhReport rep;
    rep.degree = degree;
    for (int i = 0; i <= degree; ++i)
        rep.condition_values.emplace_back("a" + std::to_string(i), a[i]);

    if (degree == 3) {
        rep.condition_values.emplace_back("C2", a[1] * a[2] - a[0] * a[3]);
    } else if (degree == 5) {
        rep.condition_values.emplace_back("C2", a[3] * a[4] - a[2] * a[5]);
        rep.condition_values.emplace_back(
            "C3", a[2] * a[3] * a[4] - a[2] * a[2] * a[5] - a[1] * a[4] * a[4] +
                      a[0] * a[4] * a[5]);
        rep.condition_values.emplace_back(
            "C4", a[0] * a[2] * a[3] * a[4] * a[5] - a[0] * a[3] * a[3] * a[4] * a[4] +
                      a[1] * a[2] * a[3] * a[4] * a[4] - a[1] * a[2] * a[2] * a[4] * a[5] -
                      a[1] * a[1] * a[4] * a[4] * a[4] + 2.0 * a[0] * a[1] * a[4] * a[4] * a[5] -
                      a[0] * a[0] * a[4] * a[5] * a[5]);
    }

    rep.all_satisfied = true;
    for (const auto& [label, value] : rep.condition_values) {
        if (!(value > 0.0)) {
            rep.all_satisfied = false;
            if (!rep.first_violated) rep.first_violated = label;
        }
    }
    return rep;
}

/// Largest real part over all roots; the dispersion-curve ordinate.
inline double max_growth_rate(const std::vector<double>& coeffs) {
    const auto roots = poly_roots(coeffs);
    double m = -std::numeric_limits<double>::infinity();
    for (const Complex& r : roots) m = std::max(m, r.real());
    return m;
}

} // namespace porostab

#endif
