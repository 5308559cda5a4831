#ifndef POROSTAB_STABMAP_HPP
#define POROSTAB_STABMAP_HPP

/// @file stabmap.hpp
/// Figure-level drivers of the stability analysis: level-set scans of
/// Routh-Hurwitz expressions over (k, parameter) grids with marching-squares
/// contour extraction, patterning-space boundary curves in the
/// (beta2, beta3) plane, bisection searches for critical parameter values,
/// dispersion curves, and the homogeneous (k = 0) classifier.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "porostab/common.hpp"
#include "porostab/dispersion.hpp"
#include "porostab/model.hpp"
#include "porostab/polyroots.hpp"

namespace porostab {

enum class RhoMode { Inertial, QuasiStatic };

/// Scan descriptor: one sweep parameter against a wavenumber axis.
struct ScanGrid {
    std::string param_name = "beta2"; ///< beta1 | beta2 | beta3 | tau | gamma
    std::vector<double> param_values; ///< strictly monotone, >= 2 entries
    std::vector<double> k_values;     ///< strictly monotone, >= 2 entries
    Regime regime = Regime::General;
    ThetaVariant theta_variant = ThetaVariant::Linear;
    RhoMode rho_mode = RhoMode::Inertial;

    void validate() const {
        static const char* names[] = {"beta1", "beta2", "beta3", "tau", "gamma"};
        if (std::find_if(std::begin(names), std::end(names), [&](const char* n) {
                return param_name == n;
            }) == std::end(names))
            throw Error("ScanGrid: unknown param_name '" + param_name + "'");
        auto monotone = [](const std::vector<double>& v) {
            if (v.size() < 2) return false;
            for (std::size_t i = 1; i < v.size(); ++i)
                if (!(v[i] > v[i - 1])) return false;
            return true;
        };
        if (!monotone(param_values)) throw Error("ScanGrid: param_values must be strictly increasing with >= 2 entries");
        if (!monotone(k_values)) throw Error("ScanGrid: k_values must be strictly increasing with >= 2 entries");
    }
};

/// Sampled expression values over the grid plus the extracted zero level set.
/// values(i, j) is the expression at (k_values[i], param_values[j]);
/// contour vertices are (param, k) pairs.
struct LevelSetField {
    Eigen::MatrixXd values;
    std::string label;
    std::vector<double> k_values;
    std::vector<double> param_values;
    std::vector<std::vector<std::array<double, 2>>> contour_polylines;
};

namespace detail {

inline void set_param(ModelParams& p, const std::string& name, double value) {
    if (name == "beta1") p.beta1 = value;
    else if (name == "beta2") p.beta2 = value;
    else if (name == "beta3") p.beta3 = value;
    else if (name == "tau") p.tau = value;
    else if (name == "gamma") p.gamma = value;
    else throw Error("set_param: unknown parameter '" + name + "'");
}

/// Number of scan worker threads: hardware concurrency capped by the
/// POROSTAB_THREADS environment variable.
inline int scan_threads() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("POROSTAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

/// Marching squares over a structured grid with linear interpolation along
/// cell edges; the saddle cases are disambiguated by the cell-average sign.
/// Returns chained polylines of (x, y) vertices.
inline std::vector<std::vector<std::array<double, 2>>> marching_squares(
    const Eigen::MatrixXd& v, const std::vector<double>& ys,
    const std::vector<double>& xs) {
    using Pt = std::array<double, 2>;
    struct Seg {
        Pt a, b;
    };
    std::vector<Seg> segs;

    auto lerp = [](double x0, double x1, double v0, double v1) {
        return x0 + (x1 - x0) * (v0 / (v0 - v1));
    };

    const int nr = static_cast<int>(v.rows());
    const int nc = static_cast<int>(v.cols());
    for (int i = 0; i + 1 < nr; ++i) {
        for (int j = 0; j + 1 < nc; ++j) {
            // corners counterclockwise from bottom-left
            const double c0 = v(i, j), c1 = v(i, j + 1), c2 = v(i + 1, j + 1), c3 = v(i + 1, j);
            const double x0 = xs[j], x1 = xs[j + 1], y0 = ys[i], y1 = ys[i + 1];
            const int cfg = (c0 > 0 ? 1 : 0) | (c1 > 0 ? 2 : 0) | (c2 > 0 ? 4 : 0) | (c3 > 0 ? 8 : 0);
            if (cfg == 0 || cfg == 15) continue;

            const Pt e0{lerp(x0, x1, c0, c1), y0}; // bottom
            const Pt e1{x1, lerp(y0, y1, c1, c2)}; // right
            const Pt e2{lerp(x1, x0, c2, c3), y1}; // top
            const Pt e3{x0, lerp(y1, y0, c3, c0)}; // left
            auto emit = [&](const Pt& a, const Pt& b) { segs.push_back({a, b}); };

            switch (cfg) {
            case 1: case 14: emit(e3, e0); break;
            case 2: case 13: emit(e0, e1); break;
            case 3: case 12: emit(e3, e1); break;
            case 4: case 11: emit(e1, e2); break;
            case 6: case 9: emit(e0, e2); break;
            case 7: case 8: emit(e2, e3); break;
            case 5:
                if (c0 + c1 + c2 + c3 > 0) { emit(e0, e1); emit(e2, e3); }
                else { emit(e3, e0); emit(e1, e2); }
                break;
            case 10:
                if (c0 + c1 + c2 + c3 > 0) { emit(e3, e0); emit(e1, e2); }
                else { emit(e0, e1); emit(e2, e3); }
                break;
            }
        }
    }

    // chain segments into polylines by exact-quantised endpoint matching
    const double sx = std::abs(xs.back() - xs.front()) + std::abs(ys.back() - ys.front());
    const double q = sx > 0 ? 1e-12 * sx : 1e-12;
    auto key = [&](const Pt& p) {
        return std::pair<long long, long long>(std::llround(p[0] / q), std::llround(p[1] / q));
    };
    std::map<std::pair<long long, long long>, std::vector<int>> at;
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        at[key(segs[s].a)].push_back(s);
        at[key(segs[s].b)].push_back(s);
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<std::vector<Pt>> lines;

    auto walk = [&](int s0, bool from_a) {
        std::vector<Pt> line;
        int s = s0;
        Pt cur = from_a ? segs[s0].a : segs[s0].b;
        line.push_back(cur);
        while (true) {
            used[s] = true;
            const Pt next = (key(segs[s].a) == key(cur)) ? segs[s].b : segs[s].a;
            line.push_back(next);
            cur = next;
            int cont = -1;
            for (int t : at[key(cur)])
                if (!used[t]) { cont = t; break; }
            if (cont < 0) break;
            s = cont;
        }
        return line;
    };

    // open chains first (endpoints with a single incident segment), then loops
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        if (used[s]) continue;
        const bool a_open = at[key(segs[s].a)].size() == 1;
        const bool b_open = at[key(segs[s].b)].size() == 1;
        if (a_open || b_open) lines.push_back(walk(s, a_open));
    }
    for (int s = 0; s < static_cast<int>(segs.size()); ++s)
        if (!used[s]) lines.push_back(walk(s, true));
    return lines;
}

} // namespace detail

/// Scan an arbitrary scalar function f(k, param) over the grid axes and
/// extract its zero level set. Test seam and backend of `scan`.
inline LevelSetField scan_function(const std::function<double(double, double)>& f,
                                   const std::vector<double>& k_values,
                                   const std::vector<double>& param_values,
                                   const std::string& label = "") {
    LevelSetField out;
    out.label = label;
    out.k_values = k_values;
    out.param_values = param_values;
    const int nr = static_cast<int>(k_values.size());
    const int nc = static_cast<int>(param_values.size());
    out.values.resize(nr, nc);

    const int nthreads = std::min(detail::scan_threads(), nr);
    if (nthreads <= 1) {
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nc; ++j) out.values(i, j) = f(k_values[i], param_values[j]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (int i = t; i < nr; i += nthreads)
                        for (int j = 0; j < nc; ++j)
                            out.values(i, j) = f(k_values[i], param_values[j]);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    out.contour_polylines = detail::marching_squares(out.values, k_values, param_values);
    return out;
}

namespace detail {

/// Expression evaluator shared by scan and critical_parameter: the named
/// Routh-Hurwitz condition value at wavenumber k with the swept parameter
/// set to p.
inline std::function<double(double, double)> rh_evaluator(const ModelParams& base,
                                                          const ScanGrid& grid,
                                                          const std::string& expression) {
    ModelParams proto = base;
    proto.theta_variant = grid.theta_variant;
    if (grid.rho_mode == RhoMode::QuasiStatic) proto.rho = 0.0;
    return [proto, grid, expression](double k, double pval) {
        ModelParams p = proto;
        detail::set_param(p, grid.param_name, pval);
        const SteadyState ss = steady_state(p);
        const DispersionPoly poly = assemble_quintic(p, ss, k * k, grid.regime);
        const RhReport rep = routh_hurwitz(poly.descending(), poly.degree);
        for (const auto& [label, value] : rep.condition_values)
            if (label == expression) return value;
        throw Error("scan: expression '" + expression + "' is not a condition of degree " +
                    std::to_string(poly.degree));
    };
}

} // namespace detail

/// Level-set scan of one Routh-Hurwitz expression (label "a0".."a5", "C2",
/// "C3" or "C4") over the (k, parameter) grid.
inline LevelSetField scan(const ModelParams& params, const ScanGrid& grid,
                          const std::string& expression) {
    grid.validate();
    return scan_function(detail::rh_evaluator(params, grid, expression), grid.k_values,
                         grid.param_values, expression);
}

/// Zero-level boundary curves in the (beta2, beta3) plane:
///   necessary_b:   D2 (beta3 - beta2) - D1 (beta2 + beta3)^3
///   discriminant:  36 b^2 c^2 - 128 D1 D2 c^3 with b = D2 fw1 + D1 gw2 and
///                  c = beta1^2 (beta2 + beta3)^2
///   homogeneous:   (beta2 + beta3)^3 - (beta3 - beta2)
/// In each returned field the param axis is beta2 and the k axis is beta3.
struct PatterningSpace {
    LevelSetField necessary_b;
    LevelSetField discriminant;
    LevelSetField homogeneous;
};

inline PatterningSpace patterning_space(const ModelParams& params,
                                        std::pair<double, double> beta2_range,
                                        std::pair<double, double> beta3_range,
                                        int n_beta2, int n_beta3) {
    if (!(beta2_range.first > 0 && beta2_range.second > beta2_range.first &&
          beta3_range.first > 0 && beta3_range.second > beta3_range.first))
        throw Error("patterning_space: ranges must be positive and increasing");
    if (n_beta2 < 2 || n_beta3 < 2) throw Error("patterning_space: need >= 2 grid points per axis");

    auto linspace = [](double a, double b, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
        return v;
    };
    const std::vector<double> b2s = linspace(beta2_range.first, beta2_range.second, n_beta2);
    const std::vector<double> b3s = linspace(beta3_range.first, beta3_range.second, n_beta3);

    const double D1 = params.D1, D2 = params.D2;
    auto with_betas = [&](double b3, double b2) {
        ModelParams p = params;
        p.beta2 = b2;
        p.beta3 = b3;
        return p;
    };

    PatterningSpace out;
    out.necessary_b = scan_function(
        [&](double b3, double b2) {
            const double s = b2 + b3;
            return D2 * (b3 - b2) - D1 * s * s * s;
        },
        b3s, b2s, "necessary_b");
    out.discriminant = scan_function(
        [&](double b3, double b2) {
            const ModelParams p = with_betas(b3, b2);
            const SteadyState ss = steady_state(p);
            const double b = D2 * ss.fw1 + D1 * ss.gw2;
            const double s = b2 + b3;
            const double c = p.beta1 * p.beta1 * s * s;
            return 36.0 * b * b * c * c - 128.0 * D1 * D2 * c * c * c;
        },
        b3s, b2s, "discriminant");
    out.homogeneous = scan_function(
        [&](double b3, double b2) {
            const double s = b2 + b3;
            return s * s * s - (b3 - b2);
        },
        b3s, b2s, "homogeneous");
    return out;
}

/// Critical value p_c of the swept parameter at which min over k of f(k, p)
/// crosses zero: outer bisection on p, inner golden-section minimisation
/// over k^2 seeded by a 64-point coarse scan. Generic seam used by
/// critical_parameter.
inline double critical_parameter_fn(const std::function<double(double, double)>& f,
                                    double k_lo, double k_hi, double p_lo, double p_hi) {
    if (!(k_hi > k_lo) || !(p_hi > p_lo))
        throw Error("critical_parameter: degenerate search rectangle");

    const double s_lo = k_lo * k_lo, s_hi = k_hi * k_hi;
    const bool log_axis = s_lo > 0;
    auto coarse_point = [&](int i, int n) {
        const double t = static_cast<double>(i) / (n - 1);
        return log_axis ? s_lo * std::pow(s_hi / s_lo, t) : s_lo + (s_hi - s_lo) * t;
    };

    // A narrow dip can sit above the coarse minimum at grid resolution, so
    // every local minimum of the coarse scan is refined, not just the
    // global one.
    auto min_over_k = [&](double p) {
        constexpr int n = 64;
        std::array<double, n> v;
        for (int i = 0; i < n; ++i) v[i] = f(std::sqrt(coarse_point(i, n)), p);
        double best_v = *std::min_element(v.begin(), v.end());
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int i = 0; i < n; ++i) {
            const bool local_min = (i == 0 || v[i] <= v[i - 1]) &&
                                   (i == n - 1 || v[i] <= v[i + 1]);
            if (!local_min) continue;
            double a = coarse_point(std::max(i - 1, 0), n);
            double b = coarse_point(std::min(i + 1, n - 1), n);
            if (!(b > a)) continue;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = f(std::sqrt(x1), p), f2 = f(std::sqrt(x2), p);
            for (int it = 0;
                 it < 80 && (b - a) > 1e-12 * (std::abs(a) + std::abs(b) + 1e-30); ++it) {
                if (f1 < f2) {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = f(std::sqrt(x1), p);
                } else {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = f(std::sqrt(x2), p);
                }
            }
            best_v = std::min({best_v, f1, f2});
        }
        return best_v;
    };

    double a = p_lo, b = p_hi;
    double fa = min_over_k(a), fb = min_over_k(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0))
        throw NoSignChange("critical_parameter: expression has one sign over the whole rectangle");
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if ((b - a) <= 1e-8 * std::max({std::abs(a), std::abs(b), 1e-30})) break;
        const double fm = min_over_k(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) { a = m; fa = fm; }
        else { b = m; fb = fm; }
    }
    return 0.5 * (a + b);
}

/// Critical swept-parameter value at which the named Routh-Hurwitz
/// expression, minimised over the grid's k range, changes sign.
inline double critical_parameter(const ModelParams& params, const ScanGrid& grid,
                                 const std::string& expression) {
    grid.validate();
    return critical_parameter_fn(detail::rh_evaluator(params, grid, expression),
                                 grid.k_values.front(), grid.k_values.back(),
                                 grid.param_values.front(), grid.param_values.back());
}

/// max Re phi over the roots of P2 at each wavenumber. The transverse
/// factor P1 contributes purely oscillatory modes (Re phi = 0) for rho > 0;
/// these are not folded into the curve.
inline std::vector<double> dispersion_curve(const ModelParams& params,
                                            const std::vector<double>& k_values,
                                            Regime regime = Regime::General) {
    const SteadyState ss = steady_state(params);
    std::vector<double> out(k_values.size());
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        const DispersionPoly poly =
            assemble_quintic(params, ss, k_values[i] * k_values[i], regime);
        out[i] = max_growth_rate(poly.descending());
    }
    return out;
}

/// In the beta2 = 0 regime the system can enter an instability region for
/// beta3 in (0, sqrt(min(1, D2/D1))) only.
inline std::pair<double, double> instability_interval_beta3(const ModelParams& params) {
    if (params.beta2 != 0.0)
        throw RegimeMismatch("instability_interval_beta3: requires beta2 = 0");
    if (!(params.D1 > 0) || !(params.D2 > 0))
        throw Error("instability_interval_beta3: diffusivities must be positive");
    return {0.0, std::sqrt(std::min(1.0, params.D2 / params.D1))};
}

/// Homogeneous (k = 0) classification. For rho > 0 the dispersion
/// polynomial reduces to phi^3 times a real quadratic whose Routh-Hurwitz
/// conditions decide stability; in the quasi-static limit the reduced
/// polynomial vanishes identically at k = 0 and the state is reported
/// stable regardless of parameters.
struct HomogReport {
    int degree = 0;             ///< 2 for rho > 0, 0 for rho = 0
    std::vector<double> coeffs; ///< descending, empty when degree = 0
    RhReport rh;
    bool stable = false;
    double max_re = 0.0;
};

inline HomogReport homog_verdict(const ModelParams& params) {
    HomogReport h;
    if (params.rho > 0.0) {
        const SteadyState ss = steady_state(params);
        const double rc = params.rho * params.c0;
        const double det = ss.fw1 * ss.gw2 - ss.fw2 * ss.gw1;
        h.degree = 2;
        h.coeffs = {rc, -rc * (ss.fw1 + ss.gw2), rc * det};
        h.rh = routh_hurwitz(h.coeffs, 2);
        h.stable = h.rh.all_satisfied;
        h.max_re = max_growth_rate(h.coeffs);
    } else {
        h.degree = 0;
        h.stable = true;
        h.max_re = 0.0;
    }
    return h;
}

} // namespace porostab

#endif
