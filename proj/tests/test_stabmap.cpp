#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <random>

#include "porostab/polyroots.hpp"
#include "porostab/stabmap.hpp"

using namespace porostab;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return v;
}

} // namespace

TEST_CASE("grid validation") {
    ScanGrid g;
    g.param_values = {0.1, 0.2, 0.3};
    g.k_values = {1.0, 2.0};
    REQUIRE_NOTHROW(g.validate());
    SECTION("unknown parameter name") {
        g.param_name = "zeta";
        REQUIRE_THROWS_AS(g.validate(), Error);
    }
    SECTION("non-monotone axis") {
        g.k_values = {2.0, 1.0};
        REQUIRE_THROWS_AS(g.validate(), Error);
    }
    SECTION("too few points") {
        g.param_values = {0.1};
        REQUIRE_THROWS_AS(g.validate(), Error);
    }
}

TEST_CASE("synthetic seam: contour of p - 0.5 is the line p = 0.5") {
    auto f = [](double /*k*/, double p) { return p - 0.5; };
    const LevelSetField field =
        scan_function(f, linspace(0.1, 2.0, 21), linspace(0.0, 1.0, 41), "seam");
    REQUIRE(field.values.rows() == 21);
    REQUIRE(field.values.cols() == 41);
    REQUIRE(!field.contour_polylines.empty());
    std::size_t npts = 0;
    for (const auto& line : field.contour_polylines)
        for (const auto& pt : line) {
            REQUIRE(pt[0] == Catch::Approx(0.5).margin(1e-12)); // param coordinate
            ++npts;
        }
    REQUIRE(npts >= 21);
}

TEST_CASE("contour accuracy on a smooth level set") {
    // zero set of p - (1 + 0.25 sin k): recover within local grid resolution
    auto f = [](double k, double p) { return p - (1.0 + 0.25 * std::sin(k)); };
    const LevelSetField field =
        scan_function(f, linspace(0.0, 6.0, 121), linspace(0.5, 1.5, 121), "sin");
    REQUIRE(!field.contour_polylines.empty());
    for (const auto& line : field.contour_polylines)
        for (const auto& pt : line)
            REQUIRE(std::abs(pt[0] - (1.0 + 0.25 * std::sin(pt[1]))) < 1e-3);
}

TEST_CASE("contour is invariant under resolution doubling") {
    auto f = [](double k, double p) { return p * p + k * k - 1.0; }; // quarter circle
    auto total_len = [&](int n) {
        const LevelSetField field =
            scan_function(f, linspace(0.0, 1.2, n), linspace(0.0, 1.2, n), "circ");
        double len = 0.0;
        for (const auto& line : field.contour_polylines)
            for (std::size_t i = 1; i < line.size(); ++i)
                len += std::hypot(line[i][0] - line[i - 1][0], line[i][1] - line[i - 1][1]);
        return len;
    };
    const double quarter = M_PI / 2.0;
    REQUIRE(total_len(81) == Catch::Approx(quarter).epsilon(0.01));
    REQUIRE(total_len(161) == Catch::Approx(quarter).epsilon(0.005));
}

TEST_CASE("scan of a named routh-hurwitz expression") {
    ModelParams p;
    ScanGrid g;
    g.param_name = "beta2";
    g.param_values = linspace(0.05, 0.5, 24);
    g.k_values = logspace(0.1, 100.0, 32);
    const LevelSetField field = scan(p, g, "a0");
    REQUIRE(field.label == "a0");
    // spot check against a direct evaluation
    const double kk = g.k_values[7], pp = g.param_values[11];
    ModelParams q = p;
    q.beta2 = pp;
    const DispersionPoly poly = assemble_quintic(q, steady_state(q), kk * kk, Regime::General);
    const RhReport rep = routh_hurwitz(poly.descending(), poly.degree);
    double direct = 0.0;
    for (const auto& [label, value] : rep.condition_values)
        if (label == "a0") direct = value;
    REQUIRE(field.values(7, 11) == Catch::Approx(direct).epsilon(1e-12));

    SECTION("unknown expression throws") {
        REQUIRE_THROWS_AS(scan(p, g, "a9"), Error);
    }
}

TEST_CASE("scan respects POROSTAB_THREADS") {
    setenv("POROSTAB_THREADS", "1", 1);
    auto f = [](double k, double p) { return k - p; };
    const LevelSetField one =
        scan_function(f, linspace(0.0, 1.0, 17), linspace(0.0, 1.0, 19), "t");
    setenv("POROSTAB_THREADS", "4", 1);
    const LevelSetField four =
        scan_function(f, linspace(0.0, 1.0, 17), linspace(0.0, 1.0, 19), "t");
    unsetenv("POROSTAB_THREADS");
    REQUIRE((one.values - four.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling switched off recovers the uncoupled scan") {
    ModelParams weak;
    weak.gamma = 1e-12;
    weak.tau = 1e-12;
    ModelParams off;
    off.gamma = 0.0;
    off.tau = 0.0;
    ScanGrid g;
    g.param_name = "beta2";
    g.param_values = linspace(0.05, 0.4, 12);
    g.k_values = logspace(0.5, 50.0, 16);
    const LevelSetField a = scan(weak, g, "a0");
    ScanGrid gu = g;
    gu.regime = Regime::Uncoupled;
    const LevelSetField b = scan(off, gu, "a0");
    const double scale = b.values.cwiseAbs().maxCoeff();
    REQUIRE((a.values - b.values).cwiseAbs().maxCoeff() < 1e-8 * scale);
}

TEST_CASE("critical parameter on a synthetic function") {
    // min over k of (k - 3)^2 + (pc - p) crosses zero exactly at p = pc
    const double pc = 0.62;
    auto f = [pc](double k, double p) { return (k - 3.0) * (k - 3.0) + (pc - p); };
    const double found = critical_parameter_fn(f, 0.5, 10.0, 0.0, 1.0);
    REQUIRE(found == Catch::Approx(pc).margin(1e-6));
}

TEST_CASE("critical parameter requires a sign change") {
    auto f = [](double, double) { return 1.0; };
    REQUIRE_THROWS_AS(critical_parameter_fn(f, 0.5, 10.0, 0.0, 1.0), NoSignChange);
}

TEST_CASE("critical beta2 for the uncoupled reaction-diffusion system") {
    ModelParams p;
    p.gamma = 0.0;
    p.tau = 0.0;
    p.rho = 0.0;
    ScanGrid g;
    g.param_name = "beta2";
    g.param_values = {0.01, 0.6};
    g.k_values = {0.1, 100.0};
    g.regime = Regime::Uncoupled;
    g.rho_mode = RhoMode::QuasiStatic;
    const double b2c = critical_parameter(p, g, "a0");
    REQUIRE(b2c > 0.1305); // defaults are inside the unstable region
    REQUIRE(b2c < 0.6);
    // independent check: closed-form Turing threshold of the kinetics.
    // min_x of D1 D2 x^2 - (D2 fw1 + D1 gw2) x + det changes sign when
    // (D2 fw1 + D1 gw2)^2 = 4 D1 D2 det with D2 fw1 + D1 gw2 > 0.
    ModelParams q = p;
    q.beta2 = b2c;
    const SteadyState ss = steady_state(q);
    const double b = q.D2 * ss.fw1 + q.D1 * ss.gw2;
    const double det = ss.fw1 * ss.gw2 - ss.fw2 * ss.gw1;
    REQUIRE(b > 0.0);
    REQUIRE(b * b == Catch::Approx(4.0 * q.D1 * q.D2 * det).epsilon(1e-4));
}

TEST_CASE("dispersion curve equals the max growth rate of the assembled polynomial") {
    ModelParams p;
    const std::vector<double> ks = logspace(0.1, 50.0, 25);
    const std::vector<double> curve = dispersion_curve(p, ks);
    REQUIRE(curve.size() == ks.size());
    const SteadyState ss = steady_state(p);
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const DispersionPoly poly = assemble_quintic(p, ss, ks[i] * ks[i], Regime::General);
        REQUIRE(curve[i] == Catch::Approx(max_growth_rate(poly.descending())).margin(1e-10));
    }
}

TEST_CASE("beta3 instability interval in the beta2 = 0 regime") {
    ModelParams p;
    p.beta2 = 0.0;
    const auto [lo, hi] = instability_interval_beta3(p);
    REQUIRE(lo == 0.0);
    REQUIRE(hi == Catch::Approx(std::sqrt(std::min(1.0, p.D2 / p.D1))));
    SECTION("requires beta2 = 0") {
        ModelParams q;
        REQUIRE_THROWS_AS(instability_interval_beta3(q), RegimeMismatch);
    }
    SECTION("unit bound when D2 >= D1") {
        REQUIRE(hi == Catch::Approx(1.0));
    }
}

TEST_CASE("homogeneous verdict") {
    ModelParams p;
    SECTION("defaults are homogeneously stable with inertia") {
        const HomogReport h = homog_verdict(p);
        REQUIRE(h.degree == 2);
        REQUIRE(h.stable);
        REQUIRE(h.max_re < 0.0);
        REQUIRE(h.coeffs.size() == 3);
        REQUIRE(h.coeffs[0] == Catch::Approx(p.rho * p.c0));
    }
    SECTION("quasi-static is unconditionally stable") {
        p.rho = 0.0;
        std::mt19937_64 gen(5);
        std::uniform_real_distribution<double> d(0.01, 1.0);
        for (int i = 0; i < 100; ++i) {
            p.beta1 = 300.0 * d(gen);
            p.beta2 = d(gen);
            p.beta3 = d(gen);
            const HomogReport h = homog_verdict(p);
            REQUIRE(h.degree == 0);
            REQUIRE(h.stable);
            REQUIRE(h.max_re == 0.0);
        }
    }
}

TEST_CASE("patterning space fields carry the documented expressions") {
    ModelParams p;
    const PatterningSpace ps = patterning_space(p, {0.05, 0.5}, {0.1, 1.0}, 12, 14);
    REQUIRE(ps.necessary_b.values.rows() == 14);  // beta3 axis
    REQUIRE(ps.necessary_b.values.cols() == 12);  // beta2 axis
    const double b2 = ps.necessary_b.param_values[3];
    const double b3 = ps.necessary_b.k_values[5];
    const double s = b2 + b3;
    REQUIRE(ps.necessary_b.values(5, 3) ==
            Catch::Approx(p.D2 * (b3 - b2) - p.D1 * s * s * s).epsilon(1e-12));
    REQUIRE(ps.homogeneous.values(5, 3) == Catch::Approx(s * s * s - (b3 - b2)).epsilon(1e-12));
    ModelParams q = p;
    q.beta2 = b2;
    q.beta3 = b3;
    const SteadyState ss = steady_state(q);
    const double b = q.D2 * ss.fw1 + q.D1 * ss.gw2;
    const double c = q.beta1 * q.beta1 * s * s;
    REQUIRE(ps.discriminant.values(5, 3) ==
            Catch::Approx(36.0 * b * b * c * c - 128.0 * q.D1 * q.D2 * c * c * c)
                .epsilon(1e-10));
    SECTION("bad ranges rejected") {
        REQUIRE_THROWS_AS(patterning_space(p, {0.5, 0.05}, {0.1, 1.0}, 10, 10), Error);
    }
}
