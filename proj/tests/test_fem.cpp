#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <sstream>

#include "manufactured.hpp"
#include "porostab/fem/forms.hpp"
#include "porostab/fem/mesh.hpp"
#include "porostab/fem/solver.hpp"
#include "porostab/fem/spaces.hpp"

using namespace porostab;

namespace {

Mesh single_triangle() {
    Mesh m;
    m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    m.triangles = {{0, 1, 2}};
    detail::tag_boundary(m, [](double, double) { return BoundaryTag::Gamma; });
    return m;
}

} // namespace

TEST_CASE("dof counts") {
    SECTION("single reference triangle") {
        const DofMap dm = build_spaces(single_triangle());
        REQUIRE(dm.n1() == 8);
        REQUIRE(dm.n2() == 1);
        REQUIRE(dm.n3() == 3);
        REQUIRE(dm.n4() == 3);
    }
    SECTION("two-triangle unit square shares vertex pressures") {
        const Mesh m = make_rectangle_mesh(0.0, 0.0, 1.0, 1.0, 1, 1);
        const DofMap dm = build_spaces(m);
        REQUIRE(dm.nt == 2);
        REQUIRE(dm.n3() == 4);
        REQUIRE(dm.n1() == 8 + 4);
    }
}

TEST_CASE("mesh generators and validation") {
    SECTION("disk counts: 6 n^2 triangles, 1 + 3n(n+1) vertices") {
        for (int n : {1, 2, 5}) {
            const Mesh m = make_disk_mesh(0.0, 0.0, 1.0, n);
            REQUIRE(static_cast<int>(m.triangles.size()) == 6 * n * n);
            REQUIRE(static_cast<int>(m.vertices.size()) == 1 + 3 * n * (n + 1));
        }
    }
    SECTION("large disk builds quickly") {
        const auto t0 = std::chrono::steady_clock::now();
        const Mesh m = make_disk_mesh(0.5, 0.5, 0.5, 104); // 64896 triangles
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        REQUIRE(m.triangles.size() == 64896);
        REQUIRE(sec < 5.0);
        const DofMap dm = build_spaces(m);
        REQUIRE(dm.n3() == 1 + 3 * 104 * 105);
    }
    SECTION("disk covers the expected area") {
        const Mesh m = make_disk_mesh(0.0, 0.0, 1.0, 24);
        double area = 0.0;
        for (std::size_t t = 0; t < m.triangles.size(); ++t)
            area += m.triangle_area(static_cast<int>(t));
        REQUIRE(area == Catch::Approx(M_PI).epsilon(0.01));
    }
    SECTION("flipped orientation is rejected") {
        Mesh m = single_triangle();
        std::swap(m.triangles[0][1], m.triangles[0][2]);
        REQUIRE_THROWS_AS(m.validate(), InvalidMesh);
    }
    SECTION("untagged boundary edge is rejected") {
        Mesh m = single_triangle();
        m.boundary_edges.pop_back();
        REQUIRE_THROWS_AS(m.validate(), InvalidMesh);
    }
    SECTION("degenerate element is rejected") {
        Mesh m;
        m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
        m.triangles = {{0, 1, 2}};
        REQUIRE_THROWS_AS(m.validate(), InvalidMesh);
    }
}

TEST_CASE("mesh text format round trip") {
    const Mesh m = make_rectangle_mesh(0.0, 0.0, 1.0, 0.6, 4, 3, [](double, double y) {
        return y > 0.6 - 1e-12 ? BoundaryTag::Sigma : BoundaryTag::Gamma;
    });
    std::stringstream ss;
    write_mesh(m, ss);
    const Mesh r = read_mesh(ss);
    REQUIRE(r.vertices.size() == m.vertices.size());
    REQUIRE(r.triangles == m.triangles);
    REQUIRE(r.boundary_edges.size() == m.boundary_edges.size());
    int sigma = 0;
    for (const auto& e : r.boundary_edges)
        if (e.tag == BoundaryTag::Sigma) ++sigma;
    REQUIRE(sigma == 4);
    SECTION("missing edges section tags everything Gamma") {
        std::stringstream in;
        in << "vertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\n";
        const Mesh g = read_mesh(in);
        REQUIRE(g.boundary_edges.size() == 3);
        for (const auto& e : g.boundary_edges) REQUIRE(e.tag == BoundaryTag::Gamma);
    }
    SECTION("bad header rejected") {
        std::stringstream in;
        in << "points 3\n";
        REQUIRE_THROWS_AS(read_mesh(in), IoError);
    }
}

TEST_CASE("assembled forms on a single triangle") {
    const Mesh m = single_triangle();
    const DofMap dm = build_spaces(m);
    ModelParams p;
    const double dt = 0.01;
    const FemState s = FemState::zero(dm);
    const Forms f = assemble_forms(m, dm, p, dt, s, s);
    const double area = 0.5;

    SECTION("P1 mass matrix: diagonal |T|/6, off-diagonal |T|/12") {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                REQUIRE(f.A4t.coeff(i, j) ==
                        Catch::Approx(i == j ? area / 6.0 : area / 12.0).epsilon(1e-12));
    }
    SECTION("P0 mass is |T| / lambda") {
        REQUIRE(f.A3.coeff(0, 0) == Catch::Approx(area / p.lambda()).epsilon(1e-12));
    }
    SECTION("pressure-psi coupling entries are (alpha/lambda)|T|/3") {
        for (int j = 0; j < 3; ++j)
            REQUIRE(f.B2.coeff(0, j) ==
                    Catch::Approx(p.alpha / p.lambda() * area / 3.0).epsilon(1e-12));
    }
    SECTION("with tau = 0 and b = 0 the load F vanishes") {
        ModelParams q = p;
        q.tau = 0.0;
        const Forms g = assemble_forms(m, dm, q, dt, s, s);
        REQUIRE(g.F.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("b1 annihilates rigid translations") {
    const Mesh m = make_disk_mesh(0.0, 0.0, 1.0, 4);
    const DofMap dm = build_spaces(m);
    ModelParams p;
    const FemState s = FemState::zero(dm);
    const Forms f = assemble_forms(m, dm, p, 0.01, s, s);
    Eigen::VectorXd trans = Eigen::VectorXd::Zero(dm.n1());
    for (int v = 0; v < dm.nv; ++v) trans[dm.u_vertex(v, 0)] = 1.0; // unit x translation
    REQUIRE((f.B1 * trans).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant body force integrates to rho b |Omega|") {
    const Mesh m = make_rectangle_mesh(0.0, 0.0, 2.0, 1.0, 6, 3);
    const DofMap dm = build_spaces(m);
    ModelParams p;
    p.tau = 0.0;
    const double dt = 0.1;
    const FemState s = FemState::zero(dm);
    const auto body = [](double, double, double) -> std::array<double, 2> {
        return {0.0, -3.0};
    };
    const Forms f = assemble_forms(m, dm, p, dt, s, s, {}, body);
    double fy = 0.0;
    for (int v = 0; v < dm.nv; ++v) fy += f.F[dm.u_vertex(v, 1)];
    REQUIRE(fy == Catch::Approx(dt * dt * p.rho * (-3.0) * 2.0).epsilon(1e-10));
}

TEST_CASE("equilibrium start is a fixed point of the scheme") {
    Scenario sc = scenario_test2(6, 0.01, 1.0);
    sc.params.tau = 0.0;
    sc.params.gamma = 0.0;
    // beta2 > beta3 keeps the uncoupled kinetics diffusion-stable, so
    // roundoff is not amplified over the run
    sc.params.beta2 = 0.5;
    sc.params.beta3 = 0.4;
    sc.perturb_amplitude = 0.0;
    FemSolver solver(sc);
    const RunResult rr = solver.run(); // 100 steps
    const SteadyState ss = steady_state(sc.params);
    REQUIRE((rr.final_state.w1.array() - ss.w10).abs().maxCoeff() < 1e-10 * ss.w10);
    REQUIRE((rr.final_state.w2.array() - ss.w20).abs().maxCoeff() < 1e-10 * ss.w20);
    REQUIRE(rr.final_state.u.cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(rr.final_state.p.cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(rr.final_state.psi.cwiseAbs().maxCoeff() < 1e-10);
    for (const auto& smp : rr.series) {
        REQUIRE(smp.w2_std < 1e-12);
        REQUIRE(smp.newton_iterations <= 1);
    }
}

TEST_CASE("linear regime converges in one newton iteration") {
    Scenario sc = scenario_test1(10, 6, 0.05, 0.0);
    sc.params.beta1 = 0.0;
    sc.params.gamma = 0.0;
    sc.params.tau = 0.0;
    sc.perturb_amplitude = 0.0;
    sc.w1_init = [](double, double) { return 0.0; };
    sc.w2_init = [](double, double) { return 0.0; };
    FemSolver solver(sc);
    FemState s = solver.initial_state();
    FemState prev = s;
    for (int step = 0; step < 6; ++step) {
        StepReport rep;
        FemState next = solver.advance(s, prev, &rep);
        REQUIRE(rep.iterations <= 1);
        prev = std::move(s);
        s = std::move(next);
    }
    REQUIRE(s.u.cwiseAbs().maxCoeff() > 0.0); // the traction actually did something
}

TEST_CASE("chemical mass is conserved without reactions or coupling") {
    Scenario sc = scenario_test2(8, 0.01, 0.2);
    sc.params.beta1 = 0.0;
    sc.params.gamma = 0.0;
    sc.params.tau = 0.0;
    sc.perturb_amplitude = 1e-3;
    sc.w1_init = {};
    FemSolver solver(sc);
    const RunResult rr = solver.run();
    const double m10 = rr.series.front().mass_w1, m20 = rr.series.front().mass_w2;
    for (const auto& smp : rr.series) {
        REQUIRE(std::abs(smp.mass_w1 - m10) < 1e-10 * std::abs(m10));
        REQUIRE(std::abs(smp.mass_w2 - m20) < 1e-10 * std::abs(m20));
    }
    // and the perturbation really decays by diffusion
    REQUIRE(rr.series.back().w2_std < rr.series.front().w2_std);
}

TEST_CASE("periodic traction compresses the loaded strip") {
    // dt must stay below the kinetics stiffness limit ~1/(beta1 |2 w1 w2 - 1|)
    Scenario sc = scenario_test1(20, 12, 0.0025, 0.5);
    FemSolver solver(sc);
    const DofMap& dm = solver.dofmap();
    FemState s = solver.initial_state();
    FemState prev = s;
    for (int step = 0; step < 100; ++step) { // to t = 0.25, rising load
        FemState next = solver.advance(s, prev);
        prev = std::move(s);
        s = std::move(next);
    }
    // vertical displacement under the load is negative
    double uy_mid = 0.0;
    for (int v = 0; v < dm.nv; ++v) {
        const auto& x = solver.mesh().vertices[v];
        if (std::abs(x[0] - 0.5) < 1e-9 && std::abs(x[1] - 0.6) < 1e-9)
            uy_mid = s.u[dm.u_vertex(v, 1)];
    }
    REQUIRE(uy_mid < 0.0);
}

TEST_CASE("newton residual tail is at least quadratic") {
    Scenario sc = scenario_test2(6, 0.005, 0.0);
    sc.params.gamma = 0.5; // strengthen the nonlinear coupling
    sc.perturb_amplitude = 0.2;
    FemSolver solver(sc);
    solver.newton_tol = 1e-30; // force iterations until increment stagnation
    solver.max_newton = 20;
    FemState s = solver.initial_state();
    double best_slope = 0.0;
    FemState prev = s;
    for (int step = 0; step < 3; ++step) {
        StepReport rep;
        FemState next = solver.advance(s, prev, &rep);
        const auto& r = rep.residuals;
        for (std::size_t k = 2; k < r.size(); ++k) {
            if (r[k] < 1e-13 * r[0] || r[k - 1] >= r[k - 2] || r[k] >= r[k - 1]) continue;
            const double slope =
                std::log(r[k] / r[k - 1]) / std::log(r[k - 1] / r[k - 2]);
            best_slope = std::max(best_slope, slope);
        }
        prev = std::move(s);
        s = std::move(next);
    }
    REQUIRE(best_slope >= 1.8);
}

TEST_CASE("robin-supported disk runs and stays bounded") {
    Scenario sc = scenario_test3(1e3, 10.0, 6, 0.01, 0.05);
    FemSolver solver(sc);
    const RunResult rr = solver.run();
    REQUIRE(rr.final_state.time == Catch::Approx(0.05));
    REQUIRE(std::isfinite(rr.final_state.u.cwiseAbs().maxCoeff()));
    REQUIRE(rr.final_state.w1.minCoeff() > 0.0);
}

TEST_CASE("calcium kinetics variant advances") {
    Scenario sc = scenario_test2(5, 0.002, 0.01);
    sc.kinetics = Scenario::Kinetics::Calcium;
    sc.params.tau = 1e3;
    FemSolver solver(sc);
    const RunResult rr = solver.run();
    REQUIRE(rr.final_state.w2.minCoeff() > 0.0);
    REQUIRE(rr.final_state.w1.maxCoeff() < 2.0);
}

TEST_CASE("manufactured solution: no locking near incompressibility") {
    // the exact total pressure scales with lambda here, so absolute errors
    // grow with nu by construction; locking would instead show up as a
    // pre-asymptotic plateau, i.e. a degraded rate between n = 8 and 16
    const auto coarse = manufactured::run(8, 0.499);
    const auto fine = manufactured::run(16, 0.499);
    REQUIRE(coarse.u / fine.u > 3.5);
    REQUIRE(coarse.p / fine.p > 3.5);
}

TEST_CASE("manufactured solution: one refinement halves the error twice over") {
    const auto coarse = manufactured::run(8, 0.3);
    const auto fine = manufactured::run(16, 0.3);
    REQUIRE(coarse.u / fine.u > 3.0);  // ~4 for order 2
    REQUIRE(coarse.p / fine.p > 3.0);
    REQUIRE(coarse.psi / fine.psi > 1.7); // ~2 for order 1
}
