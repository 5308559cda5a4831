#ifndef POROSTAB_TESTS_MANUFACTURED_HPP
#define POROSTAB_TESTS_MANUFACTURED_HPP

// Manufactured-solution driver for the linear poroelastic subsystem
// (beta1 = gamma = tau = 0, rho = 0). The exact fields are linear in time,
// so backward Euler differentiates them exactly and only the spatial error
// remains:
//   u  = (1+t) (sin pi x sin pi y, sin pi x sin pi y)
//   p  = (1+t) cos pi x cos pi y
//   psi = alpha p - lambda div u

#include <cmath>

#include "porostab/fem/solver.hpp"

namespace manufactured {

struct Errors {
    double u = 0, p = 0, psi = 0;
};

inline Errors run(int n, double nu, double E = 1.0e2, double dt = 0.02, int nsteps = 5) {
    using namespace porostab;

    const double pi = M_PI;
    auto a = [=](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    auto cc = [=](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); };
    auto divU = [=](double x, double y) { return pi * std::sin(pi * (x + y)); };

    Scenario sc;
    sc.mesh = make_rectangle_mesh(0.0, 0.0, 1.0, 1.0, n, n);
    sc.params.beta1 = 0.0;
    sc.params.gamma = 0.0;
    sc.params.tau = 0.0;
    sc.params.rho = 0.0;
    sc.params.E = E;
    sc.params.nu = nu;
    sc.bc_mode = Scenario::BcMode::AllDirichlet;
    sc.perturb_amplitude = 0.0;
    sc.w1_init = [](double, double) { return 0.0; };
    sc.w2_init = [](double, double) { return 0.0; };
    sc.dt = dt;

    const double mu = sc.params.mu(), lam = sc.params.lambda(), alpha = sc.params.alpha;
    const double c0 = sc.params.c0, keta = sc.params.kappa / sc.params.eta;

    sc.dirichlet_u = [=](double x, double y, double t) -> std::array<double, 2> {
        const double v = (1.0 + t) * a(x, y);
        return {v, v};
    };
    sc.dirichlet_p = [=](double x, double y, double t) { return (1.0 + t) * cc(x, y); };
    sc.momentum_source = [=](double x, double y, double t) -> std::array<double, 2> {
        // s = -2 mu div eps(u) + grad psi, psi = alpha p - lambda div u
        const double diveps = -1.5 * pi * pi * a(x, y) + 0.5 * pi * pi * cc(x, y);
        const double ddiv = pi * pi * std::cos(pi * (x + y)); // d(div U)/dx = d/dy
        const double px = -pi * std::sin(pi * x) * std::cos(pi * y);
        const double py = -pi * std::cos(pi * x) * std::sin(pi * y);
        const double sx = (1.0 + t) * (-2.0 * mu * diveps + alpha * px - lam * ddiv);
        const double sy = (1.0 + t) * (-2.0 * mu * diveps + alpha * py - lam * ddiv);
        return {sx, sy};
    };
    sc.fluid_source = [=](double x, double y, double t) {
        return c0 * cc(x, y) + 2.0 * pi * pi * keta * (1.0 + t) * cc(x, y) +
               alpha * divU(x, y);
    };

    FemSolver solver(sc);
    const DofMap& dm = solver.dofmap();
    const Mesh& mesh = solver.mesh();

    FemState s = FemState::zero(dm);
    for (int v = 0; v < dm.nv; ++v) {
        const double x = mesh.vertices[v][0], y = mesh.vertices[v][1];
        s.u[dm.u_vertex(v, 0)] = a(x, y);
        s.u[dm.u_vertex(v, 1)] = a(x, y);
        s.p[v] = cc(x, y);
    }
    for (int t = 0; t < dm.nt; ++t) {
        const auto& tri = mesh.triangles[t];
        double xc = 0, yc = 0;
        for (int i = 0; i < 3; ++i) {
            xc += mesh.vertices[tri[i]][0] / 3.0;
            yc += mesh.vertices[tri[i]][1] / 3.0;
        }
        s.psi[t] = alpha * cc(xc, yc) - lam * divU(xc, yc);
    }

    for (int step = 0; step < nsteps; ++step) s = solver.advance(s, s);
    const double tf = s.time;

    // L2 errors by elementwise quadrature against the exact fields
    const TriQuad& q = tri_quad4();
    Errors err;
    for (int t = 0; t < dm.nt; ++t) {
        const ElemGeom g = elem_geom(mesh, t);
        const auto& tri = mesh.triangles[t];
        for (int iq = 0; iq < TriQuad::n; ++iq) {
            const auto& l = q.bary[iq];
            const double wq = q.w[iq] * g.area;
            const double x = l[0] * g.xy[0][0] + l[1] * g.xy[1][0] + l[2] * g.xy[2][0];
            const double y = l[0] * g.xy[0][1] + l[1] * g.xy[1][1] + l[2] * g.xy[2][1];
            double uhx = 0, uhy = 0, ph = 0;
            for (int i = 0; i < 3; ++i) {
                uhx += l[i] * s.u[dm.u_vertex(tri[i], 0)];
                uhy += l[i] * s.u[dm.u_vertex(tri[i], 1)];
                ph += l[i] * s.p[tri[i]];
            }
            const double bub = bubble_value(l);
            uhx += bub * s.u[dm.u_bubble(t, 0)];
            uhy += bub * s.u[dm.u_bubble(t, 1)];
            const double ue = (1.0 + tf) * a(x, y);
            const double pe = (1.0 + tf) * cc(x, y);
            const double psie = (1.0 + tf) * (alpha * cc(x, y) - lam * divU(x, y));
            err.u += wq * ((uhx - ue) * (uhx - ue) + (uhy - ue) * (uhy - ue));
            err.p += wq * (ph - pe) * (ph - pe);
            err.psi += wq * (s.psi[t] - psie) * (s.psi[t] - psie);
        }
    }
    err.u = std::sqrt(err.u);
    err.p = std::sqrt(err.p);
    err.psi = std::sqrt(err.psi);
    return err;
}

} // namespace manufactured

#endif
