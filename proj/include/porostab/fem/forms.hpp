#ifndef POROSTAB_FEM_FORMS_HPP
#define POROSTAB_FEM_FORMS_HPP

/// @file forms.hpp
/// Quadrature, element geometry and the block matrices/vectors of the
/// fully discrete scheme, carrying the dt and dt^2 scalings of the
/// backward-Euler / centred-difference formulation.

#include <array>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "porostab/common.hpp"
#include "porostab/fem/mesh.hpp"
#include "porostab/fem/spaces.hpp"
#include "porostab/model.hpp"

namespace porostab {

using SpMat = Eigen::SparseMatrix<double>;

/// Degree-4 symmetric 6-point triangle rule; weights sum to 1, so
/// int_T f ~= |T| sum_q w_q f(x_q).
struct TriQuad {
    static constexpr int n = 6;
    std::array<std::array<double, 3>, n> bary;
    std::array<double, n> w;
};

inline const TriQuad& tri_quad4() {
    static const TriQuad q = [] {
        TriQuad r{};
        const double a = 0.445948490915965, wa = 0.223381589678011;
        const double b = 0.091576213509771, wb = 0.109951743655322;
        int idx = 0;
        for (int i = 0; i < 3; ++i) {
            std::array<double, 3> pa = {a, a, a};
            pa[i] = 1.0 - 2.0 * a;
            r.bary[idx] = pa;
            r.w[idx++] = wa;
        }
        for (int i = 0; i < 3; ++i) {
            std::array<double, 3> pb = {b, b, b};
            pb[i] = 1.0 - 2.0 * b;
            r.bary[idx] = pb;
            r.w[idx++] = wb;
        }
        return r;
    }();
    return q;
}

/// 3-point Gauss rule on [0, 1] for boundary-edge integrals.
struct EdgeQuad {
    static constexpr int n = 3;
    std::array<double, n> xi{0.5 - 0.5 * 0.774596669241483, 0.5, 0.5 + 0.5 * 0.774596669241483};
    std::array<double, n> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

/// Per-triangle geometry: constant P1 gradients and area.
struct ElemGeom {
    std::array<std::array<double, 2>, 3> grad; ///< grad of barycentric N_i
    std::array<std::array<double, 2>, 3> xy;   ///< vertex coordinates
    double area = 0.0;
};

inline ElemGeom elem_geom(const Mesh& mesh, int t) {
    ElemGeom g;
    for (int i = 0; i < 3; ++i) g.xy[i] = mesh.vertices[mesh.triangles[t][i]];
    const double x1 = g.xy[0][0], y1 = g.xy[0][1];
    const double x2 = g.xy[1][0], y2 = g.xy[1][1];
    const double x3 = g.xy[2][0], y3 = g.xy[2][1];
    const double det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
    if (!(det > 0)) throw InvalidMesh("elem_geom: degenerate or misoriented triangle");
    g.area = 0.5 * det;
    g.grad[0] = {(y2 - y3) / det, (x3 - x2) / det};
    g.grad[1] = {(y3 - y1) / det, (x1 - x3) / det};
    g.grad[2] = {(y1 - y2) / det, (x2 - x1) / det};
    return g;
}

/// Cubic bubble 27 l1 l2 l3 and its gradient at a barycentric point.
inline double bubble_value(const std::array<double, 3>& l) { return 27.0 * l[0] * l[1] * l[2]; }

inline std::array<double, 2> bubble_grad(const ElemGeom& g, const std::array<double, 3>& l) {
    std::array<double, 2> gr{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const double c = 27.0 * l[(i + 1) % 3] * l[(i + 2) % 3];
        gr[0] += c * g.grad[i][0];
        gr[1] += c * g.grad[i][1];
    }
    return gr;
}

/// Active stress intensity r(w1, w2, t) and the spatial direction field k.
struct ActiveStress {
    enum class Kind { Linear, Quadratic, Growth } kind = Kind::Linear;
    double tau2 = 0.0; ///< linear-growth rate for Kind::Growth (r = tau2 t + w1^2)
    std::function<std::array<double, 2>(double, double)> k_field; ///< defaults to params.k_dir

    double r(double w1, double w2, double t) const {
        switch (kind) {
        case Kind::Linear: return w1 + w2;
        case Kind::Quadratic: return w1 * w1;
        case Kind::Growth: return tau2 * t + w1 * w1;
        }
        return 0.0;
    }
    double dr_dw1(double w1) const { return kind == Kind::Linear ? 1.0 : 2.0 * w1; }
    double dr_dw2() const { return kind == Kind::Linear ? 1.0 : 0.0; }

    std::array<double, 2> k_at(const ModelParams& p, double x, double y) const {
        return k_field ? k_field(x, y) : std::array<double, 2>{p.k_dir[0], p.k_dir[1]};
    }
};

using SpaceTimeScalar = std::function<double(double, double, double)>;
using SpaceTimeVector = std::function<std::array<double, 2>(double, double, double)>;

/// Block matrices and vectors of the scaled system A X^{n+1} = H^n:
///   A1t = rho (phi_j, phi_i)              A1 = dt^2 2 mu (eps, eps)
///   B1  = -(psi_i, div phi_j)             B2 = (alpha/lambda)(p_j, psi_i)
///   A2t = (c0 + alpha^2/lambda) mass      A2 = dt (kappa/eta) stiffness
///   A3  = (1/lambda) P0 mass              A4t = A5t = P1 mass
///   A4  = dt D1 stiffness                 A5 = dt D2 stiffness
///   F_i = dt^2 [rho (b, phi_i) + tau (r k(x)k(x), eps(phi_i))]
///   G_i = dt (ell, p_i);   J1/J2 = dt (f/g at the given state, w_i)
struct Forms {
    SpMat A1t, A1, B1, B2, A2t, A2, A3, A4t, A4, A5t, A5;
    Eigen::VectorXd F, G, J1, J2;
};

inline Forms assemble_forms(const Mesh& mesh, const DofMap& dm, const ModelParams& params,
                            double dt, const FemState& state, const FemState& prev,
                            const ActiveStress& act = {},
                            const SpaceTimeVector& body = {},
                            const SpaceTimeScalar& ell = {}) {
    if (!(dt > 0)) throw Error("assemble_forms: dt must be positive");
    const double mu = params.mu(), lam = params.lambda();
    const TriQuad& q = tri_quad4();

    using T = Eigen::Triplet<double>;
    std::vector<T> t_A1t, t_A1, t_B1, t_B2, t_A2t, t_A2, t_A3, t_Mw, t_A4, t_A5;
    Forms out;
    out.F = Eigen::VectorXd::Zero(dm.n1());
    out.G = Eigen::VectorXd::Zero(dm.n3());
    out.J1 = Eigen::VectorXd::Zero(dm.n4());
    out.J2 = Eigen::VectorXd::Zero(dm.n4());

    const double t_new = state.time;
    for (int t = 0; t < dm.nt; ++t) {
        const ElemGeom g = elem_geom(mesh, t);
        const auto& tri = mesh.triangles[t];

        // displacement dofs: 3 vertices x 2 comps then bubble x 2
        std::array<int, 8> udof{};
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 2; ++c) udof[2 * i + c] = dm.u_vertex(tri[i], c);
        udof[6] = dm.u_bubble(t, 0);
        udof[7] = dm.u_bubble(t, 1);

        // divergence of each u shape integrated against the P0 indicator:
        // the bubble contributes zero (it vanishes on the element boundary)
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 2; ++c)
                t_B1.emplace_back(dm.psi(t), udof[2 * i + c], -g.area * g.grad[i][c]);
        for (int i = 0; i < 3; ++i)
            t_B2.emplace_back(dm.psi(t), dm.p(tri[i]), params.alpha / lam * g.area / 3.0);
        t_A3.emplace_back(dm.psi(t), dm.psi(t), g.area / lam);

        // P1 scalar mass and stiffness
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double m = g.area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0);
                const double k = g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
                t_A2t.emplace_back(dm.p(tri[i]), dm.p(tri[j]), (params.c0 + params.alpha * params.alpha / lam) * m);
                t_A2.emplace_back(dm.p(tri[i]), dm.p(tri[j]), dt * params.kappa / params.eta * k);
                t_Mw.emplace_back(dm.w(tri[i]), dm.w(tri[j]), m);
                t_A4.emplace_back(dm.w(tri[i]), dm.w(tri[j]), dt * params.D1 * k);
                t_A5.emplace_back(dm.w(tri[i]), dm.w(tri[j]), dt * params.D2 * k);
            }

        // quadrature loop: vector mass, elastic stiffness, load vectors
        Eigen::Matrix<double, 8, 8> Mu = Eigen::Matrix<double, 8, 8>::Zero();
        Eigen::Matrix<double, 8, 8> Ku = Eigen::Matrix<double, 8, 8>::Zero();
        const double div_dt_fac = 1.0 / dt;
        for (int iq = 0; iq < TriQuad::n; ++iq) {
            const auto& l = q.bary[iq];
            const double wq = q.w[iq] * g.area;
            const double x = l[0] * g.xy[0][0] + l[1] * g.xy[1][0] + l[2] * g.xy[2][0];
            const double y = l[0] * g.xy[0][1] + l[1] * g.xy[1][1] + l[2] * g.xy[2][1];

            // shape values and gradients of the 4 scalar u shapes
            std::array<double, 4> N{l[0], l[1], l[2], bubble_value(l)};
            std::array<std::array<double, 2>, 4> dN{g.grad[0], g.grad[1], g.grad[2],
                                                    bubble_grad(g, l)};

            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    const double m = wq * N[a] * N[b];
                    // same-component elastic coupling and cross terms of
                    // 2 mu eps(u):eps(v)
                    const double gxx = dN[a][0] * dN[b][0], gyy = dN[a][1] * dN[b][1];
                    Mu(2 * a, 2 * b) += m;
                    Mu(2 * a + 1, 2 * b + 1) += m;
                    Ku(2 * a, 2 * b) += wq * (2.0 * mu * gxx + mu * gyy);
                    Ku(2 * a + 1, 2 * b + 1) += wq * (2.0 * mu * gyy + mu * gxx);
                    Ku(2 * a, 2 * b + 1) += wq * mu * dN[a][1] * dN[b][0];
                    Ku(2 * a + 1, 2 * b) += wq * mu * dN[a][0] * dN[b][1];
                }

            // interpolated fields at the quadrature point
            double w1 = 0, w2 = 0, div_u = 0, div_u_prev = 0;
            for (int i = 0; i < 3; ++i) {
                w1 += l[i] * state.w1[tri[i]];
                w2 += l[i] * state.w2[tri[i]];
            }
            for (int a = 0; a < 4; ++a)
                for (int c = 0; c < 2; ++c) {
                    div_u += dN[a][c] * state.u[udof[2 * a + c]];
                    div_u_prev += dN[a][c] * prev.u[udof[2 * a + c]];
                }
            const double div_u_dot = (div_u - div_u_prev) * div_dt_fac;

            // F: body force and active stress
            const std::array<double, 2> kv = act.k_at(params, x, y);
            const double rv = act.r(w1, w2, t_new);
            if (body) {
                const auto bv = body(x, y, t_new);
                for (int a = 0; a < 4; ++a)
                    for (int c = 0; c < 2; ++c)
                        out.F[udof[2 * a + c]] += dt * dt * params.rho * wq * bv[c] * N[a];
            }
            if (params.tau != 0.0) {
                // tau r (k x k) : eps(v) with eps(v) for v = N e_c
                for (int a = 0; a < 4; ++a) {
                    out.F[udof[2 * a]] += dt * dt * params.tau * rv * wq *
                                          (kv[0] * kv[0] * dN[a][0] + kv[0] * kv[1] * dN[a][1]);
                    out.F[udof[2 * a + 1]] += dt * dt * params.tau * rv * wq *
                                              (kv[1] * kv[1] * dN[a][1] + kv[0] * kv[1] * dN[a][0]);
                }
            }
            if (ell) {
                const double lv = ell(x, y, t_new);
                for (int i = 0; i < 3; ++i) out.G[dm.p(tri[i])] += dt * wq * lv * l[i];
            }
            const auto [fv, gv] = schnackenberg_rhs(params, w1, w2, div_u_dot);
            for (int i = 0; i < 3; ++i) {
                out.J1[dm.w(tri[i])] += dt * wq * fv * l[i];
                out.J2[dm.w(tri[i])] += dt * wq * gv * l[i];
            }
        }

        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
                if (Mu(a, b) != 0.0) t_A1t.emplace_back(udof[a], udof[b], params.rho * Mu(a, b));
                if (Ku(a, b) != 0.0) t_A1.emplace_back(udof[a], udof[b], dt * dt * Ku(a, b));
            }
    }

    auto build = [](SpMat& m, int rows, int cols, std::vector<T>& trip) {
        m.resize(rows, cols);
        m.setFromTriplets(trip.begin(), trip.end());
    };
    build(out.A1t, dm.n1(), dm.n1(), t_A1t);
    build(out.A1, dm.n1(), dm.n1(), t_A1);
    build(out.B1, dm.n2(), dm.n1(), t_B1);
    build(out.B2, dm.n2(), dm.n3(), t_B2);
    build(out.A2t, dm.n3(), dm.n3(), t_A2t);
    build(out.A2, dm.n3(), dm.n3(), t_A2);
    build(out.A3, dm.n2(), dm.n2(), t_A3);
    build(out.A4t, dm.n4(), dm.n4(), t_Mw);
    build(out.A5t, dm.n4(), dm.n4(), t_Mw);
    build(out.A4, dm.n4(), dm.n4(), t_A4);
    build(out.A5, dm.n4(), dm.n4(), t_A5);
    return out;
}

} // namespace porostab

#endif
