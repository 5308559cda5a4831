#ifndef POROSTAB_FEM_SOLVER_HPP
#define POROSTAB_FEM_SOLVER_HPP

/// @file solver.hpp
/// Time stepping for the coupled poroelasticity/convection-reaction-
/// diffusion system: Newton with exact Jacobian on the monolithic residual,
/// element-level static condensation of the interior dofs (displacement
/// bubble and total pressure) and a direct sparse LU on the condensed
/// system of 5 unknowns per vertex.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef POROSTAB_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "porostab/common.hpp"
#include "porostab/fem/forms.hpp"
#include "porostab/fem/mesh.hpp"
#include "porostab/fem/spaces.hpp"
#include "porostab/model.hpp"

namespace porostab {

/// Complete description of one 2D experiment.
struct Scenario {
    Mesh mesh;
    ModelParams params;
    CalciumParams calcium{};
    enum class Kinetics { Schnackenberg, Calcium } kinetics = Kinetics::Schnackenberg;
    ActiveStress active{};

    /// ClampedTraction: u = dirichlet_u on Gamma, total traction + p =
    /// dirichlet_p on Sigma. Robin: spring condition everywhere, no
    /// essential constraints. AllDirichlet: u and p prescribed on the whole
    /// boundary (manufactured-solution runs).
    enum class BcMode { ClampedTraction, Robin, AllDirichlet } bc_mode = BcMode::ClampedTraction;
    SpaceTimeVector traction;                      ///< on Sigma [Pa]
    std::function<double(double)> robin_stiffness; ///< zeta(t)
    SpaceTimeVector body_force;                    ///< b, scaled by rho
    SpaceTimeVector momentum_source;               ///< extra momentum RHS
    SpaceTimeScalar fluid_source;                  ///< ell
    SpaceTimeVector dirichlet_u;                   ///< defaults to zero
    SpaceTimeScalar dirichlet_p;                   ///< defaults to zero

    double dt = 0.0025;
    double t_final = 1.5;
    double perturb_amplitude = 1e-3;
    std::uint64_t seed = 1;
    std::function<double(double, double)> w1_init, w2_init; ///< override initial chemicals

    std::array<double, 2> probe_point{0.5, 0.3};
    int sample_stride = 1;
    int snapshot_stride = 0; ///< 0: keep only the final state
};

struct StepReport {
    int iterations = 0;
    std::vector<double> residuals; ///< weighted norm per Newton iterate
};

struct ProbeSample {
    double t = 0;
    double w1_probe = 0;
    double w2_std = 0;
    double psi_min = 0, psi_max = 0;
    double mass_w1 = 0, mass_w2 = 0;
    int newton_iterations = 0;
};

struct RunResult {
    std::vector<ProbeSample> series;
    std::vector<std::pair<double, FemState>> snapshots;
    FemState final_state;
};

/// Exact integral of a P1 field.
inline double integral_p1(const Mesh& mesh, const Eigen::VectorXd& w) {
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        s += mesh.triangle_area(static_cast<int>(t)) *
             (w[tri[0]] + w[tri[1]] + w[tri[2]]) / 3.0;
    }
    return s;
}

inline double vertex_std(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().mean());
}

class FemSolver {
public:
    double newton_tol = 1e-6;       ///< weighted residual drop per step
    double newton_abs_floor = 1e-12; ///< RMS residual below this is converged;
                                     ///< guards quiescent runs where the first
                                     ///< residual is already at roundoff and a
                                     ///< relative drop is unattainable
    int max_newton = 30;

    explicit FemSolver(Scenario scenario) : sc_(std::move(scenario)) {
        dm_ = build_spaces(sc_.mesh);
        if (!(sc_.dt > 0)) throw Error("FemSolver: dt must be positive");
        geom_.reserve(dm_.nt);
        for (int t = 0; t < dm_.nt; ++t) geom_.push_back(elem_geom(sc_.mesh, t));
        mark_dirichlet();
        cond_.resize(dm_.nt);
    }

    const DofMap& dofmap() const { return dm_; }
    const Mesh& mesh() const { return sc_.mesh; }
    const Scenario& scenario() const { return sc_; }

    /// Rest poromechanics plus the kinetics-specific initial chemicals:
    /// perturbed homogeneous steady state for Schnackenberg (seeded uniform
    /// vertex noise), homeostatic constants for Calcium.
    FemState initial_state() const {
        FemState s = FemState::zero(dm_);
        std::mt19937_64 gen(sc_.seed);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        double w10 = 1.0, w20 = 1e-4;
        bool perturb = false;
        if (sc_.kinetics == Scenario::Kinetics::Schnackenberg) {
            const SteadyState ss = steady_state(sc_.params);
            w10 = ss.w10;
            w20 = ss.w20;
            perturb = sc_.perturb_amplitude != 0.0;
        }
        for (int v = 0; v < dm_.nv; ++v) {
            const double x = sc_.mesh.vertices[v][0], y = sc_.mesh.vertices[v][1];
            s.w1[v] = sc_.w1_init ? sc_.w1_init(x, y)
                                  : w10 + (perturb ? sc_.perturb_amplitude * d(gen) : 0.0);
            s.w2[v] = sc_.w2_init ? sc_.w2_init(x, y)
                                  : w20 + (perturb ? sc_.perturb_amplitude * d(gen) : 0.0);
        }
        return s;
    }

    /// One backward-Euler step from state_n (with state_nm1 supplying the
    /// second-order history when rho > 0) to t = state_n.time + dt.
    FemState advance(const FemState& state_n, const FemState& state_nm1,
                     StepReport* report = nullptr) {
        const double t_new = state_n.time + sc_.dt;
        FemState x = state_n;
        x.time = t_new;
        impose_bc(x, t_new);

        StepReport rep;
        double prev_r = 0.0;
        int grow = 0;
        bool converged = false;
        for (int k = 0; k < max_newton; ++k) {
            // cheap residual-only pass for the convergence check; the full
            // Jacobian is assembled below only when another solve is needed
            if (k == 0)
                assemble(x, state_n, state_nm1, t_new);
            else
                assemble_residual(x, state_n, state_nm1, t_new);
            const double r = residual_rms();
            rep.residuals.push_back(r);
            if (k == 0) r_ref_ = std::max(r_ref_, r);
            if (r <= newton_tol * r_ref_ || r <= newton_abs_floor) {
                converged = true;
                rep.iterations = k;
                break;
            }
            if (k > 0 && r > prev_r) {
                if (++grow >= 3) throw NewtonDiverged("Newton residual grew 3 times in a row");
            } else {
                grow = 0;
            }
            prev_r = r;

            if (k > 0) assemble(x, state_n, state_nm1, t_new);
            const Eigen::VectorXd de = solve_condensed();
            const double step_inf = apply_increment(x, de);
            rep.iterations = k + 1;
            if (step_inf <= 1e-14 * (1.0 + iterate_inf(x))) {
                converged = true;
                break;
            }
        }
        if (!converged &&
            rep.residuals.back() > std::max(newton_tol * r_ref_, newton_abs_floor))
            throw NewtonDiverged("Newton did not converge within max iterations");
        if (report) *report = rep;
        return x;
    }

    RunResult run() {
        RunResult out;
        FemState sn = initial_state();
        FemState snm1 = sn;
        probe_vertex_ = nearest_vertex(sc_.probe_point);
        out.series.push_back(sample(sn, 0));
        const int nsteps = static_cast<int>(std::llround(sc_.t_final / sc_.dt));
        for (int n = 1; n <= nsteps; ++n) {
            StepReport rep;
            FemState snp1 = advance(sn, snm1, &rep);
            snm1 = std::move(sn);
            sn = std::move(snp1);
            if (sc_.sample_stride > 0 && n % sc_.sample_stride == 0)
                out.series.push_back(sample(sn, rep.iterations));
            if (sc_.snapshot_stride > 0 && n % sc_.snapshot_stride == 0)
                out.snapshots.emplace_back(sn.time, sn);
        }
        out.final_state = std::move(sn);
        return out;
    }

private:
    Scenario sc_;
    DofMap dm_;
    std::vector<ElemGeom> geom_;
    std::vector<char> fixed_; ///< per condensed dof (5 per vertex)
    double r_ref_ = 0.0;
    int probe_vertex_ = 0;

    // per-element condensation data from the last assembly
    struct ElemCond {
        Eigen::Matrix3d Jii_inv;
        Eigen::Matrix<double, 3, 15> Jie;
        Eigen::Vector3d Ri;
    };
    std::vector<ElemCond> cond_;
    std::vector<Eigen::Triplet<double>> trips_;
    Eigen::VectorXd R_ext_, rhs_;
    double interior_sq_ = 0.0;
#ifdef POROSTAB_HAVE_UMFPACK
    Eigen::UmfPackLU<SpMat> lu_;
#else
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
#endif
    bool analyzed_ = false;

    int gu(int v, int c) const { return 5 * v + c; }
    int gp(int v) const { return 5 * v + 2; }
    int gw1(int v) const { return 5 * v + 3; }
    int gw2(int v) const { return 5 * v + 4; }
    int n_ext() const { return 5 * dm_.nv; }

    void mark_dirichlet() {
        fixed_.assign(n_ext(), 0);
        for (const auto& e : sc_.mesh.boundary_edges) {
            const bool all = sc_.bc_mode == Scenario::BcMode::AllDirichlet;
            const bool clamp_u =
                all || (sc_.bc_mode == Scenario::BcMode::ClampedTraction && e.tag == BoundaryTag::Gamma);
            const bool fix_p =
                all || (sc_.bc_mode == Scenario::BcMode::ClampedTraction && e.tag == BoundaryTag::Sigma);
            for (int v : {e.a, e.b}) {
                if (clamp_u) fixed_[gu(v, 0)] = fixed_[gu(v, 1)] = 1;
                if (fix_p) fixed_[gp(v)] = 1;
            }
        }
    }

    void impose_bc(FemState& x, double t) const {
        for (int v = 0; v < dm_.nv; ++v) {
            const double px = sc_.mesh.vertices[v][0], py = sc_.mesh.vertices[v][1];
            if (fixed_[gu(v, 0)]) {
                const auto g = sc_.dirichlet_u ? sc_.dirichlet_u(px, py, t)
                                               : std::array<double, 2>{0.0, 0.0};
                x.u[dm_.u_vertex(v, 0)] = g[0];
                x.u[dm_.u_vertex(v, 1)] = g[1];
            }
            if (fixed_[gp(v)]) x.p[v] = sc_.dirichlet_p ? sc_.dirichlet_p(px, py, t) : 0.0;
        }
    }

    static constexpr std::array<int, 3> int_loc{6, 7, 8};
    static constexpr std::array<int, 15> ext_loc{0, 1, 2, 3, 4, 5, 9, 10, 11, 12, 13, 14, 15, 16, 17};

    void element_ext_map(int t, std::array<int, 15>& g) const {
        const auto& tri = sc_.mesh.triangles[t];
        for (int i = 0; i < 3; ++i) {
            g[2 * i] = gu(tri[i], 0);
            g[2 * i + 1] = gu(tri[i], 1);
            g[6 + i] = gp(tri[i]);
            g[9 + i] = gw1(tri[i]);
            g[12 + i] = gw2(tri[i]);
        }
    }

    /// Local residual/Jacobian of one element at the current iterate.
    /// Local dof order: vertex u (6), bubble u (2), psi (1), p (3), w1 (3),
    /// w2 (3). WITH_J = false skips the Jacobian (residual-only passes).
    template <bool WITH_J = true>
    void element_system(int t, const FemState& x, const FemState& sn, const FemState& snm1,
                        double t_new, Eigen::Matrix<double, 18, 18>& J,
                        Eigen::Matrix<double, 18, 1>& R) const {
        if constexpr (WITH_J) J.setZero();
        R.setZero();
        const ElemGeom& g = geom_[t];
        const auto& tri = sc_.mesh.triangles[t];
        const ModelParams& p = sc_.params;
        const double mu = p.mu(), lam = p.lambda(), dt = sc_.dt;
        const bool inertial = p.rho > 0.0;
        const bool schnack = sc_.kinetics == Scenario::Kinetics::Schnackenberg;
        const TriQuad& q = tri_quad4();

        std::array<int, 8> udof{};
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 2; ++c) udof[2 * i + c] = dm_.u_vertex(tri[i], c);
        udof[6] = dm_.u_bubble(t, 0);
        udof[7] = dm_.u_bubble(t, 1);

        Eigen::Matrix<double, 8, 1> ue, ue_n, ue_nm1;
        for (int a = 0; a < 8; ++a) {
            ue[a] = x.u[udof[a]];
            ue_n[a] = sn.u[udof[a]];
            ue_nm1[a] = snm1.u[udof[a]];
        }
        const double psi_e = x.psi[t], psi_n = sn.psi[t];

        // constant P1 gradients of the scalar fields
        std::array<double, 2> gw1{0, 0}, gw2{0, 0}, gpf{0, 0};
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 2; ++c) {
                gw1[c] += g.grad[i][c] * x.w1[tri[i]];
                gw2[c] += g.grad[i][c] * x.w2[tri[i]];
                gpf[c] += g.grad[i][c] * x.p[tri[i]];
            }

        const double storage = p.c0 + p.alpha * p.alpha / lam;
        for (int iq = 0; iq < TriQuad::n; ++iq) {
            const auto& l = q.bary[iq];
            const double wq = q.w[iq] * g.area;
            const double xq = l[0] * g.xy[0][0] + l[1] * g.xy[1][0] + l[2] * g.xy[2][0];
            const double yq = l[0] * g.xy[0][1] + l[1] * g.xy[1][1] + l[2] * g.xy[2][1];

            const std::array<double, 4> N{l[0], l[1], l[2], bubble_value(l)};
            const std::array<std::array<double, 2>, 4> dN{g.grad[0], g.grad[1], g.grad[2],
                                                          bubble_grad(g, l)};

            // interpolated fields
            double w1q = 0, w2q = 0, pq = 0, pq_n = 0;
            for (int i = 0; i < 3; ++i) {
                w1q += l[i] * x.w1[tri[i]];
                w2q += l[i] * x.w2[tri[i]];
                pq += l[i] * x.p[tri[i]];
                pq_n += l[i] * sn.p[tri[i]];
            }
            std::array<double, 2> uq{0, 0}, uq_n{0, 0}, uq_nm1{0, 0};
            double div_u = 0, div_un = 0;
            double exx = 0, eyy = 0, exy = 0;
            for (int a = 0; a < 4; ++a)
                for (int c = 0; c < 2; ++c) {
                    const double val = ue[2 * a + c];
                    uq[c] += N[a] * val;
                    uq_n[c] += N[a] * ue_n[2 * a + c];
                    uq_nm1[c] += N[a] * ue_nm1[2 * a + c];
                    div_u += dN[a][c] * val;
                    div_un += dN[a][c] * ue_n[2 * a + c];
                    if (c == 0) {
                        exx += dN[a][0] * ue[2 * a];
                        exy += 0.5 * dN[a][1] * ue[2 * a];
                    } else {
                        eyy += dN[a][1] * ue[2 * a + 1];
                        exy += 0.5 * dN[a][0] * ue[2 * a + 1];
                    }
                }
            const std::array<double, 2> conv{(uq[0] - uq_n[0]) / dt, (uq[1] - uq_n[1]) / dt};
            const double div_u_dot = (div_u - div_un) / dt;

            // stress 2 mu eps(u)
            const double sxx = 2.0 * mu * exx, syy = 2.0 * mu * eyy, sxy = 2.0 * mu * exy;

            const std::array<double, 2> kv = sc_.active.k_at(p, xq, yq);
            const double rv = sc_.active.r(w1q, w2q, t_new);
            const double dr1 = sc_.active.dr_dw1(w1q), dr2 = sc_.active.dr_dw2();

            // kinetics and exact derivatives
            double fv, gv, df1, df2, dg1, dg2, dfpsi = 0, dgpsi = 0, dfdiv = 0, dgdiv = 0;
            if (schnack) {
                std::tie(fv, gv) = schnackenberg_rhs(p, w1q, w2q, div_u_dot);
                df1 = p.beta1 * (-1.0 + 2.0 * w1q * w2q) + p.gamma * div_u_dot;
                df2 = p.beta1 * w1q * w1q;
                dg1 = -2.0 * p.beta1 * w1q * w2q;
                dg2 = -p.beta1 * w1q * w1q + p.gamma * div_u_dot;
                dfdiv = p.gamma * w1q / dt;
                dgdiv = p.gamma * w2q / dt;
            } else {
                const CalciumParams& cp = sc_.calcium;
                std::tie(fv, gv) = calcium_rhs(cp, w1q, w2q, psi_e);
                const double e = std::exp(-cp.k_stress * std::abs(psi_e));
                const double br1 = -cp.chi1 + (1.0 + cp.chi1) * e;
                const double br2 = -cp.chi2 + (1.0 + cp.chi2) * e;
                const double den1 = w2q * w2q + cp.k1 * cp.k1;
                const double hill1 = w2q * w2q / den1;
                const double dhill1 = 2.0 * w2q * cp.k1 * cp.k1 / (den1 * den1);
                const double hill2 = w2q / (w2q + cp.k2);
                const double dhill2 = cp.k2 / ((w2q + cp.k2) * (w2q + cp.k2));
                const double sgn = psi_e > 0 ? 1.0 : (psi_e < 0 ? -1.0 : 0.0);
                const double debr1 = -(1.0 + cp.chi1) * cp.k_stress * sgn * e;
                const double debr2 = -(1.0 + cp.chi2) * cp.k_stress * sgn * e;
                df1 = -cp.D1c;
                df2 = cp.D1c + br1 / cp.chi1 * dhill1;
                dfpsi = debr1 / cp.chi1 * hill1;
                dg1 = cp.D1c;
                dg2 = -df2 - cp.D2c - br2 / cp.chi2 * dhill2;
                dgpsi = -dfpsi - debr2 / cp.chi2 * hill2;
            }

            // ---- momentum rows ----
            std::array<double, 2> load{0, 0};
            if (sc_.body_force) {
                const auto b = sc_.body_force(xq, yq, t_new);
                load[0] += p.rho * b[0];
                load[1] += p.rho * b[1];
            }
            if (sc_.momentum_source) {
                const auto s = sc_.momentum_source(xq, yq, t_new);
                load[0] += s[0];
                load[1] += s[1];
            }
            for (int a = 0; a < 4; ++a) {
                // (k x k) : eps(v) for v = N_a e_c
                const std::array<double, 2> kk{
                    kv[0] * kv[0] * dN[a][0] + kv[0] * kv[1] * dN[a][1],
                    kv[1] * kv[1] * dN[a][1] + kv[0] * kv[1] * dN[a][0]};
                for (int c = 0; c < 2; ++c) {
                    const int row = 2 * a + c;
                    double r = (c == 0 ? sxx * dN[a][0] + sxy * dN[a][1]
                                       : sxy * dN[a][0] + syy * dN[a][1]);
                    r -= psi_e * dN[a][c];
                    r -= p.tau * rv * kk[c];
                    r -= load[c] * N[a];
                    if (inertial)
                        r += p.rho * N[a] *
                             (uq[c] - 2.0 * uq_n[c] + uq_nm1[c]) / (dt * dt);
                    R[row] += wq * r;

                    if constexpr (WITH_J) {
                        J(row, 8) += -wq * dN[a][c];
                        for (int j = 0; j < 3; ++j) {
                            J(row, 12 + j) += -wq * p.tau * dr1 * l[j] * kk[c];
                            J(row, 15 + j) += -wq * p.tau * dr2 * l[j] * kk[c];
                        }
                    }
                }
                if constexpr (WITH_J)
                    for (int b = 0; b < 4; ++b) {
                        const double gxx = dN[a][0] * dN[b][0], gyy = dN[a][1] * dN[b][1];
                        double m = inertial ? p.rho * N[a] * N[b] / (dt * dt) : 0.0;
                        J(2 * a, 2 * b) += wq * (m + 2.0 * mu * gxx + mu * gyy);
                        J(2 * a + 1, 2 * b + 1) += wq * (m + 2.0 * mu * gyy + mu * gxx);
                        J(2 * a, 2 * b + 1) += wq * mu * dN[a][1] * dN[b][0];
                        J(2 * a + 1, 2 * b) += wq * mu * dN[a][0] * dN[b][1];
                    }
            }

            // ---- fluid pressure rows ----
            const double ellv = sc_.fluid_source ? sc_.fluid_source(xq, yq, t_new) : 0.0;
            for (int i = 0; i < 3; ++i) {
                const int row = 9 + i;
                R[row] += wq * (storage * l[i] * (pq - pq_n) / dt +
                                p.kappa / p.eta * (gpf[0] * g.grad[i][0] + gpf[1] * g.grad[i][1]) -
                                p.alpha / lam * l[i] * (psi_e - psi_n) / dt - l[i] * ellv);
                if constexpr (WITH_J) {
                    J(row, 8) += -wq * p.alpha / (lam * dt) * l[i];
                    for (int j = 0; j < 3; ++j)
                        J(row, 9 + j) += wq * (storage / dt * l[i] * l[j] +
                                               p.kappa / p.eta *
                                                   (g.grad[i][0] * g.grad[j][0] +
                                                    g.grad[i][1] * g.grad[j][1]));
                }
            }

            // ---- total pressure row ----
            R[8] += wq * (-div_u + p.alpha / lam * pq - psi_e / lam);
            if constexpr (WITH_J) {
                for (int a = 0; a < 4; ++a)
                    for (int c = 0; c < 2; ++c) J(8, 2 * a + c) += -wq * dN[a][c];
                for (int j = 0; j < 3; ++j) J(8, 9 + j) += wq * p.alpha / lam * l[j];
                J(8, 8) += -wq / lam;
            }

            // ---- chemistry rows ----
            double dtw1 = 0, dtw2 = 0;
            for (int i = 0; i < 3; ++i) {
                dtw1 += l[i] * (x.w1[tri[i]] - sn.w1[tri[i]]) / dt;
                dtw2 += l[i] * (x.w2[tri[i]] - sn.w2[tri[i]]) / dt;
            }
            for (int i = 0; i < 3; ++i) {
                const int r1 = 12 + i, r2 = 15 + i;
                R[r1] += wq * (l[i] * dtw1 + l[i] * (conv[0] * gw1[0] + conv[1] * gw1[1]) +
                               p.D1 * (gw1[0] * g.grad[i][0] + gw1[1] * g.grad[i][1]) -
                               l[i] * fv);
                R[r2] += wq * (l[i] * dtw2 + l[i] * (conv[0] * gw2[0] + conv[1] * gw2[1]) +
                               p.D2 * (gw2[0] * g.grad[i][0] + gw2[1] * g.grad[i][1]) -
                               l[i] * gv);
                if constexpr (WITH_J) {
                    for (int j = 0; j < 3; ++j) {
                        const double mass = l[i] * l[j] / dt;
                        const double stiff =
                            g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1];
                        const double convj =
                            l[i] * (conv[0] * g.grad[j][0] + conv[1] * g.grad[j][1]);
                        J(r1, 12 + j) += wq * (mass + p.D1 * stiff + convj - l[i] * df1 * l[j]);
                        J(r1, 15 + j) += -wq * l[i] * df2 * l[j];
                        J(r2, 15 + j) += wq * (mass + p.D2 * stiff + convj - l[i] * dg2 * l[j]);
                        J(r2, 12 + j) += -wq * l[i] * dg1 * l[j];
                    }
                    for (int a = 0; a < 4; ++a)
                        for (int c = 0; c < 2; ++c) {
                            const int col = 2 * a + c;
                            J(r1, col) += wq * l[i] * (N[a] / dt * gw1[c] - dfdiv * dN[a][c]);
                            J(r2, col) += wq * l[i] * (N[a] / dt * gw2[c] - dgdiv * dN[a][c]);
                        }
                    if (!schnack) {
                        J(r1, 8) += -wq * l[i] * dfpsi;
                        J(r2, 8) += -wq * l[i] * dgpsi;
                    }
                }
            }
        }
    }

    /// Boundary terms: Sigma traction into the residual, Robin spring into
    /// residual and Jacobian. Bubbles vanish on edges, so only vertex u
    /// dofs participate.
    void boundary_terms(const FemState& x, double t_new) {
        if (sc_.bc_mode == Scenario::BcMode::AllDirichlet) return;
        const EdgeQuad eq;
        const double zeta =
            (sc_.bc_mode == Scenario::BcMode::Robin && sc_.robin_stiffness)
                ? sc_.robin_stiffness(t_new)
                : 0.0;
        for (const auto& e : sc_.mesh.boundary_edges) {
            const auto& A = sc_.mesh.vertices[e.a];
            const auto& B = sc_.mesh.vertices[e.b];
            const double L = std::hypot(B[0] - A[0], B[1] - A[1]);
            if (sc_.bc_mode == Scenario::BcMode::ClampedTraction) {
                if (e.tag != BoundaryTag::Sigma || !sc_.traction) continue;
                for (int iq = 0; iq < EdgeQuad::n; ++iq) {
                    const double xi = eq.xi[iq], w = eq.w[iq] * L;
                    const auto tv = sc_.traction(A[0] + (B[0] - A[0]) * xi,
                                                 A[1] + (B[1] - A[1]) * xi, t_new);
                    for (int c = 0; c < 2; ++c) {
                        R_ext_[gu(e.a, c)] -= w * (1.0 - xi) * tv[c];
                        R_ext_[gu(e.b, c)] -= w * xi * tv[c];
                    }
                }
            } else { // Robin everywhere
                const int vids[2] = {e.a, e.b};
                const double m[2][2] = {{L / 3.0, L / 6.0}, {L / 6.0, L / 3.0}};
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        for (int c = 0; c < 2; ++c) {
                            const int r = gu(vids[i], c), cidx = gu(vids[j], c);
                            R_ext_[r] += zeta * m[i][j] * x.u[dm_.u_vertex(vids[j], c)];
                            if (!fixed_[r] && !fixed_[cidx])
                                trips_.emplace_back(r, cidx, zeta * m[i][j]);
                        }
            }
        }
    }

    void assemble(const FemState& x, const FemState& sn, const FemState& snm1, double t_new) {
        trips_.clear();
        R_ext_ = Eigen::VectorXd::Zero(n_ext());
        rhs_ = Eigen::VectorXd::Zero(n_ext());
        interior_sq_ = 0.0;

        Eigen::Matrix<double, 18, 18> J;
        Eigen::Matrix<double, 18, 1> R;
        std::array<int, 15> gmap{};
        for (int t = 0; t < dm_.nt; ++t) {
            element_system(t, x, sn, snm1, t_new, J, R);
            element_ext_map(t, gmap);

            Eigen::Matrix3d Jii;
            Eigen::Matrix<double, 3, 15> Jie;
            Eigen::Matrix<double, 15, 3> Jei;
            Eigen::Matrix<double, 15, 15> Jee;
            Eigen::Matrix<double, 15, 1> Re;
            Eigen::Vector3d Ri;
            for (int i = 0; i < 3; ++i) {
                Ri[i] = R[int_loc[i]];
                for (int j = 0; j < 3; ++j) Jii(i, j) = J(int_loc[i], int_loc[j]);
                for (int j = 0; j < 15; ++j) {
                    Jie(i, j) = J(int_loc[i], ext_loc[j]);
                    Jei(j, i) = J(ext_loc[j], int_loc[i]);
                }
            }
            for (int i = 0; i < 15; ++i) {
                Re[i] = R[ext_loc[i]];
                for (int j = 0; j < 15; ++j) Jee(i, j) = J(ext_loc[i], ext_loc[j]);
            }

            ElemCond& ec = cond_[t];
            ec.Jii_inv = Jii.inverse();
            ec.Jie = Jie;
            ec.Ri = Ri;
            interior_sq_ += Ri.squaredNorm();

            const Eigen::Matrix<double, 15, 3> K = Jei * ec.Jii_inv;
            const Eigen::Matrix<double, 15, 15> S = Jee - K * Jie;
            const Eigen::Matrix<double, 15, 1> be = K * Ri;
            for (int i = 0; i < 15; ++i) {
                const int gi = gmap[i];
                R_ext_[gi] += Re[i];
                if (fixed_[gi]) continue;
                rhs_[gi] += be[i];
                // keep exact zeros: the sparsity pattern must not depend on
                // the iterate, or the reused symbolic factorisation breaks
                for (int j = 0; j < 15; ++j) {
                    if (fixed_[gmap[j]]) continue;
                    trips_.emplace_back(gi, gmap[j], S(i, j));
                }
            }
        }

        boundary_terms(x, t_new);
        for (int i = 0; i < n_ext(); ++i) {
            if (fixed_[i]) {
                trips_.emplace_back(i, i, 1.0);
                rhs_[i] = 0.0;
            } else {
                rhs_[i] -= R_ext_[i];
            }
        }
    }

    /// Residual-only pass for convergence checks: refreshes R_ext_ and
    /// interior_sq_ without touching the condensation data or the matrix.
    void assemble_residual(const FemState& x, const FemState& sn, const FemState& snm1,
                           double t_new) {
        R_ext_ = Eigen::VectorXd::Zero(n_ext());
        interior_sq_ = 0.0;
        Eigen::Matrix<double, 18, 18> J; // untouched
        Eigen::Matrix<double, 18, 1> R;
        std::array<int, 15> gmap{};
        for (int t = 0; t < dm_.nt; ++t) {
            element_system<false>(t, x, sn, snm1, t_new, J, R);
            element_ext_map(t, gmap);
            for (int i = 0; i < 3; ++i) interior_sq_ += R[int_loc[i]] * R[int_loc[i]];
            for (int i = 0; i < 15; ++i) R_ext_[gmap[i]] += R[ext_loc[i]];
        }
        boundary_terms(x, t_new);
    }

    double residual_rms() const {
        double sq = interior_sq_;
        int n = 3 * dm_.nt;
        for (int i = 0; i < n_ext(); ++i)
            if (!fixed_[i]) {
                sq += R_ext_[i] * R_ext_[i];
                ++n;
            }
        return std::sqrt(sq / n);
    }

    Eigen::VectorXd solve_condensed() {
        SpMat A(n_ext(), n_ext());
        A.setFromTriplets(trips_.begin(), trips_.end());
        if (!analyzed_) {
            lu_.analyzePattern(A);
            analyzed_ = true;
        }
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success)
            throw LinearSolveFailure("sparse LU factorisation failed");
        Eigen::VectorXd de = lu_.solve(rhs_);
        if (lu_.info() != Eigen::Success)
            throw LinearSolveFailure("sparse LU solve failed");
        // the momentum and chemistry rows differ by many orders of
        // magnitude; one pass of iterative refinement recovers the digits
        // the factorisation loses to that scaling
        const Eigen::VectorXd res = rhs_ - A * de;
        de += lu_.solve(res);
        return de;
    }

    /// Scatter the condensed increment, recover the interior increments,
    /// return the infinity norm of the total update.
    double apply_increment(FemState& x, const Eigen::VectorXd& de) {
        double inf = de.cwiseAbs().maxCoeff();
        for (int v = 0; v < dm_.nv; ++v) {
            x.u[dm_.u_vertex(v, 0)] += de[gu(v, 0)];
            x.u[dm_.u_vertex(v, 1)] += de[gu(v, 1)];
            x.p[v] += de[gp(v)];
            x.w1[v] += de[gw1(v)];
            x.w2[v] += de[gw2(v)];
        }
        std::array<int, 15> gmap{};
        for (int t = 0; t < dm_.nt; ++t) {
            element_ext_map(t, gmap);
            Eigen::Matrix<double, 15, 1> dee;
            for (int i = 0; i < 15; ++i) dee[i] = de[gmap[i]];
            const ElemCond& ec = cond_[t];
            const Eigen::Vector3d di = -ec.Jii_inv * (ec.Ri + ec.Jie * dee);
            x.u[dm_.u_bubble(t, 0)] += di[0];
            x.u[dm_.u_bubble(t, 1)] += di[1];
            x.psi[t] += di[2];
            inf = std::max(inf, di.cwiseAbs().maxCoeff());
        }
        return inf;
    }

    static double iterate_inf(const FemState& x) {
        double m = 0.0;
        for (const auto* v : {&x.u, &x.p, &x.psi, &x.w1, &x.w2})
            if (v->size() > 0) m = std::max(m, v->cwiseAbs().maxCoeff());
        return m;
    }

    int nearest_vertex(const std::array<double, 2>& pt) const {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int v = 0; v < dm_.nv; ++v) {
            const double dx = sc_.mesh.vertices[v][0] - pt[0];
            const double dy = sc_.mesh.vertices[v][1] - pt[1];
            const double d = dx * dx + dy * dy;
            if (d < bd) {
                bd = d;
                best = v;
            }
        }
        return best;
    }

    ProbeSample sample(const FemState& s, int iters) const {
        ProbeSample ps;
        ps.t = s.time;
        ps.w1_probe = s.w1[probe_vertex_];
        ps.w2_std = vertex_std(s.w2);
        ps.psi_min = s.psi.size() ? s.psi.minCoeff() : 0.0;
        ps.psi_max = s.psi.size() ? s.psi.maxCoeff() : 0.0;
        ps.mass_w1 = integral_p1(sc_.mesh, s.w1);
        ps.mass_w2 = integral_p1(sc_.mesh, s.w2);
        ps.newton_iterations = iters;
        return ps;
    }
};

/// Radial unit field centred at (cx, cy); zero at the centre.
inline std::function<std::array<double, 2>(double, double)> radial_field(double cx, double cy) {
    return [cx, cy](double x, double y) -> std::array<double, 2> {
        const double dx = x - cx, dy = y - cy;
        const double r = std::hypot(dx, dy);
        if (r < 1e-14) return {0.0, 0.0};
        return {dx / r, dy / r};
    };
}

/// Rectangle with periodic partial traction on the top edge; clamped
/// left/right/bottom.
inline Scenario scenario_test1(int nx = 90, int ny = 54, double dt = 0.0025,
                               double t_final = 1.75) {
    Scenario sc;
    sc.mesh = make_rectangle_mesh(0.0, 0.0, 1.0, 0.6, nx, ny, [](double, double y) {
        return y > 0.6 - 1e-12 ? BoundaryTag::Sigma : BoundaryTag::Gamma;
    });
    sc.params.tau = 100.0;
    sc.params.gamma = 0.05;
    sc.params.rho = 1.0;
    sc.params.k_dir = {1.0, 0.0};
    sc.active.kind = ActiveStress::Kind::Linear;
    sc.bc_mode = Scenario::BcMode::ClampedTraction;
    sc.traction = [](double x, double, double t) -> std::array<double, 2> {
        if (x >= 0.4 && x <= 0.6) return {0.0, -25000.0 * std::sin(M_PI * t)};
        return {0.0, 0.0};
    };
    sc.dt = dt;
    sc.t_final = t_final;
    sc.probe_point = {0.5, 0.3};
    return sc;
}

/// Clamped disk with weak chemo-mechanical feedback and radial active
/// stress direction.
inline Scenario scenario_test2(int rings = 52, double dt = 0.0025, double t_final = 1.5) {
    Scenario sc;
    sc.mesh = make_disk_mesh(0.5, 0.5, 0.5, rings);
    sc.params.tau = 100.0;
    sc.params.gamma = 1e-4;
    sc.params.rho = 1.0;
    sc.active.kind = ActiveStress::Kind::Linear;
    sc.active.k_field = radial_field(0.5, 0.5);
    sc.bc_mode = Scenario::BcMode::ClampedTraction;
    sc.dt = dt;
    sc.t_final = t_final;
    sc.probe_point = {0.5, 0.5};
    return sc;
}

/// Disk with Robin springs stiffening linearly in time and a growth-type
/// activation r = tau2 t + w1^2.
inline Scenario scenario_test3(double tau = 1e4, double tau2 = 10.0, int rings = 52,
                               double dt = 0.0025, double t_final = 1.25) {
    Scenario sc = scenario_test2(rings, dt, t_final);
    sc.params.tau = tau;
    sc.params.gamma = 0.01;
    sc.active.kind = ActiveStress::Kind::Growth;
    sc.active.tau2 = tau2;
    sc.bc_mode = Scenario::BcMode::Robin;
    sc.robin_stiffness = [tau2](double t) { return tau2 * t; };
    return sc;
}

} // namespace porostab

#endif
