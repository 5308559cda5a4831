#ifndef POROSTAB_FEM_SPACES_HPP
#define POROSTAB_FEM_SPACES_HPP

/// @file spaces.hpp
/// Degree-of-freedom maps for the mixed pairing: vector P1 plus cubic
/// bubble for the displacement, scalar P1 for fluid pressure and both
/// concentrations, and P0 for the total pressure.

#include <Eigen/Dense>

#include "porostab/common.hpp"
#include "porostab/fem/mesh.hpp"

namespace porostab {

/// Index maps into the per-field coefficient vectors.
/// Displacement: vertex dofs first (2 per vertex, x then y interleaved),
/// then 2 bubble dofs per triangle.
struct DofMap {
    int nv = 0; ///< vertices
    int nt = 0; ///< triangles

    int n1() const { return 2 * nv + 2 * nt; } ///< displacement dofs
    int n2() const { return nt; }              ///< total pressure dofs
    int n3() const { return nv; }              ///< fluid pressure dofs
    int n4() const { return nv; }              ///< dofs per concentration

    int u_vertex(int v, int comp) const { return 2 * v + comp; }
    int u_bubble(int t, int comp) const { return 2 * nv + 2 * t + comp; }
    int psi(int t) const { return t; }
    int p(int v) const { return v; }
    int w(int v) const { return v; }
};

inline DofMap build_spaces(const Mesh& mesh) {
    mesh.validate();
    DofMap dm;
    dm.nv = static_cast<int>(mesh.vertices.size());
    dm.nt = static_cast<int>(mesh.triangles.size());
    return dm;
}

/// Discrete fields at one time level.
struct FemState {
    Eigen::VectorXd u;   ///< size n1
    Eigen::VectorXd p;   ///< size n3
    Eigen::VectorXd psi; ///< size n2
    Eigen::VectorXd w1;  ///< size n4
    Eigen::VectorXd w2;  ///< size n4
    double time = 0.0;

    static FemState zero(const DofMap& dm) {
        FemState s;
        s.u = Eigen::VectorXd::Zero(dm.n1());
        s.p = Eigen::VectorXd::Zero(dm.n3());
        s.psi = Eigen::VectorXd::Zero(dm.n2());
        s.w1 = Eigen::VectorXd::Zero(dm.n4());
        s.w2 = Eigen::VectorXd::Zero(dm.n4());
        return s;
    }
};

} // namespace porostab

#endif
