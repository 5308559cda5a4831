#ifndef POROSTAB_IO_WRITERS_HPP
#define POROSTAB_IO_WRITERS_HPP

/// @file writers.hpp
/// CSV writers for fields, contours, curves and probe series, plus a
/// legacy ASCII VTK writer for field snapshots. All floating point output
/// uses 17 significant digits so that rewrite of a read-back file is
/// bitwise identical.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "porostab/common.hpp"
#include "porostab/fem/mesh.hpp"
#include "porostab/fem/solver.hpp"
#include "porostab/fem/spaces.hpp"
#include "porostab/stabmap.hpp"

namespace porostab {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

} // namespace detail

/// Matrix layout: header row `k` followed by the parameter values; each data
/// row is a k value followed by the sampled expression along that row.
inline void write_field_csv(const LevelSetField& f, const std::string& path) {
    std::ofstream os = detail::open_out(path);
    os << "k";
    for (double p : f.param_values) os << "," << fmt17(p);
    os << "\n";
    for (Eigen::Index i = 0; i < f.values.rows(); ++i) {
        os << fmt17(f.k_values[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < f.values.cols(); ++j) os << "," << fmt17(f.values(i, j));
        os << "\n";
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline LevelSetField read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    LevelSetField f;
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty field file '" + path + "'");
    {
        std::stringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ',') || cell != "k")
            throw IoError("field file '" + path + "': bad header");
        while (std::getline(ss, cell, ',')) f.param_values.push_back(std::stod(cell));
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        f.k_values.push_back(std::stod(cell));
        rows.emplace_back();
        while (std::getline(ss, cell, ',')) rows.back().push_back(std::stod(cell));
        if (rows.back().size() != f.param_values.size())
            throw IoError("field file '" + path + "': ragged row");
    }
    f.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(f.param_values.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return f;
}

/// Zero-level polylines, NaN-separated between segments.
inline void write_contours_csv(const LevelSetField& f, const std::string& path) {
    std::ofstream os = detail::open_out(path);
    os << "param,k\n";
    bool first = true;
    for (const auto& line : f.contour_polylines) {
        if (!first) os << "NaN,NaN\n";
        first = false;
        for (const auto& pt : line) os << fmt17(pt[0]) << "," << fmt17(pt[1]) << "\n";
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline void write_curve_csv(const std::vector<double>& k_values,
                            const std::vector<double>& values, const std::string& path,
                            const std::string& header = "k,max_re_phi") {
    if (k_values.size() != values.size())
        throw IoError("write_curve_csv: mismatched column lengths");
    std::ofstream os = detail::open_out(path);
    os << header << "\n";
    for (std::size_t i = 0; i < k_values.size(); ++i)
        os << fmt17(k_values[i]) << "," << fmt17(values[i]) << "\n";
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline void write_probes_csv(const std::vector<ProbeSample>& series, const std::string& path) {
    std::ofstream os = detail::open_out(path);
    os << "t,w1_probe,w2_std,psi_min,psi_max,mass_w1,mass_w2,newton_iterations\n";
    for (const auto& s : series)
        os << fmt17(s.t) << "," << fmt17(s.w1_probe) << "," << fmt17(s.w2_std) << ","
           << fmt17(s.psi_min) << "," << fmt17(s.psi_max) << "," << fmt17(s.mass_w1) << ","
           << fmt17(s.mass_w2) << "," << s.newton_iterations << "\n";
    if (!os) throw IoError("write failed for '" + path + "'");
}

/// Legacy ASCII VTK snapshot: vertex displacement, fluid pressure and the
/// two concentrations as point data, total pressure as cell data. Bubble
/// displacement dofs are interior refinements and are not exported.
inline void write_vtk(const Mesh& mesh, const DofMap& dm, const FemState& s,
                      const std::string& path) {
    if (s.u.size() != dm.n1() || s.p.size() != dm.n3() || s.psi.size() != dm.n2() ||
        s.w1.size() != dm.n4() || s.w2.size() != dm.n4())
        throw IoError("write_vtk: state size does not match dof map");
    std::ofstream os = detail::open_out(path);
    os << "# vtk DataFile Version 3.0\n";
    os << "porostab snapshot t=" << fmt17(s.time) << "\n";
    os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& v : mesh.vertices) os << fmt17(v[0]) << " " << fmt17(v[1]) << " 0\n";
    os << "CELLS " << mesh.triangles.size() << " " << 4 * mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "CELL_TYPES " << mesh.triangles.size() << "\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) os << "5\n";

    os << "POINT_DATA " << mesh.vertices.size() << "\n";
    os << "VECTORS displacement double\n";
    for (int v = 0; v < dm.nv; ++v)
        os << fmt17(s.u[dm.u_vertex(v, 0)]) << " " << fmt17(s.u[dm.u_vertex(v, 1)]) << " 0\n";
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < dm.nv; ++v) os << fmt17(s.p[v]) << "\n";
    os << "SCALARS w1 double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < dm.nv; ++v) os << fmt17(s.w1[v]) << "\n";
    os << "SCALARS w2 double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < dm.nv; ++v) os << fmt17(s.w2[v]) << "\n";

    os << "CELL_DATA " << mesh.triangles.size() << "\n";
    os << "SCALARS total_pressure double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < dm.nt; ++t) os << fmt17(s.psi[t]) << "\n";
    if (!os) throw IoError("write failed for '" + path + "'");
}

} // namespace porostab

#endif
