#ifndef POROSTAB_FEM_MESH_HPP
#define POROSTAB_FEM_MESH_HPP

/// @file mesh.hpp
/// Conforming triangular meshes: structured rectangles, concentric-ring
/// disks, validation, and a plain-text exchange format.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "porostab/common.hpp"

namespace porostab {

enum class BoundaryTag { None, Gamma, Sigma };

struct BoundaryEdge {
    int a = 0, b = 0; ///< vertex indices, a < b
    BoundaryTag tag = BoundaryTag::None;
};

struct Mesh {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles; ///< counterclockwise
    std::vector<BoundaryEdge> boundary_edges;

    double triangle_area(int t) const {
        const auto& [i, j, k] = triangles[t];
        const auto& A = vertices[i];
        const auto& B = vertices[j];
        const auto& C = vertices[k];
        return 0.5 * ((B[0] - A[0]) * (C[1] - A[1]) - (C[0] - A[0]) * (B[1] - A[1]));
    }

    /// Checks orientation, conformity and that every boundary edge carries a
    /// tag other than None. Throws InvalidMesh.
    void validate() const {
        const int nv = static_cast<int>(vertices.size());
        if (nv < 3 || triangles.empty()) throw InvalidMesh("mesh: too few vertices or triangles");
        std::map<std::pair<int, int>, int> edge_count;
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            for (int v : triangles[t])
                if (v < 0 || v >= nv) throw InvalidMesh("mesh: triangle vertex index out of range");
            if (!(triangle_area(static_cast<int>(t)) > 0))
                throw InvalidMesh("mesh: non-positive triangle area at index " + std::to_string(t));
            for (int e = 0; e < 3; ++e) {
                int a = triangles[t][e], b = triangles[t][(e + 1) % 3];
                if (a > b) std::swap(a, b);
                ++edge_count[{a, b}];
            }
        }
        std::map<std::pair<int, int>, BoundaryTag> tagged;
        for (const auto& be : boundary_edges) {
            int a = be.a, b = be.b;
            if (a > b) std::swap(a, b);
            if (be.tag == BoundaryTag::None) throw InvalidMesh("mesh: boundary edge tagged None");
            tagged[{a, b}] = be.tag;
        }
        for (const auto& [edge, count] : edge_count) {
            if (count > 2) throw InvalidMesh("mesh: non-conforming edge shared by > 2 triangles");
            if (count == 1 && tagged.find(edge) == tagged.end())
                throw InvalidMesh("mesh: untagged boundary edge (" + std::to_string(edge.first) +
                                  ", " + std::to_string(edge.second) + ")");
        }
        for (const auto& [edge, tag] : tagged) {
            auto it = edge_count.find(edge);
            if (it == edge_count.end() || it->second != 1)
                throw InvalidMesh("mesh: tagged edge is not a boundary edge");
        }
    }
};

using BoundaryTagger = std::function<BoundaryTag(double x, double y)>;

namespace detail {

/// Collect the once-only edges of the triangulation and tag them by the
/// tagger evaluated at the edge midpoint.
inline void tag_boundary(Mesh& m, const BoundaryTagger& tagger) {
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : m.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    m.boundary_edges.clear();
    for (const auto& [edge, count] : edge_count) {
        if (count != 1) continue;
        const auto& A = m.vertices[edge.first];
        const auto& B = m.vertices[edge.second];
        const BoundaryTag tag = tagger(0.5 * (A[0] + B[0]), 0.5 * (A[1] + B[1]));
        m.boundary_edges.push_back({edge.first, edge.second, tag});
    }
}

} // namespace detail

/// Structured rectangle [x0,x1] x [y0,y1] with nx-by-ny cells split along
/// the same diagonal; boundary edges tagged by the tagger at midpoints
/// (default: all Gamma).
inline Mesh make_rectangle_mesh(double x0, double y0, double x1, double y1, int nx, int ny,
                                const BoundaryTagger& tagger = [](double, double) {
                                    return BoundaryTag::Gamma;
                                }) {
    if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0))
        throw InvalidMesh("make_rectangle_mesh: bad dimensions");
    Mesh m;
    m.vertices.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1),
                      v11 = vid(i + 1, j + 1);
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    detail::tag_boundary(m, tagger);
    m.validate();
    return m;
}

/// Disk of radius R centred at (cx, cy), built from n concentric rings of a
/// hexagonal lattice: ring j carries 6j vertices at radius R j/n, giving
/// 6 n^2 triangles and 1 + 3n(n+1) vertices. Boundary tagged Gamma by
/// default.
inline Mesh make_disk_mesh(double cx, double cy, double R, int n,
                           const BoundaryTagger& tagger = [](double, double) {
                               return BoundaryTag::Gamma;
                           }) {
    if (n < 1 || !(R > 0)) throw InvalidMesh("make_disk_mesh: bad dimensions");
    Mesh m;
    m.vertices.push_back({cx, cy});
    std::vector<int> ring_start(n + 1, 0); // index of first vertex of ring j
    ring_start[0] = 0;
    for (int j = 1; j <= n; ++j) {
        ring_start[j] = static_cast<int>(m.vertices.size());
        const double r = R * j / n;
        for (int i = 0; i < 6 * j; ++i) {
            const double a = 2.0 * M_PI * i / (6 * j);
            m.vertices.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
        }
    }

    // centre fan
    for (int i = 0; i < 6; ++i)
        m.triangles.push_back({0, ring_start[1] + i, ring_start[1] + (i + 1) % 6});

    // stitch consecutive rings with a two-pointer angular merge
    for (int j = 2; j <= n; ++j) {
        const int ni = 6 * (j - 1), no = 6 * j;
        const int si = ring_start[j - 1], so = ring_start[j];
        auto inner_ang = [&](int i) { return 2.0 * M_PI * i / ni; };
        auto outer_ang = [&](int o) { return 2.0 * M_PI * o / no; };
        int i = 0, o = 0;
        while (i < ni || o < no) {
            // choose which ring advances: the one whose next vertex comes
            // first in angle
            const bool adv_outer =
                (i == ni) || (o < no && outer_ang(o + 1) <= inner_ang(i + 1));
            if (adv_outer) {
                m.triangles.push_back({so + o % no, so + (o + 1) % no, si + i % ni});
                ++o;
            } else {
                m.triangles.push_back({si + i % ni, so + o % no, si + (i + 1) % ni});
                ++i;
            }
        }
    }

    // enforce counterclockwise orientation
    for (auto& tri : m.triangles) {
        const auto& A = m.vertices[tri[0]];
        const auto& B = m.vertices[tri[1]];
        const auto& C = m.vertices[tri[2]];
        if ((B[0] - A[0]) * (C[1] - A[1]) - (C[0] - A[0]) * (B[1] - A[1]) < 0)
            std::swap(tri[1], tri[2]);
    }
    detail::tag_boundary(m, tagger);
    m.validate();
    return m;
}

/// Plain-text format:
///   vertices N
///   x y               (N lines)
///   triangles M
///   i j k             (M lines)
///   edges K           (optional)
///   a b tag           (K lines; tag in {gamma, sigma})
inline void write_mesh(const Mesh& m, std::ostream& os) {
    os << "vertices " << m.vertices.size() << "\n";
    os.precision(17);
    for (const auto& v : m.vertices) os << v[0] << " " << v[1] << "\n";
    os << "triangles " << m.triangles.size() << "\n";
    for (const auto& t : m.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "edges " << m.boundary_edges.size() << "\n";
    for (const auto& e : m.boundary_edges)
        os << e.a << " " << e.b << " " << (e.tag == BoundaryTag::Gamma ? "gamma" : "sigma")
           << "\n";
}

inline void write_mesh(const Mesh& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_mesh: cannot open " + path);
    write_mesh(m, os);
    if (!os) throw IoError("write_mesh: write failed for " + path);
}

inline Mesh read_mesh(std::istream& is) {
    Mesh m;
    std::string word;
    std::size_t n = 0;
    if (!(is >> word >> n) || word != "vertices")
        throw IoError("read_mesh: expected 'vertices N' header");
    m.vertices.resize(n);
    for (auto& v : m.vertices)
        if (!(is >> v[0] >> v[1])) throw IoError("read_mesh: bad vertex line");
    if (!(is >> word >> n) || word != "triangles")
        throw IoError("read_mesh: expected 'triangles M' header");
    m.triangles.resize(n);
    for (auto& t : m.triangles)
        if (!(is >> t[0] >> t[1] >> t[2])) throw IoError("read_mesh: bad triangle line");
    if (is >> word) {
        if (word != "edges" || !(is >> n)) throw IoError("read_mesh: expected 'edges K' header");
        m.boundary_edges.resize(n);
        for (auto& e : m.boundary_edges) {
            std::string tag;
            if (!(is >> e.a >> e.b >> tag)) throw IoError("read_mesh: bad edge line");
            if (tag == "gamma") e.tag = BoundaryTag::Gamma;
            else if (tag == "sigma") e.tag = BoundaryTag::Sigma;
            else throw IoError("read_mesh: unknown edge tag '" + tag + "'");
        }
    } else {
        detail::tag_boundary(m, [](double, double) { return BoundaryTag::Gamma; });
    }
    m.validate();
    return m;
}

inline Mesh read_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("read_mesh: cannot open " + path);
    return read_mesh(is);
}

} // namespace porostab

#endif
