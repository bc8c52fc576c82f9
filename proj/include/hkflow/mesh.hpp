#pragma once

#include <hkflow/common.hpp>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <numbers>
#include <unordered_map>
#include <vector>

namespace hkflow {

/// Closed oriented triangle mesh embedded in R^3.
template <typename Scalar>
struct TriMesh
{
    using VertexArray = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;
    using FaceArray = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

    VertexArray vertices;
    FaceArray faces;

    Eigen::Index num_vertices() const { return vertices.rows(); }
    Eigen::Index num_faces() const { return faces.rows(); }

    /// Intrinsic dimension of the surface.
    static constexpr int dimension = 2;

    Eigen::Matrix<Scalar, 1, 3> vertex(Eigen::Index i) const { return vertices.row(i); }
};

using Hypersurface = TriMesh<double>;

/// Adjacency computed once per connectivity. Neighbor lists are sorted.
struct Topology
{
    std::vector<std::vector<int>> one_ring;
    std::vector<std::vector<int>> two_ring;
    std::vector<std::vector<int>> vertex_faces;
    std::vector<std::pair<int, int>> edges;
};

template <typename Scalar>
Scalar bounding_box_diagonal(const TriMesh<Scalar>& mesh)
{
    if (mesh.num_vertices() == 0) return Scalar(0);
    return (mesh.vertices.colwise().maxCoeff() - mesh.vertices.colwise().minCoeff()).norm();
}

template <typename Scalar>
Scalar face_area(const TriMesh<Scalar>& mesh, Eigen::Index f)
{
    const auto p0 = mesh.vertex(mesh.faces(f, 0));
    const auto p1 = mesh.vertex(mesh.faces(f, 1));
    const auto p2 = mesh.vertex(mesh.faces(f, 2));
    return Scalar(0.5) * (p1 - p0).cross(p2 - p0).norm();
}

/// Signed enclosed volume; positive for outward winding.
template <typename Scalar>
Scalar signed_volume(const TriMesh<Scalar>& mesh)
{
    Scalar volume(0);
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const auto p0 = mesh.vertex(mesh.faces(f, 0));
        const auto p1 = mesh.vertex(mesh.faces(f, 1));
        const auto p2 = mesh.vertex(mesh.faces(f, 2));
        volume += p0.dot(p1.cross(p2));
    }
    return volume / Scalar(6);
}

/// Zero-area threshold: 1e-12 times the squared bounding-box diagonal.
template <typename Scalar>
Scalar degenerate_area_epsilon(const TriMesh<Scalar>& mesh)
{
    const Scalar diag = bounding_box_diagonal(mesh);
    return Scalar(1e-12) * diag * diag;
}

/// Checks closedness, consistent winding, non-degeneracy and outward orientation,
/// then builds the adjacency used by the geometry kernels.
template <typename Scalar>
Topology build_topology(const TriMesh<Scalar>& mesh)
{
    const Eigen::Index nv = mesh.num_vertices();
    const Eigen::Index nf = mesh.num_faces();
    require(nv >= 4, ErrorCode::InvalidMesh, "a closed surface needs at least 4 vertices");
    require(nf >= 4, ErrorCode::InvalidMesh, "a closed surface needs at least 4 faces");
    require(mesh.faces.minCoeff() >= 0 && mesh.faces.maxCoeff() < nv,
        ErrorCode::InvalidMesh, "face index out of range");
    require(mesh.vertices.allFinite(), ErrorCode::InvalidMesh, "non-finite vertex coordinate");

    const Scalar eps = degenerate_area_epsilon(mesh);
    for (Eigen::Index f = 0; f < nf; ++f) {
        const int a = mesh.faces(f, 0), b = mesh.faces(f, 1), c = mesh.faces(f, 2);
        require(a != b && b != c && a != c, ErrorCode::DegenerateMesh,
            "face " + std::to_string(f) + " repeats a vertex");
        require(face_area(mesh, f) > eps, ErrorCode::DegenerateMesh,
            "face " + std::to_string(f) + " has zero area");
    }

    auto key = [nv](int a, int b) { return static_cast<std::int64_t>(a) * nv + b; };
    std::unordered_map<std::int64_t, int> directed;
    directed.reserve(static_cast<std::size_t>(3 * nf));
    for (Eigen::Index f = 0; f < nf; ++f) {
        for (int j = 0; j < 3; ++j) {
            const int a = mesh.faces(f, j), b = mesh.faces(f, (j + 1) % 3);
            auto [it, inserted] = directed.emplace(key(a, b), static_cast<int>(f));
            require(inserted, ErrorCode::InvalidMesh,
                "directed edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") used twice: inconsistent winding or non-manifold edge");
        }
    }
    Topology topo;
    topo.one_ring.resize(nv);
    topo.vertex_faces.resize(nv);
    for (Eigen::Index f = 0; f < nf; ++f) {
        for (int j = 0; j < 3; ++j) {
            const int a = mesh.faces(f, j), b = mesh.faces(f, (j + 1) % 3);
            require(directed.count(key(b, a)) == 1, ErrorCode::OpenMesh,
                "boundary edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
            topo.one_ring[a].push_back(b);
            topo.vertex_faces[a].push_back(static_cast<int>(f));
            if (a < b) topo.edges.emplace_back(a, b);
        }
    }
    for (auto& ring : topo.one_ring) {
        std::sort(ring.begin(), ring.end());
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    }
    require(signed_volume(mesh) > Scalar(0), ErrorCode::InvalidMesh,
        "faces are wound inward (negative enclosed volume)");

    topo.two_ring.resize(nv);
    std::vector<int> stamp(static_cast<std::size_t>(nv), -1);
    for (Eigen::Index v = 0; v < nv; ++v) {
        auto& ring = topo.two_ring[v];
        stamp[v] = static_cast<int>(v);
        for (int u : topo.one_ring[v]) {
            if (stamp[u] != v) { stamp[u] = static_cast<int>(v); ring.push_back(u); }
            for (int w : topo.one_ring[u]) {
                if (stamp[w] != v) { stamp[w] = static_cast<int>(v); ring.push_back(w); }
            }
        }
        std::sort(ring.begin(), ring.end());
    }
    std::sort(topo.edges.begin(), topo.edges.end());
    return topo;
}

/// Flips every face when the enclosed volume is negative.
template <typename Scalar>
void orient_outward(TriMesh<Scalar>& mesh)
{
    if (signed_volume(mesh) < Scalar(0)) mesh.faces.col(1).swap(mesh.faces.col(2));
}

template <typename Scalar>
TriMesh<Scalar> scaled(const TriMesh<Scalar>& mesh, Scalar factor)
{
    TriMesh<Scalar> out = mesh;
    out.vertices *= factor;
    return out;
}

template <typename Scalar>
Scalar total_area(const TriMesh<Scalar>& mesh)
{
    Scalar area(0);
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) area += face_area(mesh, f);
    return area;
}

template <typename Scalar>
Scalar min_edge_length(const TriMesh<Scalar>& mesh)
{
    Scalar h = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        for (int j = 0; j < 3; ++j) {
            h = std::min(h, (mesh.vertex(mesh.faces(f, j)) - mesh.vertex(mesh.faces(f, (j + 1) % 3))).norm());
        }
    }
    return h;
}

/// Minimum over faces of 4*sqrt(3)*area / (sum of squared edge lengths); 1 for equilateral.
template <typename Scalar>
Scalar min_triangle_quality(const TriMesh<Scalar>& mesh)
{
    Scalar q = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const auto p0 = mesh.vertex(mesh.faces(f, 0));
        const auto p1 = mesh.vertex(mesh.faces(f, 1));
        const auto p2 = mesh.vertex(mesh.faces(f, 2));
        const Scalar sq = (p1 - p0).squaredNorm() + (p2 - p1).squaredNorm() + (p0 - p2).squaredNorm();
        const Scalar area = Scalar(0.5) * (p1 - p0).cross(p2 - p0).norm();
        q = std::min(q, Scalar(4) * std::sqrt(Scalar(3)) * area / sq);
    }
    return q;
}

// ---------------------------------------------------------------------------
// Builtin surfaces
// ---------------------------------------------------------------------------

/// Subdivided icosahedron projected onto the sphere of the given radius.
/// Level l has 10*4^l + 2 vertices.
template <typename Scalar = double>
TriMesh<Scalar> icosphere(int level, Scalar radius = Scalar(1))
{
    require(level >= 0, ErrorCode::InvalidArgument, "icosphere level must be nonnegative");
    require(radius > Scalar(0), ErrorCode::InvalidArgument, "icosphere radius must be positive");
    using Point = Eigen::Matrix<Scalar, 1, 3>;
    const Scalar t = (Scalar(1) + std::sqrt(Scalar(5))) / Scalar(2);
    std::vector<Point> points = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : points) p.normalize();
    std::vector<std::array<int, 3>> tris = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto edge = std::minmax(a, b);
            auto it = midpoint.find(edge);
            if (it != midpoint.end()) return it->second;
            points.push_back((points[a] + points[b]).normalized());
            const int id = static_cast<int>(points.size()) - 1;
            midpoint.emplace(edge, id);
            return id;
        };
        std::vector<std::array<int, 3>> refined;
        refined.reserve(tris.size() * 4);
        for (const auto& [a, b, c] : tris) {
            const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
            refined.push_back({a, ab, ca});
            refined.push_back({b, bc, ab});
            refined.push_back({c, ca, bc});
            refined.push_back({ab, bc, ca});
        }
        tris = std::move(refined);
    }

    TriMesh<Scalar> mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(points.size()), 3);
    for (std::size_t i = 0; i < points.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = radius * points[i];
    mesh.faces.resize(static_cast<Eigen::Index>(tris.size()), 3);
    for (std::size_t f = 0; f < tris.size(); ++f) {
        mesh.faces.row(static_cast<Eigen::Index>(f)) << tris[f][0], tris[f][1], tris[f][2];
    }
    return mesh;
}

/// Axis-aligned ellipsoid with semi-axes (a, b, c), meshed as a stretched icosphere.
template <typename Scalar = double>
TriMesh<Scalar> ellipsoid(Scalar a, Scalar b, Scalar c, int level)
{
    require(a > 0 && b > 0 && c > 0, ErrorCode::InvalidArgument, "ellipsoid semi-axes must be positive");
    TriMesh<Scalar> mesh = icosphere<Scalar>(level);
    mesh.vertices.col(0) *= a;
    mesh.vertices.col(1) *= b;
    mesh.vertices.col(2) *= c;
    return mesh;
}

/// Torus of revolution about the z axis. major > minor > 0.
template <typename Scalar = double>
TriMesh<Scalar> torus(Scalar major, Scalar minor, int n_major, int n_minor)
{
    require(major > minor && minor > 0, ErrorCode::InvalidArgument, "torus needs major > minor > 0");
    require(n_major >= 3 && n_minor >= 3, ErrorCode::InvalidArgument, "torus needs at least 3x3 samples");
    TriMesh<Scalar> mesh;
    mesh.vertices.resize(n_major * n_minor, 3);
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    for (int i = 0; i < n_major; ++i) {
        const Scalar u = two_pi * i / n_major;
        for (int j = 0; j < n_minor; ++j) {
            const Scalar v = two_pi * j / n_minor;
            const Scalar rho = major + minor * std::cos(v);
            mesh.vertices.row(i * n_minor + j) << rho * std::cos(u), rho * std::sin(u), minor * std::sin(v);
        }
    }
    mesh.faces.resize(2 * n_major * n_minor, 3);
    auto id = [&](int i, int j) { return ((i + n_major) % n_major) * n_minor + (j + n_minor) % n_minor; };
    int f = 0;
    for (int i = 0; i < n_major; ++i) {
        for (int j = 0; j < n_minor; ++j) {
            mesh.faces.row(f++) << id(i, j), id(i + 1, j), id(i + 1, j + 1);
            mesh.faces.row(f++) << id(i, j), id(i + 1, j + 1), id(i, j + 1);
        }
    }
    orient_outward(mesh);
    return mesh;
}

} // namespace hkflow
