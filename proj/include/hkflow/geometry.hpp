#pragma once

#include <hkflow/common.hpp>
#include <hkflow/mesh.hpp>

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <vector>

namespace hkflow {

template <typename Scalar>
using ScalarFieldT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using ScalarField = ScalarFieldT<double>;

/// Per-vertex differential quantities of a closed triangulated surface.
///
/// Mean curvature follows the outward-normal convention H = k1 + k2 (positive on
/// spheres). area_weights is the barycentric lumped measure used for every
/// integral; voronoi_areas (mixed Voronoi cells) normalize the curvature
/// estimators only.
template <typename Scalar>
struct GeometryCache
{
    using Vec = ScalarFieldT<Scalar>;
    using Vec3Array = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;

    Vec3Array normals;
    Vec3Array mean_curvature_vector;
    Vec mean_curvature;
    Vec area_weights;
    Vec voronoi_areas;
    /// Symmetric shape operator in an orthonormal tangent frame, stored as (s11, s12, s22).
    Vec3Array shape_operator;
    /// Principal curvatures, ascending.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2, Eigen::RowMajor> principal_curvatures;
    Vec second_fund_norm_sq;
    Scalar total_area = Scalar(0);
    bool has_shape_operator = false;

    Eigen::Index num_vertices() const { return mean_curvature.size(); }

    Eigen::Matrix<Scalar, 2, 2> shape_operator_at(Eigen::Index i) const
    {
        Eigen::Matrix<Scalar, 2, 2> s;
        s << shape_operator(i, 0), shape_operator(i, 1), shape_operator(i, 1), shape_operator(i, 2);
        return s;
    }
};

enum class GeometryLevel {
    Curvature, ///< normals, areas, mean curvature
    Full,      ///< additionally the shape operator and |A|^2
};

namespace detail {

template <typename Scalar>
Scalar cot(const Eigen::Matrix<Scalar, 1, 3>& u, const Eigen::Matrix<Scalar, 1, 3>& v)
{
    return u.dot(v) / u.cross(v).norm();
}

/// Least-squares fit of w = a u^2 + b uv + c v^2 + d u + e v over the 2-ring, expressed
/// in the frame (e1, e2, normal) at the vertex. Returns (s11, s12, s22) of the symmetric
/// shape operator g^{-1/2} h g^{-1/2}.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, 3> fit_shape_operator(
    const TriMesh<Scalar>& mesh,
    const std::vector<int>& neighborhood,
    Eigen::Index vertex,
    const Eigen::Matrix<Scalar, 1, 3>& normal)
{
    using Vec3 = Eigen::Matrix<Scalar, 1, 3>;
    Vec3 seed = std::abs(normal.x()) < Scalar(0.9) ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = (seed - seed.dot(normal) * normal).normalized();
    const Vec3 e2 = normal.cross(e1);
    const Vec3 origin = mesh.vertex(vertex);

    const bool with_tilt = neighborhood.size() >= 5;
    const int cols = with_tilt ? 5 : 3;
    Eigen::Matrix<Scalar, 5, 5> normal_matrix = Eigen::Matrix<Scalar, 5, 5>::Zero();
    Eigen::Matrix<Scalar, 5, 1> rhs = Eigen::Matrix<Scalar, 5, 1>::Zero();
    for (int j : neighborhood) {
        const Vec3 d = mesh.vertex(j) - origin;
        const Scalar u = d.dot(e1), v = d.dot(e2), w = d.dot(normal);
        Eigen::Matrix<Scalar, 5, 1> row;
        row << u * u, u * v, v * v, u, v;
        normal_matrix.topLeftCorner(cols, cols) += row.head(cols) * row.head(cols).transpose();
        rhs.head(cols) += row.head(cols) * w;
    }
    Eigen::Matrix<Scalar, 5, 1> coeff = Eigen::Matrix<Scalar, 5, 1>::Zero();
    coeff.head(cols) = normal_matrix.topLeftCorner(cols, cols).ldlt().solve(rhs.head(cols));

    const Eigen::Matrix<Scalar, 2, 1> grad(coeff(3), coeff(4));
    Eigen::Matrix<Scalar, 2, 2> hess;
    hess << Scalar(2) * coeff(0), coeff(1), coeff(1), Scalar(2) * coeff(2);
    const Scalar tilt = std::sqrt(Scalar(1) + grad.squaredNorm());
    // The surface bends away from the outward normal, so h = -Hess(w) / tilt.
    const Eigen::Matrix<Scalar, 2, 2> h = -hess / tilt;
    const Eigen::Matrix<Scalar, 2, 2> g = Eigen::Matrix<Scalar, 2, 2>::Identity() + grad * grad.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> metric(g);
    const Eigen::Matrix<Scalar, 2, 2> g_inv_sqrt = metric.operatorInverseSqrt();
    const Eigen::Matrix<Scalar, 2, 2> s = g_inv_sqrt * h * g_inv_sqrt;
    return Eigen::Matrix<Scalar, 1, 3>(s(0, 0), Scalar(0.5) * (s(0, 1) + s(1, 0)), s(1, 1));
}

} // namespace detail

/// Computes normals, lumped areas and curvature of a validated mesh.
///
/// The mean curvature vector is the cotangent Laplacian of the positions divided by
/// the mixed Voronoi area; H is its length signed against the area-weighted vertex
/// normal. With GeometryLevel::Full the shape operator comes from a quadric fit over
/// the 2-ring.
template <typename Scalar>
GeometryCache<Scalar> build_geometry(
    const TriMesh<Scalar>& mesh,
    const Topology& topo,
    GeometryLevel level = GeometryLevel::Full)
{
    using Vec3 = Eigen::Matrix<Scalar, 1, 3>;
    const Eigen::Index nv = mesh.num_vertices();
    const Eigen::Index nf = mesh.num_faces();
    const Scalar eps = degenerate_area_epsilon(mesh);

    GeometryCache<Scalar> cache;
    cache.normals.setZero(nv, 3);
    cache.area_weights.setZero(nv);
    cache.voronoi_areas.setZero(nv);
    typename GeometryCache<Scalar>::Vec3Array laplacian = GeometryCache<Scalar>::Vec3Array::Zero(nv, 3);

    for (Eigen::Index f = 0; f < nf; ++f) {
        const int idx[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
        const Vec3 p[3] = {mesh.vertex(idx[0]), mesh.vertex(idx[1]), mesh.vertex(idx[2])};
        const Vec3 area_vector = Scalar(0.5) * (p[1] - p[0]).cross(p[2] - p[0]);
        const Scalar area = area_vector.norm();
        require(area > eps, ErrorCode::DegenerateMesh, "face " + std::to_string(f) + " has zero area");

        Scalar cots[3];
        bool obtuse[3];
        for (int i = 0; i < 3; ++i) {
            const Vec3 u = p[(i + 1) % 3] - p[i];
            const Vec3 w = p[(i + 2) % 3] - p[i];
            cots[i] = detail::cot(u, w);
            obtuse[i] = u.dot(w) < Scalar(0);
        }
        for (int i = 0; i < 3; ++i) {
            // cots[i] weights the edge opposite corner i.
            const int b = idx[(i + 1) % 3], c = idx[(i + 2) % 3];
            const Vec3 e = p[(i + 2) % 3] - p[(i + 1) % 3];
            laplacian.row(b) += Scalar(0.5) * cots[i] * e;
            laplacian.row(c) -= Scalar(0.5) * cots[i] * e;
        }
        const bool any_obtuse = obtuse[0] || obtuse[1] || obtuse[2];
        for (int i = 0; i < 3; ++i) {
            cache.normals.row(idx[i]) += area_vector;
            cache.area_weights(idx[i]) += area / Scalar(3);
            if (!any_obtuse) {
                const int j = (i + 1) % 3, k = (i + 2) % 3;
                cache.voronoi_areas(idx[i]) +=
                    ((p[i] - p[k]).squaredNorm() * cots[j] + (p[i] - p[j]).squaredNorm() * cots[k]) / Scalar(8);
            } else {
                cache.voronoi_areas(idx[i]) += obtuse[i] ? area / Scalar(2) : area / Scalar(4);
            }
        }
        cache.total_area += area;
    }

    cache.normals.rowwise().normalize();
    cache.mean_curvature_vector.resize(nv, 3);
    cache.mean_curvature.resize(nv);
    for (Eigen::Index v = 0; v < nv; ++v) {
        const Vec3 hvec = -laplacian.row(v) / cache.voronoi_areas(v);
        cache.mean_curvature_vector.row(v) = hvec;
        const Scalar magnitude = hvec.norm();
        cache.mean_curvature(v) = hvec.dot(cache.normals.row(v)) < Scalar(0) ? -magnitude : magnitude;
    }

    if (level == GeometryLevel::Full) {
        cache.shape_operator.resize(nv, 3);
        cache.principal_curvatures.resize(nv, 2);
        cache.second_fund_norm_sq.resize(nv);
        parallel_for(nv, [&](Eigen::Index v) {
            const Vec3 normal = cache.normals.row(v);
            const Eigen::Matrix<Scalar, 1, 3> s = detail::fit_shape_operator(mesh, topo.two_ring[v], v, normal);
            cache.shape_operator.row(v) = s;
            const Scalar mean = Scalar(0.5) * (s(0) + s(2));
            const Scalar radius = std::sqrt(Scalar(0.25) * (s(0) - s(2)) * (s(0) - s(2)) + s(1) * s(1));
            cache.principal_curvatures(v, 0) = mean - radius;
            cache.principal_curvatures(v, 1) = mean + radius;
            cache.second_fund_norm_sq(v) = s(0) * s(0) + Scalar(2) * s(1) * s(1) + s(2) * s(2);
        });
        cache.has_shape_operator = true;
    }
    return cache;
}

template <typename Scalar>
GeometryCache<Scalar> build_geometry(const TriMesh<Scalar>& mesh, GeometryLevel level = GeometryLevel::Full)
{
    return build_geometry(mesh, build_topology(mesh), level);
}

/// Adds the shape operator to a curvature-level cache.
template <typename Scalar>
void complete_geometry(const TriMesh<Scalar>& mesh, const Topology& topo, GeometryCache<Scalar>& cache)
{
    if (cache.has_shape_operator) return;
    cache = build_geometry(mesh, topo, GeometryLevel::Full);
}

/// Smallest principal curvature over the surface. Pinching h >= C g holds iff this is >= C.
template <typename Scalar>
Scalar pinching_minimum(const GeometryCache<Scalar>& cache)
{
    require(cache.has_shape_operator, ErrorCode::InvalidArgument, "pinching needs the shape operator");
    return cache.principal_curvatures.col(0).minCoeff();
}

/// Integral of a vertex field against the lumped measure.
template <typename Scalar, typename Derived>
Scalar integrate(const GeometryCache<Scalar>& cache, const Eigen::MatrixBase<Derived>& field)
{
    return field.dot(cache.area_weights);
}

/// (sum_v |f_v|^p w_v)^(1/p) for finite p > 0.
template <typename Scalar, typename Derived>
Scalar lp_norm(const GeometryCache<Scalar>& cache, const Eigen::MatrixBase<Derived>& field, Scalar p)
{
    require(std::isfinite(p) && p > Scalar(0), ErrorCode::InvalidArgument, "lp_norm needs finite p > 0");
    require(field.size() == cache.area_weights.size(), ErrorCode::InvalidArgument, "field size mismatch");
    const Scalar sum = (field.array().abs().pow(p) * cache.area_weights.array()).sum();
    return std::pow(sum, Scalar(1) / p);
}

/// p-th power of the Lp norm, avoiding the final root.
template <typename Scalar, typename Derived>
Scalar lp_norm_pow(const GeometryCache<Scalar>& cache, const Eigen::MatrixBase<Derived>& field, Scalar p)
{
    require(field.size() == cache.area_weights.size(), ErrorCode::InvalidArgument, "field size mismatch");
    return (field.array().abs().pow(p) * cache.area_weights.array()).sum();
}

/// Tangential gradient of the piecewise-linear interpolant, one row per face.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor> face_gradients(
    const TriMesh<Scalar>& mesh,
    const Eigen::MatrixBase<Derived>& field)
{
    using Vec3 = Eigen::Matrix<Scalar, 1, 3>;
    require(field.size() == mesh.num_vertices(), ErrorCode::InvalidArgument, "field size mismatch");
    const Scalar eps = degenerate_area_epsilon(mesh);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor> grads(mesh.num_faces(), 3);
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const int idx[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
        const Vec3 p[3] = {mesh.vertex(idx[0]), mesh.vertex(idx[1]), mesh.vertex(idx[2])};
        const Vec3 area_vector = (p[1] - p[0]).cross(p[2] - p[0]);
        const Scalar twice_area = area_vector.norm();
        require(Scalar(0.5) * twice_area > eps, ErrorCode::DegenerateMesh, "face " + std::to_string(f) + " has zero area");
        const Vec3 n = area_vector / twice_area;
        Vec3 g = Vec3::Zero();
        for (int i = 0; i < 3; ++i) {
            g += field(idx[i]) * n.cross(p[(i + 2) % 3] - p[(i + 1) % 3]);
        }
        grads.row(f) = g / twice_area;
    }
    return grads;
}

template <typename Scalar>
ScalarFieldT<Scalar> face_areas(const TriMesh<Scalar>& mesh)
{
    ScalarFieldT<Scalar> areas(mesh.num_faces());
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) areas(f) = face_area(mesh, f);
    return areas;
}

/// (sum_f |grad f|^p area_f)^(1/p).
template <typename Scalar, typename Derived>
Scalar gradient_lp_norm(const TriMesh<Scalar>& mesh, const Eigen::MatrixBase<Derived>& field, Scalar p)
{
    require(std::isfinite(p) && p > Scalar(0), ErrorCode::InvalidArgument, "gradient norm needs finite p > 0");
    const auto grads = face_gradients(mesh, field);
    const ScalarFieldT<Scalar> areas = face_areas(mesh);
    const Scalar sum = (grads.rowwise().norm().array().pow(p) * areas.array()).sum();
    return std::pow(sum, Scalar(1) / p);
}

template <typename Scalar, typename Derived>
Scalar gradient_l2_norm(const TriMesh<Scalar>& mesh, const GeometryCache<Scalar>& /*cache*/, const Eigen::MatrixBase<Derived>& field)
{
    return gradient_lp_norm(mesh, field, Scalar(2));
}

/// Per-vertex |grad f|^2: area-weighted mean over incident faces.
template <typename Scalar, typename Derived>
ScalarFieldT<Scalar> vertex_gradient_sq(const TriMesh<Scalar>& mesh, const Eigen::MatrixBase<Derived>& field)
{
    const auto grads = face_gradients(mesh, field);
    ScalarFieldT<Scalar> acc = ScalarFieldT<Scalar>::Zero(mesh.num_vertices());
    ScalarFieldT<Scalar> weight = ScalarFieldT<Scalar>::Zero(mesh.num_vertices());
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const Scalar a = face_area(mesh, f);
        const Scalar g2 = grads.row(f).squaredNorm();
        for (int j = 0; j < 3; ++j) {
            acc(mesh.faces(f, j)) += a * g2;
            weight(mesh.faces(f, j)) += a;
        }
    }
    return acc.cwiseQuotient(weight);
}

/// Cotangent stiffness matrix L with (L f)_i = sum_j (cot a_ij + cot b_ij)/2 (f_j - f_i).
template <typename Scalar>
Eigen::SparseMatrix<Scalar> cotangent_matrix(const TriMesh<Scalar>& mesh)
{
    using Vec3 = Eigen::Matrix<Scalar, 1, 3>;
    std::vector<Eigen::Triplet<Scalar>> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.num_faces() * 12));
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const int idx[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
        const Vec3 p[3] = {mesh.vertex(idx[0]), mesh.vertex(idx[1]), mesh.vertex(idx[2])};
        for (int i = 0; i < 3; ++i) {
            const Scalar w = Scalar(0.5) * detail::cot<Scalar>(p[(i + 1) % 3] - p[i], p[(i + 2) % 3] - p[i]);
            const int b = idx[(i + 1) % 3], c = idx[(i + 2) % 3];
            triplets.emplace_back(b, c, w);
            triplets.emplace_back(c, b, w);
            triplets.emplace_back(b, b, -w);
            triplets.emplace_back(c, c, -w);
        }
    }
    Eigen::SparseMatrix<Scalar> L(mesh.num_vertices(), mesh.num_vertices());
    L.setFromTriplets(triplets.begin(), triplets.end());
    return L;
}

/// Pointwise Laplace-Beltrami: cotangent stiffness divided by the mixed Voronoi area.
template <typename Scalar, typename Derived>
ScalarFieldT<Scalar> laplace_beltrami(
    const TriMesh<Scalar>& mesh,
    const GeometryCache<Scalar>& cache,
    const Eigen::MatrixBase<Derived>& field)
{
    const ScalarFieldT<Scalar> stiff = cotangent_matrix(mesh) * field;
    return stiff.cwiseQuotient(cache.voronoi_areas);
}

} // namespace hkflow
