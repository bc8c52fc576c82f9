#pragma once

#include <hkflow/hkflow.hpp>

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

namespace hkflow::testing {

inline constexpr double pi = 3.14159265358979323846;

inline double rel_err(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

/// Smooth positive field: 1 + sum of random low-degree terms in the coordinates.
inline ScalarField random_smooth_field(const Hypersurface& mesh, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> coef(-0.5, 0.5);
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng), e = coef(rng);
    ScalarField f(mesh.num_vertices());
    for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
        const double x = mesh.vertices(i, 0), y = mesh.vertices(i, 1), z = mesh.vertices(i, 2);
        f(i) = std::exp(a * x + b * y + c * z) + d * x * y + e * z * z;
    }
    return f.array() - f.minCoeff() + 0.1;
}

/// Random field with no smoothness at all, for measure-theoretic properties.
inline ScalarField random_rough_field(Eigen::Index n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 3.0);
    ScalarField f(n);
    for (Eigen::Index i = 0; i < n; ++i) f(i) = u(rng);
    return f;
}

inline ScalarField coordinate(const Hypersurface& mesh, int axis)
{
    return mesh.vertices.col(axis);
}

inline ScalarField constant(const Hypersurface& mesh, double value)
{
    return ScalarField::Constant(mesh.num_vertices(), value);
}

/// Flow from the unit icosphere at k = 2 until max H^3 exceeds the threshold. Cached per level.
inline const FlowTrajectory& sphere_blowup_run(int level, double threshold = 1e6)
{
    struct Entry
    {
        int level;
        double threshold;
        FlowTrajectory traj;
    };
    static std::vector<Entry> cache;
    for (const auto& e : cache) {
        if (e.level == level && e.threshold == threshold) return e.traj;
    }
    FlowParams p = FlowParams::power(2);
    p.blowup_threshold = threshold;
    p.snapshot_stride = 20;
    cache.push_back({level, threshold, run(icosphere<double>(level), p, {4.0, 5.0})});
    return cache.back().traj;
}

inline FlowTrajectory sphere_run_until(int level, double T, int stride = 10, std::vector<double> alphas = {4.0, 5.0})
{
    FlowParams p = FlowParams::power(2);
    p.stop_T = T;
    p.snapshot_stride = stride;
    return run(icosphere<double>(level), p, alphas);
}

} // namespace hkflow::testing
