#pragma once

#include <hkflow/trajectory.hpp>

#include <cstddef>
#include <vector>

namespace hkflow {

/// State at time t with full geometry.
FlowState make_state(const Hypersurface& mesh, double time = 0.0);

/// Adaptive step dt_safety * h_min^2 / max f'(H), or fixed_dt when set.
/// Checks the mean-convexity and parabolicity gates.
double stable_dt(const Hypersurface& mesh, const GeometryCache<double>& cache, const FlowParams& params);

/// One forward Euler step F <- F - dt f(H) nu (plus tangential redistribution). The returned state carries full geometry.
FlowState step(const FlowState& state, const FlowParams& params);

/// Integrates from mesh0 until stop_T, the blow-up threshold, dt underflow or loss of
/// triangle quality. Accumulates int int |H|^alpha dmu dt for each alpha.
FlowTrajectory run(const Hypersurface& mesh0, const FlowParams& params, const std::vector<double>& alphas);

struct TmaxEstimate
{
    double tmax = 0.0;
    /// Fit 1/max H^(k+1) = intercept + slope * t.
    double slope = 0.0;
    double intercept = 0.0;
    /// max H^(k+1) (tmax - t) implied by the fit, -1/slope.
    double rate = 0.0;
    std::size_t samples = 0;
    double window_start = 0.0;
};

/// Extrapolates the singular time from the per-step log of max H^(k+1).
TmaxEstimate estimate_tmax(const FlowTrajectory& traj, int k);

struct EvolutionResiduals
{
    std::size_t triples = 0;
    /// Relative error of d/dt int phi dmu against -int phi f(H) H dmu over the test
    /// functions phi = 1 and 1 + (x_j - c_j) / (2 R) (max and mean over snapshot triples).
    double volume_form_max = 0.0;
    double volume_form_mean = 0.0;
    /// Relative L1 error of dH/dt against f'(H) Lap H + f(H)|A|^2 + f''(H)|grad H|^2.
    double curvature_max = 0.0;
    double curvature_mean = 0.0;
    /// Relative L1 error of dH/dt against f(H) H^2 / n, the round-sphere reduction.
    double sphere_max = 0.0;
    double sphere_mean = 0.0;
};

/// Central differences over consecutive snapshot triples. Vertex sliding within the
/// surface is subtracted, so the comparison concerns the normal motion only.
EvolutionResiduals evolution_residuals(const FlowTrajectory& traj, const FlowParams& params);

} // namespace hkflow
