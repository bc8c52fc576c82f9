#pragma once

#include <hkflow/common.hpp>
#include <hkflow/geometry.hpp>
#include <hkflow/mesh.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hkflow {

/// Normal speed f of the flow dF/dt = -f(H) nu, with its first two derivatives.
struct SpeedFunction
{
    enum class Kind { PowerK, Custom };

    Kind kind = Kind::PowerK;
    int k = 2;
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> ddf;

    static SpeedFunction power(int k);
    static SpeedFunction custom(
        std::function<double(double)> f,
        std::function<double(double)> df,
        std::function<double(double)> ddf);

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;
};

enum class Termination { ReachedT, BlowupThreshold, DtUnderflow, QualityFailure };

std::string_view to_string(Termination termination);
Termination termination_from_string(std::string_view name);

struct FlowParams
{
    int k = 2;
    SpeedFunction speed = SpeedFunction::power(2);
    double dt_safety = 0.2;
    double dt_min = 1e-14;
    /// Overrides the adaptive rule when set (still clipped to stop_T).
    std::optional<double> fixed_dt;
    std::optional<double> stop_T;
    /// Stop once max H^(k+1) exceeds this value.
    double blowup_threshold = std::numeric_limits<double>::infinity();
    double quality_floor = 0.05;
    /// Keep a full snapshot every this many accepted steps (plus the first and last).
    int snapshot_stride = 10;
    /// Relaxation of each vertex toward its one-ring centroid within the tangent plane,
    /// per step and relative to the stable step. Connectivity and the normal velocity are
    /// untouched; 0 gives purely normal vertex motion.
    double tangential_smoothing = 1.0;

    /// Power-law flow f(x) = x^k.
    static FlowParams power(int k);
    void validate() const;
};

struct FlowState
{
    double time = 0.0;
    std::size_t step = 0;
    Hypersurface mesh;
    GeometryCache<double> cache;

    bool has_mesh() const { return mesh.num_vertices() > 0; }
};

/// Scalar log of one accepted step (or of the initial state when step == 0).
struct StepRecord
{
    std::size_t step = 0;
    double time = 0.0;
    /// Step size that produced this record; 0 for the initial state.
    double dt = 0.0;
    double min_H = 0.0;
    double max_H = 0.0;
    /// max H^(k+1)
    double max_H_pow = 0.0;
    double area = 0.0;
    double min_quality = 0.0;
    /// Smallest principal curvature; NaN unless the step was snapshotted.
    double min_principal = std::numeric_limits<double>::quiet_NaN();
    /// Running int_0^t int |H|^alpha dmu dt, one entry per trajectory alpha.
    std::vector<double> accumulators;
};

/// Time-ordered flow snapshots, per-step log and space-time norm accumulators.
struct FlowTrajectory
{
    int dimension = 2;
    int k = 2;
    std::vector<double> alphas;
    std::vector<FlowState> states;
    std::vector<StepRecord> steps;
    Termination termination = Termination::ReachedT;

    bool empty() const { return steps.empty() && states.empty(); }
    double initial_area() const;
    double final_time() const;
    /// Index of alpha in alphas, or nullopt.
    std::optional<std::size_t> alpha_index(double alpha) const;
    /// Final accumulator value for alpha (int int |H|^alpha), computed from snapshots
    /// by the trapezoid rule when alpha was not accumulated during the run.
    double spacetime_integral(double alpha) const;
};

/// Trapezoid rule on (possibly nonuniform) samples.
double trapezoid(const std::vector<double>& t, const std::vector<double>& y);

/// int |H|^alpha dmu on every stored state, in state order.
std::vector<double> snapshot_curvature_integrals(const FlowTrajectory& traj, double alpha);

std::vector<double> snapshot_times(const FlowTrajectory& traj);

} // namespace hkflow
