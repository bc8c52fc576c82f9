#pragma once

#include <hkflow/flow.hpp>
#include <hkflow/trajectory.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace hkflow {

enum class Verdict { ExtendableConsistent, SingularityConsistent, Indeterminate };

std::string_view to_string(Verdict verdict);

/// Log-rate test for a divergent space-time norm near the singular time.
///
/// Let x = -log(T_hat - t), with T_hat - t estimated as rate / max H^(k+1). The last six
/// units of x are split into six blocks, and log(accumulator increment per block) is
/// regressed on x. A convergent norm has geometrically shrinking increments (slope < 0);
/// a log-divergent one has constant increments (slope ~ 0).
struct DivergenceTrend
{
    bool fitted = false;
    bool diverging = false;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double x_start = 0.0;
    double x_end = 0.0;
    std::size_t blocks = 0;
};

struct ExtensionReport
{
    struct ConditionA
    {
        double C_used = 0.0;
        double min_pinching_over_run = 0.0;
        bool holds = false;
    } condition_a;

    struct ConditionB
    {
        double alpha = 0.0;
        double accumulated_norm = 0.0;
        bool diverging = false;
        /// false when alpha < n + k + 1: the norm is finite on every round sphere.
        bool informative = true;
        DivergenceTrend trend;
    } condition_b;

    Verdict verdict = Verdict::Indeterminate;
    bool blowup = false;
    std::vector<std::string> warnings;
};

/// Aggregates pinching and the alpha space-time norm into a consistency verdict.
ExtensionReport monitor(const FlowTrajectory& traj, double C, double alpha);

DivergenceTrend divergence_trend(const FlowTrajectory& traj, double alpha);

struct BlowupEntry
{
    int i = 0;
    std::size_t state_index = 0;
    double t_i = 0.0;
    int x_i = 0;
    /// max H^(k+1) over the run up to t_i, attained at (x_i, t_i)
    double Q_i = 0.0;
    Hypersurface rescaled_snapshot;
    GeometryCache<double> rescaled_cache;
    double max_rescaled_pow = 0.0;
    double value_at_x = 0.0;
    double min_rescaled_principal = 0.0;
    double max_rescaled_principal = 0.0;
    /// Rescaled principal curvatures within [0, 1 + tolerance].
    bool curvature_in_bounds = false;
    /// min/max principal curvature ratio of the initial surface and of this entry.
    double pinching_ratio_initial = 0.0;
    double pinching_ratio_rescaled = 0.0;
};

struct BlowupSequence
{
    std::vector<BlowupEntry> entries;
    double tolerance = 0.02;
};

/// Parabolically rescaled snapshots F_i = Q_i^(1/(k+1)) F at times where the running
/// maximum of H^(k+1) is attained and Q_i^(2/(k+1)) t_i >= 1.
BlowupSequence blowup_sequence(const FlowTrajectory& traj, int k, int count, double tolerance = 0.02);

/// Fitted limit of max H^(k+1) (T_hat - t).
double typeI_rate(const FlowTrajectory& traj, int k);

} // namespace hkflow
