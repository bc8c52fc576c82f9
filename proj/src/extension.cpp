#include <hkflow/extension.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hkflow {

std::string_view to_string(Verdict verdict)
{
    switch (verdict) {
    case Verdict::ExtendableConsistent: return "extendable_consistent";
    case Verdict::SingularityConsistent: return "singularity_consistent";
    case Verdict::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

namespace {

struct Series
{
    std::vector<double> time;
    std::vector<double> max_H_pow;
    std::vector<double> accumulated;
};

/// Accumulated int int |H|^alpha with max H^(k+1) alongside, from the step log when
/// alpha was tracked and from the snapshots otherwise.
Series accumulated_series(const FlowTrajectory& traj, double alpha)
{
    Series s;
    if (auto idx = traj.alpha_index(alpha); idx && !traj.steps.empty()) {
        for (const auto& r : traj.steps) {
            s.time.push_back(r.time);
            s.max_H_pow.push_back(r.max_H_pow);
            s.accumulated.push_back(r.accumulators[*idx]);
        }
        return s;
    }
    const std::vector<double> y = snapshot_curvature_integrals(traj, alpha);
    double acc = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const auto& st = traj.states[i];
        if (i > 0) acc += 0.5 * (st.time - traj.states[i - 1].time) * (y[i] + y[i - 1]);
        s.time.push_back(st.time);
        s.max_H_pow.push_back(st.cache.mean_curvature.cwiseAbs().array().pow(traj.k + 1).maxCoeff());
        s.accumulated.push_back(acc);
    }
    return s;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at)
{
    if (at <= x.front()) return y.front();
    if (at >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), at);
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double f = (at - x[j - 1]) / (x[j] - x[j - 1]);
    return y[j - 1] + f * (y[j] - y[j - 1]);
}

double min_pinching(const FlowTrajectory& traj)
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : traj.steps) {
        if (!std::isnan(r.min_principal)) m = std::min(m, r.min_principal);
    }
    for (const auto& s : traj.states) {
        if (s.has_mesh() && s.cache.has_shape_operator) m = std::min(m, pinching_minimum(s.cache));
    }
    return m;
}

double pinching_ratio(const GeometryCache<double>& cache)
{
    return cache.principal_curvatures.col(0).minCoeff() / cache.principal_curvatures.col(1).maxCoeff();
}

} // namespace

DivergenceTrend divergence_trend(const FlowTrajectory& traj, double alpha)
{
    DivergenceTrend trend;
    if (traj.termination != Termination::BlowupThreshold) return trend;
    double rate = 0.0;
    try {
        rate = estimate_tmax(traj, traj.k).rate;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientSamples) throw;
        return trend;
    }

    const Series s = accumulated_series(traj, alpha);
    std::vector<double> x, acc;
    for (std::size_t i = 0; i < s.time.size(); ++i) {
        if (!(s.max_H_pow[i] > 0.0)) continue;
        const double xi = std::log(s.max_H_pow[i] / rate);
        if (!x.empty() && xi <= x.back()) continue;
        x.push_back(xi);
        acc.push_back(s.accumulated[i]);
    }
    constexpr int blocks = 6;
    if (x.size() < blocks + 1) return trend;
    const double x_end = x.back();
    const double x_start = std::max(x.front(), x_end - 6.0);
    if (x_end - x_start < 1.5) return trend;
    const double width = (x_end - x_start) / blocks;

    std::vector<double> centers, logs;
    for (int j = 0; j < blocks; ++j) {
        const double a = x_start + j * width;
        const double inc = interpolate(x, acc, a + width) - interpolate(x, acc, a);
        if (inc > 0.0) {
            centers.push_back(a + 0.5 * width);
            logs.push_back(std::log(inc));
        }
    }
    if (centers.size() < 3) return trend;

    const std::size_t m = centers.size();
    double cx = 0.0, cy = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        cx += centers[j];
        cy += logs[j];
    }
    cx /= m;
    cy /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        sxx += (centers[j] - cx) * (centers[j] - cx);
        sxy += (centers[j] - cx) * (logs[j] - cy);
    }
    const double slope = sxy / sxx;
    double sse = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double e = logs[j] - (cy + slope * (centers[j] - cx));
        sse += e * e;
    }
    trend.fitted = true;
    trend.slope = slope;
    trend.slope_stderr = m > 2 ? std::sqrt(sse / double(m - 2) / sxx) : 0.0;
    trend.x_start = x_start;
    trend.x_end = x_end;
    trend.blocks = m;
    trend.diverging = slope > -std::max(2.0 * trend.slope_stderr, 0.05);
    return trend;
}

ExtensionReport monitor(const FlowTrajectory& traj, double C, double alpha)
{
    require(!traj.empty(), ErrorCode::EmptyTrajectory, "trajectory is empty");
    require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be positive");
    ExtensionReport report;
    report.blowup = traj.termination == Termination::BlowupThreshold;

    auto& a = report.condition_a;
    a.C_used = C;
    a.min_pinching_over_run = min_pinching(traj);
    a.holds = std::isfinite(a.min_pinching_over_run) && a.min_pinching_over_run >= C;
    if (!std::isfinite(a.min_pinching_over_run)) report.warnings.push_back("no principal curvature data in the trajectory");

    auto& b = report.condition_b;
    b.alpha = alpha;
    const int critical = traj.dimension + traj.k + 1;
    b.informative = alpha >= critical;
    if (!b.informative) {
        report.warnings.push_back("alpha below n+k+1: the norm is finite even on shrinking spheres");
    }
    const Series s = accumulated_series(traj, alpha);
    b.accumulated_norm = std::pow(s.accumulated.back(), 1.0 / alpha);
    b.trend = divergence_trend(traj, alpha);
    b.diverging = b.trend.diverging;
    if (report.blowup && !b.trend.fitted) report.warnings.push_back("divergence trend could not be fitted");

    if (report.blowup) {
        report.verdict = (!a.holds || b.diverging) ? Verdict::SingularityConsistent : Verdict::Indeterminate;
    } else {
        report.verdict = (a.holds && !b.diverging) ? Verdict::ExtendableConsistent : Verdict::Indeterminate;
    }
    return report;
}

BlowupSequence blowup_sequence(const FlowTrajectory& traj, int k, int count, double tolerance)
{
    require(count >= 1, ErrorCode::InvalidArgument, "count must be >= 1");
    require(traj.termination == Termination::BlowupThreshold, ErrorCode::NoBlowup,
        "trajectory ended with " + std::string(to_string(traj.termination)));

    // Running maximum of H^(k+1) over all logged steps up to each snapshot.
    std::vector<std::size_t> eligible;
    double running = 0.0;
    std::size_t r = 0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const FlowState& s = traj.states[i];
        if (!s.has_mesh()) continue;
        while (r < traj.steps.size() && traj.steps[r].time < s.time) {
            running = std::max(running, std::abs(std::pow(traj.steps[r].max_H, k + 1)));
            ++r;
        }
        const double q = s.cache.mean_curvature.cwiseAbs().array().pow(k + 1).maxCoeff();
        if (q < running) continue;
        running = q;
        if (std::pow(q, 2.0 / (k + 1)) * s.time >= 1.0) eligible.push_back(i);
    }
    require(!eligible.empty(), ErrorCode::NoBlowup, "no snapshot satisfies the rescaling conditions");
    const int picks = std::min<int>(count, static_cast<int>(eligible.size()));

    const FlowState* initial = nullptr;
    for (const auto& s : traj.states) {
        if (s.has_mesh() && s.cache.has_shape_operator) { initial = &s; break; }
    }

    BlowupSequence seq;
    seq.tolerance = tolerance;
    for (int j = 0; j < picks; ++j) {
        // Evenly spaced over the eligible snapshots, ending at the last one.
        const std::size_t pos = picks == 1
            ? eligible.size() - 1
            : static_cast<std::size_t>(std::llround(double(eligible.size() - 1) * double(j) / double(picks - 1)));
        const FlowState& s = traj.states[eligible[pos]];
        BlowupEntry e;
        e.i = j + 1;
        e.state_index = eligible[pos];
        e.t_i = s.time;
        const Eigen::ArrayXd Hpow = s.cache.mean_curvature.cwiseAbs().array().pow(k + 1);
        Eigen::Index arg = 0;
        e.Q_i = Hpow.maxCoeff(&arg);
        e.x_i = static_cast<int>(arg);
        e.rescaled_snapshot = scaled(s.mesh, std::pow(e.Q_i, 1.0 / (k + 1)));
        e.rescaled_cache = build_geometry(e.rescaled_snapshot, GeometryLevel::Full);
        const Eigen::ArrayXd rescaled = e.rescaled_cache.mean_curvature.cwiseAbs().array().pow(k + 1);
        e.max_rescaled_pow = rescaled.maxCoeff();
        e.value_at_x = rescaled(arg);
        e.min_rescaled_principal = e.rescaled_cache.principal_curvatures.col(0).minCoeff();
        e.max_rescaled_principal = e.rescaled_cache.principal_curvatures.col(1).maxCoeff();
        e.curvature_in_bounds = e.min_rescaled_principal >= -tolerance && e.max_rescaled_principal <= 1.0 + tolerance;
        e.pinching_ratio_rescaled = pinching_ratio(e.rescaled_cache);
        e.pinching_ratio_initial = initial ? pinching_ratio(initial->cache) : std::numeric_limits<double>::quiet_NaN();
        seq.entries.push_back(std::move(e));
    }
    return seq;
}

double typeI_rate(const FlowTrajectory& traj, int k)
{
    return estimate_tmax(traj, k).rate;
}

} // namespace hkflow
