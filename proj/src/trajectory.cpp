#include <hkflow/trajectory.hpp>

#include <algorithm>
#include <utility>

namespace hkflow {

SpeedFunction SpeedFunction::power(int k)
{
    require(k >= 1, ErrorCode::InvalidArgument, "flow power k must be >= 1");
    SpeedFunction s;
    s.kind = Kind::PowerK;
    s.k = k;
    return s;
}

SpeedFunction SpeedFunction::custom(
    std::function<double(double)> f,
    std::function<double(double)> df,
    std::function<double(double)> ddf)
{
    require(f && df && ddf, ErrorCode::InvalidArgument, "custom speed needs f, f' and f''");
    SpeedFunction s;
    s.kind = Kind::Custom;
    s.f = std::move(f);
    s.df = std::move(df);
    s.ddf = std::move(ddf);
    return s;
}

double SpeedFunction::value(double x) const
{
    if (kind == Kind::Custom) return f(x);
    return std::pow(x, k);
}

double SpeedFunction::derivative(double x) const
{
    if (kind == Kind::Custom) return df(x);
    return k == 1 ? 1.0 : k * std::pow(x, k - 1);
}

double SpeedFunction::second_derivative(double x) const
{
    if (kind == Kind::Custom) return ddf(x);
    if (k == 1) return 0.0;
    return k == 2 ? 2.0 : k * (k - 1) * std::pow(x, k - 2);
}

std::string_view to_string(Termination termination)
{
    switch (termination) {
    case Termination::ReachedT: return "reached_T";
    case Termination::BlowupThreshold: return "blowup_threshold";
    case Termination::DtUnderflow: return "dt_underflow";
    case Termination::QualityFailure: return "quality_failure";
    }
    return "unknown";
}

Termination termination_from_string(std::string_view name)
{
    for (auto t : {Termination::ReachedT, Termination::BlowupThreshold, Termination::DtUnderflow,
             Termination::QualityFailure}) {
        if (to_string(t) == name) return t;
    }
    throw Error(ErrorCode::ParseError, "unknown termination '" + std::string(name) + "'");
}

FlowParams FlowParams::power(int k)
{
    FlowParams p;
    p.k = k;
    p.speed = SpeedFunction::power(k);
    return p;
}

void FlowParams::validate() const
{
    require(k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
    require(speed.kind == SpeedFunction::Kind::Custom || speed.k == k, ErrorCode::InvalidArgument,
        "power speed exponent differs from k");
    require(dt_safety > 0.0 && dt_safety <= 1.0, ErrorCode::InvalidArgument, "dt_safety must lie in (0, 1]");
    require(dt_min > 0.0, ErrorCode::InvalidArgument, "dt_min must be positive");
    require(!fixed_dt || *fixed_dt > 0.0, ErrorCode::InvalidArgument, "fixed_dt must be positive");
    require(!stop_T || *stop_T > 0.0, ErrorCode::InvalidArgument, "stop_T must be positive");
    require(blowup_threshold > 0.0, ErrorCode::InvalidArgument, "blowup_threshold must be positive");
    require(quality_floor >= 0.0 && quality_floor < 1.0, ErrorCode::InvalidArgument,
        "quality_floor must lie in [0, 1)");
    require(snapshot_stride >= 1, ErrorCode::InvalidArgument, "snapshot_stride must be >= 1");
    require(tangential_smoothing >= 0.0 && std::isfinite(tangential_smoothing), ErrorCode::InvalidArgument,
        "tangential_smoothing must be finite and >= 0");
}

double FlowTrajectory::initial_area() const
{
    if (!steps.empty()) return steps.front().area;
    require(!states.empty(), ErrorCode::EmptyTrajectory, "trajectory has no states");
    return states.front().cache.total_area;
}

double FlowTrajectory::final_time() const
{
    if (!steps.empty()) return steps.back().time;
    require(!states.empty(), ErrorCode::EmptyTrajectory, "trajectory has no states");
    return states.back().time;
}

std::optional<std::size_t> FlowTrajectory::alpha_index(double alpha) const
{
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (std::abs(alphas[i] - alpha) <= 1e-12 * std::max(1.0, std::abs(alpha))) return i;
    }
    return std::nullopt;
}

double FlowTrajectory::spacetime_integral(double alpha) const
{
    require(!empty(), ErrorCode::EmptyTrajectory, "trajectory has no states");
    if (auto i = alpha_index(alpha); i && !steps.empty()) return steps.back().accumulators[*i];
    return trapezoid(snapshot_times(*this), snapshot_curvature_integrals(*this, alpha));
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y)
{
    require(t.size() == y.size(), ErrorCode::InvalidArgument, "trapezoid needs matching sample counts");
    double sum = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return sum;
}

std::vector<double> snapshot_curvature_integrals(const FlowTrajectory& traj, double alpha)
{
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        require(s.has_mesh(), ErrorCode::InvalidArgument, "snapshot without mesh data");
        out.push_back(lp_norm_pow(s.cache, s.cache.mean_curvature, alpha));
    }
    return out;
}

std::vector<double> snapshot_times(const FlowTrajectory& traj)
{
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (const auto& s : traj.states) out.push_back(s.time);
    return out;
}

} // namespace hkflow
