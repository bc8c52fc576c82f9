#include <hkflow/analytic.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hkflow {

double unit_sphere_area(int n)
{
    require(n >= 1, ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
    const double h = 0.5 * (n + 1);
    return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

void SphereSolution::validate() const
{
    require(n >= 2, ErrorCode::InvalidArgument, "sphere dimension n must be >= 2");
    require(k >= 1, ErrorCode::InvalidArgument, "flow power k must be >= 1");
    require(r0 > 0.0 && std::isfinite(r0), ErrorCode::InvalidArgument, "initial radius must be positive");
}

double SphereSolution::tmax() const
{
    validate();
    return std::pow(r0, k + 1) / ((k + 1) * std::pow(double(n), k));
}

double sphere_radius(const SphereSolution& sol, double t)
{
    const double tm = sol.tmax();
    require(t >= 0.0 && t < tm, ErrorCode::TimeBeyondTmax,
        "t = " + std::to_string(t) + " outside [0, T_max = " + std::to_string(tm) + ")");
    return sol.r0 * std::pow(1.0 - t / tm, 1.0 / (sol.k + 1));
}

double sphere_mean_curvature(const SphereSolution& sol, double t)
{
    return sol.n / sphere_radius(sol, t);
}

namespace {

/// int_0^T int H^alpha dmu dt = n^alpha omega_n int_0^T (c (Tm - t))^e dt with
/// r(t)^(k+1) = c (Tm - t), c = (k+1) n^k and e = (n - alpha)/(k+1).
double spacetime_power(const SphereSolution& sol, double alpha, double T)
{
    const double tm = sol.tmax();
    const double c = (sol.k + 1) * std::pow(double(sol.n), sol.k);
    const double e = (sol.n - alpha) / (sol.k + 1);
    const double scale = std::pow(double(sol.n), alpha) * unit_sphere_area(sol.n);
    const double rest = tm - T;
    double integral;
    if (std::abs(e + 1.0) < 1e-14) {
        integral = std::log(tm / rest) / c;
    } else {
        const double tail = rest > 0.0 ? std::pow(rest, e + 1.0) : 0.0;
        integral = std::pow(c, e) * (std::pow(tm, e + 1.0) - tail) / (e + 1.0);
    }
    return scale * integral;
}

} // namespace

SpacetimeNorm sphere_spacetime_norm(const SphereSolution& sol, double alpha, double T)
{
    require(alpha >= 1.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be >= 1");
    const double tm = sol.tmax();
    require(T > 0.0, ErrorCode::InvalidArgument, "T must be positive");
    require(T <= tm * (1.0 + 1e-15), ErrorCode::TimeBeyondTmax, "T beyond T_max");
    SpacetimeNorm out;
    if (T >= tm && alpha >= sol.n + sol.k + 1) {
        out.divergent = true;
        out.power = std::numeric_limits<double>::quiet_NaN();
        out.norm = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.power = spacetime_power(sol, alpha, std::min(T, tm));
    out.norm = std::pow(out.power, 1.0 / alpha);
    return out;
}

RescaleParams RescaleParams::parabolic(double Q, int k)
{
    return RescaleParams{Q, 1.0, double(k + 1)};
}

void RescaleParams::validate() const
{
    require(Q > 0.0 && std::isfinite(Q), ErrorCode::InvalidArgument, "Q must be positive");
    require(beta > 0.0 && gamma_exp > 0.0, ErrorCode::InvalidArgument, "rescaling exponents must be positive");
}

FlowTrajectory rescale_trajectory(const FlowTrajectory& traj, const RescaleParams& params, int k)
{
    params.validate();
    require(!traj.empty(), ErrorCode::EmptyTrajectory, "cannot rescale an empty trajectory");
    const double n = traj.dimension;
    const double space = std::pow(params.Q, params.beta);
    const double time = std::pow(params.Q, params.gamma_exp);
    const double curvature = 1.0 / space;
    const double area = std::pow(space, n);

    FlowTrajectory out = traj;
    for (auto& r : out.steps) {
        r.time *= time;
        r.dt *= time;
        r.min_H *= curvature;
        r.max_H *= curvature;
        r.max_H_pow *= std::pow(curvature, k + 1);
        r.area *= area;
        r.min_principal *= curvature;
        for (std::size_t a = 0; a < out.alphas.size(); ++a) {
            r.accumulators[a] *= std::pow(params.Q, (n - out.alphas[a]) * params.beta + params.gamma_exp);
        }
    }
    for (auto& s : out.states) {
        s.time *= time;
        s.mesh.vertices *= space;
        auto& c = s.cache;
        c.mean_curvature *= curvature;
        c.mean_curvature_vector *= curvature;
        c.area_weights *= area;
        c.voronoi_areas *= area;
        c.total_area *= area;
        if (c.has_shape_operator) {
            c.shape_operator *= curvature;
            c.principal_curvatures *= curvature;
            c.second_fund_norm_sq *= curvature * curvature;
        }
    }
    return out;
}

double functional_equation_residual(int k, double beta, double Q, double x)
{
    return functional_equation_residual([k](double y) { return std::pow(y, k); }, k, beta, Q, x);
}

double functional_equation_residual(
    const std::function<double(double)>& f, int k, double beta, double Q, double x)
{
    require(x > 0.0, ErrorCode::InvalidArgument, "x must be positive");
    require(Q > 0.0, ErrorCode::InvalidArgument, "Q must be positive");
    const double s = std::pow(Q, beta);
    return std::abs(f(x) - std::pow(Q, k * beta) * f(x / s));
}

FlowTrajectory sphere_trajectory(
    const SphereSolution& sol,
    const std::vector<double>& times,
    const std::vector<double>& alphas,
    const Hypersurface* unit_mesh,
    bool terminated_by_blowup)
{
    sol.validate();
    require(!times.empty(), ErrorCode::EmptyTrajectory, "no sample times");
    require(!unit_mesh || sol.n == Hypersurface::dimension, ErrorCode::InvalidArgument,
        "mesh-backed sphere trajectories need n = 2");
    FlowTrajectory traj;
    traj.dimension = sol.n;
    traj.k = sol.k;
    traj.alphas = alphas;
    traj.termination = terminated_by_blowup ? Termination::BlowupThreshold : Termination::ReachedT;

    const Topology topo = unit_mesh ? build_topology(*unit_mesh) : Topology{};
    const double omega = unit_sphere_area(sol.n);
    double previous = -1.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        require(t > previous, ErrorCode::InvalidArgument, "sample times must increase strictly");
        const double r = sphere_radius(sol, t);
        const double H = sol.n / r;
        StepRecord rec;
        rec.step = i;
        rec.time = t;
        rec.dt = i == 0 ? 0.0 : t - previous;
        rec.min_H = rec.max_H = H;
        rec.max_H_pow = std::pow(H, sol.k + 1);
        rec.area = omega * std::pow(r, sol.n);
        rec.min_quality = 1.0;
        rec.min_principal = 1.0 / r;
        for (double a : alphas) rec.accumulators.push_back(t > 0.0 ? sphere_spacetime_norm(sol, a, t).power : 0.0);
        traj.steps.push_back(std::move(rec));

        FlowState s;
        s.time = t;
        s.step = i;
        if (unit_mesh) {
            s.mesh = scaled(*unit_mesh, r);
            s.cache = build_geometry(s.mesh, topo, GeometryLevel::Full);
        }
        traj.states.push_back(std::move(s));
        previous = t;
    }
    return traj;
}

} // namespace hkflow
