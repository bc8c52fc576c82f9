#include <hkflow/moser.hpp>

#include <algorithm>
#include <cmath>

namespace hkflow {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Trapezoid over [a, times.back()] with linear interpolation at a.
double window_integral(const std::vector<double>& times, const std::vector<double>& y, double a)
{
    double sum = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double t0 = times[i - 1], t1 = times[i];
        if (t1 <= a) continue;
        if (t0 >= a) {
            sum += 0.5 * (t1 - t0) * (y[i - 1] + y[i]);
        } else {
            const double ya = y[i - 1] + (y[i] - y[i - 1]) * (a - t0) / (t1 - t0);
            sum += 0.5 * (t1 - a) * (ya + y[i]);
        }
    }
    return sum;
}

void require_monotone_area(const FlowTrajectory& traj)
{
    for (std::size_t i = 1; i < traj.steps.size(); ++i) {
        require(traj.steps[i].area <= traj.steps[i - 1].area * (1.0 + 1e-12), ErrorCode::HypothesisViolated,
            "area increased at step " + std::to_string(traj.steps[i].step) + ": f(H) H < 0 somewhere");
    }
}

double start_time(const FlowTrajectory& traj)
{
    if (!traj.steps.empty()) return traj.steps.front().time;
    return traj.states.front().time;
}

struct CutoffSample
{
    Eigen::VectorXd eta;
    Eigen::VectorXd deta;
    Eigen::VectorXd lap_eta;
    Eigen::VectorXd grad_eta_sq;
};

template <typename SampleFn>
InequalityReport energy_estimate_impl(const FlowTrajectory& traj, const std::vector<ScalarField>& v_fields,
    int k, double beta, SampleFn&& sample, const char* name)
{
    require(!traj.states.empty(), ErrorCode::EmptyTrajectory, "trajectory has no snapshots");
    require(traj.states.size() >= 2, ErrorCode::InsufficientSamples, "need at least two snapshots");
    require(v_fields.size() == traj.states.size(), ErrorCode::InvalidArgument, "need one field per snapshot");
    require(beta >= 2.0, ErrorCode::BetaTooSmall, "beta must be >= 2");
    require(k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
    require_monotone_area(traj);

    const int n = traj.dimension;
    const MeasuredHypotheses measured = measure_hypotheses(traj, k);
    require(measured.C2 > 0.0, ErrorCode::HypothesisViolated, "f'(H) is not bounded below by a positive constant");

    double C0inf = 0.0;
    double v_scale = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const FlowState& s = traj.states[i];
        require(s.has_mesh() && s.cache.has_shape_operator, ErrorCode::InvalidArgument,
            "energy estimate needs snapshots with full geometry");
        const ScalarField& v = v_fields[i];
        require(v.size() == s.mesh.num_vertices() && v.allFinite(), ErrorCode::InvalidArgument, "field size mismatch");
        require(v.minCoeff() >= 0.0, ErrorCode::NegativeField, "field must be nonnegative");
        const Eigen::ArrayXd df = k == 1 ? Eigen::ArrayXd::Ones(v.size()) : (k * v.array().pow(k - 1)).eval();
        C0inf = std::max(C0inf, (df * s.cache.second_fund_norm_sq.array()).abs().maxCoeff());
        v_scale = std::max(v_scale, v.maxCoeff());
    }

    MoserInputs in;
    in.n = n;
    in.k = k;
    in.T = measured.T;
    in.volume = measured.volume;
    in.C0inf = C0inf;
    in.H_norm_accum = measured.H_norm_accum;
    in.C2 = measured.C2;
    in.q = inf;
    in.beta = beta;
    const MoserConstants c = compute_moser_constants(in);

    const double kb = k * beta;
    const double g = c.gamma;
    const double s = v_scale > 0.0 ? v_scale : 1.0;
    const double coefficient_const = (8 * beta * beta - 2 * beta + 2) / (beta * (beta - 1));

    std::vector<double> times, lhs_density, rhs_density;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const FlowState& st = traj.states[i];
        const Eigen::ArrayXd v = v_fields[i].array();
        const CutoffSample cs = sample(i);
        const Eigen::ArrayXd u = (v / s).pow(kb);
        const Eigen::ArrayXd eta = cs.eta.array();
        // f'(v) and f(v) f''(v) / f'(v) for f = x^k.
        const Eigen::ArrayXd df = k == 1 ? Eigen::ArrayXd::Ones(v.size()) : (k * v.pow(k - 1)).eval();
        const Eigen::ArrayXd ff_ratio = k == 1 ? Eigen::ArrayXd::Zero(v.size()) : ((k - 1) * v.pow(k - 1)).eval();
        const Eigen::ArrayXd bracket = eta.square() + 2 * eta * (cs.deta.array() - df * cs.lap_eta.array()) +
            (ff_ratio / beta + coefficient_const * df) * cs.grad_eta_sq.array();
        const Eigen::ArrayXd w = st.cache.area_weights.array();
        times.push_back(st.time);
        lhs_density.push_back((eta.abs().pow(g) * u.pow(g / 2) * w).sum());
        rhs_density.push_back((u * bracket.abs() * w).sum());
    }
    const double t0 = times.front();
    const double lhs_int = window_integral(times, lhs_density, t0);
    const double rhs_int = window_integral(times, rhs_density, t0);

    InequalityReport r;
    r.name = name;
    r.lhs = std::pow(s, kb) * std::pow(lhs_int, 2.0 / g);
    r.rhs = std::pow(s, kb) * c.C_full * rhs_int;
    r.constants["C_full"] = c.C_full;
    r.constants["B_tilde"] = c.B_tilde;
    r.constants["C1"] = c.C1;
    r.constants["C2"] = c.C2;
    r.constants["C0inf"] = c.C0inf;
    r.constants["gamma"] = c.gamma;
    r.factors["T"] = measured.T;
    r.factors["volume"] = measured.volume;
    r.factors["beta"] = beta;
    r.factors["lhs_integral"] = lhs_int;
    r.factors["rhs_integral"] = rhs_int;
    r.factors["field_scale"] = s;
    r.finalize();
    return r;
}

} // namespace

MeasuredHypotheses measure_hypotheses(const FlowTrajectory& traj, int k)
{
    require(!traj.empty(), ErrorCode::EmptyTrajectory, "trajectory is empty");
    MeasuredHypotheses m;
    m.T = traj.final_time() - start_time(traj);
    m.volume = traj.initial_area();
    m.min_H = inf;
    for (const auto& r : traj.steps) m.min_H = std::min(m.min_H, r.min_H);
    for (const auto& s : traj.states) {
        if (s.has_mesh()) m.min_H = std::min(m.min_H, s.cache.mean_curvature.minCoeff());
    }
    if (k == 1) {
        m.C2 = 1.0;
    } else {
        m.C2 = m.min_H > 0.0 ? k * std::pow(m.min_H, k - 1) : 0.0;
    }

    bool from_meshes = false;
    for (const auto& s : traj.states) {
        if (!s.has_mesh() || !s.cache.has_shape_operator) continue;
        from_meshes = true;
        const Eigen::ArrayXd H = s.cache.mean_curvature.array();
        const Eigen::ArrayXd df = k == 1 ? Eigen::ArrayXd::Ones(H.size()) : (k * H.abs().pow(k - 1)).eval();
        m.C0inf = std::max(m.C0inf, (df * s.cache.second_fund_norm_sq.array()).maxCoeff());
    }
    if (!from_meshes) {
        // Without shape operators fall back to |A|^2 <= H^2, valid for convex surfaces.
        for (const auto& r : traj.steps) {
            require(!(r.min_principal < 0.0), ErrorCode::HypothesisViolated,
                "mesh-free bound |A|^2 <= H^2 needs convex snapshots");
            m.C0inf = std::max(m.C0inf, k * std::pow(std::abs(r.max_H), k + 1));
        }
    }
    m.H_norm_accum = traj.spacetime_integral(double(traj.dimension + k + 1));
    return m;
}

double MoserConstants::E(double beta) const
{
    require(beta > 0.0, ErrorCode::InvalidArgument, "beta must be positive");
    const double g = gamma;
    const double log_e = (1.0 / beta) * (g / (g - 2)) * std::log(D * C_n * beta) +
        (1.0 / beta) * (2 * g / ((g - 2) * (g - 2))) * std::log(g / 2) +
        (1.0 / beta) * (g * g / ((g - 2) * (g - 2))) * std::log(4.0);
    return std::exp(log_e);
}

MoserConstants compute_moser_constants(const MoserInputs& in)
{
    require(in.beta >= 2.0, ErrorCode::BetaTooSmall, "beta = " + std::to_string(in.beta) + " < 2");
    require(in.C2 > 0.0, ErrorCode::HypothesisViolated, "C2 must be positive");
    require(in.C0inf >= 0.0 && in.H_norm_accum >= 0.0, ErrorCode::InvalidArgument,
        "C0inf and the curvature accumulator must be nonnegative");
    MoserConstants c;
    c.inputs = in;
    c.sobolev = compute_constants(in.n, in.k, in.volume, in.T);
    const double g = c.sobolev.gamma;
    c.gamma = g;
    const bool bounded = std::isinf(in.q);
    require(bounded || in.q > g / (g - 2), ErrorCode::ExponentOutOfRange,
        "q = " + std::to_string(in.q) + " must exceed gamma/(gamma-2) = " + std::to_string(g / (g - 2)));

    const double kd = in.k;
    const double nd = in.n;
    const double beta = in.beta;
    c.C0inf = in.C0inf;
    c.C0q = in.C0q ? *in.C0q : (bounded ? in.C0inf : in.C0inf * std::pow(in.volume * in.T, 1.0 / in.q));
    c.C1 = std::pow(1.0 + in.H_norm_accum, 1.0 / kd);
    c.C2 = in.C2;
    c.nu_q = bounded ? 0.0 : g / ((g - 2) * in.q - g);
    c.B = c.sobolev.B_nkT;
    c.B_tilde = c.B * std::max(std::pow(1.0 / in.C2, (kd + 1) / (2 * kd)), 1.0);

    const double core = std::pow(c.B_tilde * c.C1, 2.0 / g);
    if (bounded) {
        c.C_full = 2 * beta / (beta - 1) * std::max(1.0, c.C0inf * beta * beta / (beta - 1)) * core;
    } else {
        c.C_full = beta / (beta - 1) *
            std::max(2 * core, std::pow(2 * c.C0q * beta * beta / (beta - 1) * core, 1.0 + c.nu_q));
    }
    c.D = 8 * std::max(1.0, c.C0inf) * std::pow(c.B_tilde, 2.0 / g);
    c.C_n = std::max(1.0, 1.0 / in.T);
    c.F_final = std::pow(c.E((nd + kd + 1) / kd), 1.0 / kd) *
        std::pow(1.0 + in.H_norm_accum, 2.0 / ((g - 2) * (nd + kd + 1)));
    return c;
}

MoserConstants compute_moser_constants(int n, int k, double T, double volume, double C0inf,
    double H_norm_accum, double C2, double q, double beta)
{
    MoserInputs in;
    in.n = n;
    in.k = k;
    in.T = T;
    in.volume = volume;
    in.C0inf = C0inf;
    in.H_norm_accum = H_norm_accum;
    in.C2 = C2;
    in.q = q;
    in.beta = beta;
    return compute_moser_constants(in);
}

Cutoff Cutoff::zero()
{
    Cutoff c;
    c.identically_zero = true;
    return c;
}

double Cutoff::value(double t) const
{
    if (identically_zero || t <= t_start) return 0.0;
    if (t >= t_end) return 1.0;
    const double s = (t - t_start) / (t_end - t_start);
    return s * s * (3.0 - 2.0 * s);
}

double Cutoff::derivative(double t) const
{
    if (identically_zero || t <= t_start || t >= t_end) return 0.0;
    const double s = (t - t_start) / (t_end - t_start);
    return 6.0 * s * (1.0 - s) / (t_end - t_start);
}

double Cutoff::max_slope() const
{
    if (identically_zero) return 0.0;
    return 1.5 / (t_end - t_start);
}

const Cutoff& CutoffSchedule::cutoff(int i) const
{
    require(i >= 1 && i <= static_cast<int>(cutoffs.size()), ErrorCode::InvalidArgument,
        "cutoff index " + std::to_string(i) + " out of range");
    return cutoffs[static_cast<std::size_t>(i - 1)];
}

CutoffSchedule cutoff_schedule(double T, int i_max)
{
    require(T > 0.0, ErrorCode::InvalidArgument, "T must be positive");
    require(i_max >= 1, ErrorCode::InvalidArgument, "i_max must be >= 1");
    CutoffSchedule s;
    s.T = T;
    s.slope_bound = std::max(1.0, 1.0 / T);
    for (int i = 0; i <= i_max; ++i) s.times.push_back(0.5 * T * (1.0 - std::pow(4.0, -i)));
    for (int i = 1; i <= i_max; ++i) {
        Cutoff c;
        c.index = i;
        c.t_start = s.times[static_cast<std::size_t>(i - 1)];
        c.t_end = s.times[static_cast<std::size_t>(i)];
        s.cutoffs.push_back(c);
    }
    return s;
}

InequalityReport energy_estimate_check(const FlowTrajectory& traj, const std::vector<ScalarField>& v_fields,
    int k, double beta, const Cutoff& eta)
{
    require(!traj.states.empty(), ErrorCode::EmptyTrajectory, "trajectory has no snapshots");
    require(eta.value(traj.states.front().time) == 0.0, ErrorCode::InvalidArgument,
        "the cutoff must vanish at the initial time");
    auto sample = [&](std::size_t i) {
        const FlowState& s = traj.states[i];
        const Eigen::Index nv = s.mesh.num_vertices();
        CutoffSample cs;
        cs.eta = Eigen::VectorXd::Constant(nv, eta.value(s.time));
        cs.deta = Eigen::VectorXd::Constant(nv, eta.derivative(s.time));
        cs.lap_eta = Eigen::VectorXd::Zero(nv);
        cs.grad_eta_sq = Eigen::VectorXd::Zero(nv);
        return cs;
    };
    return energy_estimate_impl(traj, v_fields, k, beta, sample, "energy_estimate");
}

InequalityReport energy_estimate_check(const FlowTrajectory& traj, const std::vector<ScalarField>& v_fields,
    int k, double beta, const SpacetimeCutoff& eta)
{
    require(eta.values.size() == traj.states.size() && eta.time_derivatives.size() == traj.states.size(),
        ErrorCode::InvalidArgument, "need cutoff values and time derivatives on every snapshot");
    require(!traj.states.empty(), ErrorCode::EmptyTrajectory, "trajectory has no snapshots");
    require(eta.values.front().cwiseAbs().maxCoeff() == 0.0, ErrorCode::InvalidArgument,
        "the cutoff must vanish at the initial time");
    auto sample = [&](std::size_t i) {
        const FlowState& s = traj.states[i];
        CutoffSample cs;
        cs.eta = eta.values[i];
        cs.deta = eta.time_derivatives[i];
        cs.lap_eta = laplace_beltrami(s.mesh, s.cache, eta.values[i]);
        cs.grad_eta_sq = vertex_gradient_sq(s.mesh, eta.values[i]);
        return cs;
    };
    return energy_estimate_impl(traj, v_fields, k, beta, sample, "energy_estimate_spacetime");
}

MoserIteration iterate_norms(const FlowTrajectory& traj, int k, double beta0, int m_max)
{
    require(beta0 >= 2.0, ErrorCode::BetaTooSmall, "beta0 must be >= 2");
    require(m_max >= 0, ErrorCode::InvalidArgument, "m_max must be >= 0");
    require(traj.states.size() >= 2, ErrorCode::InsufficientSamples, "need at least two snapshots");
    const MeasuredHypotheses measured = measure_hypotheses(traj, k);
    require(measured.C2 > 0.0, ErrorCode::HypothesisViolated, "H must stay positive along the run");

    MoserInputs in;
    in.n = traj.dimension;
    in.k = k;
    in.T = measured.T;
    in.volume = measured.volume;
    in.C0inf = measured.C0inf;
    in.H_norm_accum = measured.H_norm_accum;
    in.C2 = measured.C2;
    in.beta = beta0;

    MoserIteration out;
    out.constants = compute_moser_constants(in);
    const double gamma_hat = out.constants.gamma / 2.0;
    const double C = out.constants.D * out.constants.C_n;
    const double C1 = out.constants.C1;
    const double t0 = start_time(traj);
    const double T = traj.final_time();
    const CutoffSchedule schedule = cutoff_schedule(measured.T, std::max(1, m_max));

    std::vector<double> times;
    double w_scale = 0.0;
    for (const auto& s : traj.states) {
        require(s.has_mesh(), ErrorCode::InvalidArgument, "iteration needs snapshots with meshes");
        times.push_back(s.time);
        w_scale = std::max(w_scale, s.cache.mean_curvature.cwiseAbs().maxCoeff());
    }
    w_scale = std::pow(w_scale, k);
    if (w_scale == 0.0) w_scale = 1.0;

    // Bound = norm_0 * exp(log_growth), so that bounds[0] equals norms[0] exactly.
    double norm0 = 0.0;
    double log_growth = 0.0;
    for (int m = 0; m <= m_max; ++m) {
        const double p = beta0 * std::pow(gamma_hat, m);
        const double start = t0 + schedule.times[static_cast<std::size_t>(m)];
        std::vector<double> y;
        for (const auto& s : traj.states) {
            const Eigen::ArrayXd w = s.cache.mean_curvature.array().abs().pow(k) / w_scale;
            y.push_back((w.pow(p) * s.cache.area_weights.array()).sum());
        }
        const double norm = w_scale * std::pow(window_integral(times, y, start), 1.0 / p);
        if (m == 0) {
            norm0 = norm;
        } else {
            const double beta_i = beta0 * std::pow(gamma_hat, m - 1);
            log_growth += (std::log(C * beta_i) + m * std::log(4.0)) / beta_i + std::log(C1) / (beta_i * gamma_hat);
        }
        out.window_starts.push_back(start);
        out.exponents.push_back(p);
        out.norms.push_back(norm);
        out.bounds.push_back(norm0 * std::exp(log_growth));
    }

    const double half = t0 + 0.5 * (T - t0);
    for (const auto& r : traj.steps) {
        if (r.time >= half) out.sup_tail = std::max(out.sup_tail, std::pow(std::abs(r.max_H), k));
    }
    for (const auto& s : traj.states) {
        if (s.time >= half) out.sup_tail = std::max(out.sup_tail, s.cache.mean_curvature.cwiseAbs().array().pow(k).maxCoeff());
    }
    return out;
}

InequalityReport sup_bound_check(const FlowTrajectory& traj, int k)
{
    require(!traj.empty(), ErrorCode::EmptyTrajectory, "trajectory is empty");
    const int n = traj.dimension;
    const double beta = double(n + k + 1) / k;
    require(beta >= 2.0, ErrorCode::HypothesisViolated,
        "beta = (n+k+1)/k = " + std::to_string(beta) + " < 2 (needs n + 1 >= k)");
    const MeasuredHypotheses measured = measure_hypotheses(traj, k);
    require(measured.min_H > 0.0, ErrorCode::HypothesisViolated, "H must stay positive along the run");

    MoserInputs in;
    in.n = n;
    in.k = k;
    in.T = measured.T;
    in.volume = measured.volume;
    in.C0inf = measured.C0inf;
    in.H_norm_accum = measured.H_norm_accum;
    in.C2 = measured.C2;
    in.beta = beta;
    const MoserConstants c = compute_moser_constants(in);

    const double t0 = start_time(traj);
    const double half = t0 + 0.5 * measured.T;
    double sup_H = 0.0;
    for (const auto& r : traj.steps) {
        if (r.time >= half) sup_H = std::max(sup_H, std::abs(r.max_H));
    }
    const double norm = std::pow(measured.H_norm_accum, 1.0 / (n + k + 1));

    InequalityReport r;
    r.name = "sup_bound";
    r.lhs = sup_H;
    r.rhs = c.F_final * norm;
    r.constants["F"] = c.F_final;
    r.constants["E"] = c.E(beta);
    r.constants["D"] = c.D;
    r.constants["B_tilde"] = c.B_tilde;
    r.constants["C2"] = c.C2;
    r.constants["C0inf"] = c.C0inf;
    r.factors["T"] = measured.T;
    r.factors["volume"] = measured.volume;
    r.factors["min_H"] = measured.min_H;
    r.factors["spacetime_H_norm"] = norm;
    r.factors["beta"] = beta;
    r.finalize();
    return r;
}

} // namespace hkflow
