#include <hkflow/sobolev.hpp>

#include <hkflow/analytic.hpp>

#include <algorithm>
#include <cmath>

namespace hkflow {

namespace {

void require_nonnegative(const ScalarField& v, Eigen::Index expected)
{
    require(v.size() == expected, ErrorCode::InvalidArgument,
        "field has " + std::to_string(v.size()) + " values for " + std::to_string(expected) + " vertices");
    require(v.allFinite(), ErrorCode::InvalidArgument, "field has non-finite values");
    require(v.size() == 0 || v.minCoeff() >= 0.0, ErrorCode::NegativeField, "field must be nonnegative");
}

void require_surface_dimension(int n)
{
    require(n == Hypersurface::dimension, ErrorCode::InvalidArgument,
        "mesh checks need n = 2, got n = " + std::to_string(n));
}

} // namespace

double SobolevConstants::mu(double s) const
{
    const double nd = n, kd = k;
    return nd / (kd * nd - (kd + 1)) * (kd * (nd - 1) * (s - 1) + 1) / (nd - (nd - 1) * s);
}

double michael_simon_constant(int n)
{
    require(n >= 2, ErrorCode::HypothesisViolated, "dimension must be >= 2");
    return std::pow(4.0, n + 1) / std::pow(unit_sphere_area(n), 1.0 / n);
}

SobolevConstants compute_constants(int n, int k, double volume, double T)
{
    require(n >= 2 && k >= 1, ErrorCode::HypothesisViolated, "need n >= 2 and k >= 1");
    require(k * n > k + 1, ErrorCode::HypothesisViolated,
        "kn = " + std::to_string(k * n) + " must exceed k+1 = " + std::to_string(k + 1));
    require(k >= 2 || n > 2, ErrorCode::HypothesisViolated, "k = 1 requires n > 2");
    require(volume > 0.0 && T > 0.0, ErrorCode::InvalidArgument, "volume and T must be positive");

    const double nd = n, kd = k;
    const double denom = kd * nd - (kd + 1);
    SobolevConstants c;
    c.n = n;
    c.k = k;
    c.volume = volume;
    c.T = T;
    c.omega_n = unit_sphere_area(n);
    c.Q_k = kd * nd / denom;
    c.gamma = 2.0 + (kd + 1) * (kd + 1) / (kd * kd * nd);
    c.c_n = michael_simon_constant(n);
    c.c_nk = c.c_n * (kd + 1) * (nd - 1) / denom;
    c.a_nk = std::pow(c.c_nk, denom / (nd - 1)) * std::pow(2.0, (kd * nd - kd - nd) / (nd - 1));
    c.A_nk = std::pow(2.0, (nd - 1) * (kd + 1) * (nd + kd + 1) / denom) * std::pow(2.0 * c.c_nk, nd + kd + 1);
    c.A_hat_nk = c.A_nk * std::pow(volume, (kd - 1) / (2 * (kd + 1)));
    c.A_tilde_nk = std::pow(c.A_nk, 1.0 / kd) * std::pow(2 * kd / (kd + 1), (kd + 1) / kd);
    c.B_nkT = c.A_tilde_nk * std::pow(volume, (kd - 1) * (kd + 1) / (2 * kd * kd * nd)) *
        std::max(std::pow(T, (kd - 1) / kd), std::pow(T, (kd - 1) / (2 * kd)));
    return c;
}

InequalityReport michael_simon_check(
    const Hypersurface& mesh, const GeometryCache<double>& cache, const ScalarField& w, int n)
{
    require_surface_dimension(n);
    require_nonnegative(w, mesh.num_vertices());
    const double p = double(n) / (n - 1);
    const double c_n = michael_simon_constant(n);
    const double grad_l1 = gradient_lp_norm(mesh, w, 1.0);
    const double curvature_term = (cache.mean_curvature.cwiseAbs().array() * w.array() * cache.area_weights.array()).sum();

    InequalityReport r;
    r.name = "michael_simon";
    r.lhs = lp_norm(cache, w, p);
    r.rhs = c_n * (grad_l1 + curvature_term);
    r.constants["c_n"] = c_n;
    r.factors["norm_w_n_over_n_minus_1"] = r.lhs;
    r.factors["int_grad_w"] = grad_l1;
    r.factors["int_abs_H_w"] = curvature_term;
    r.finalize();
    return r;
}

NonlinearSobolevReports nonlinear_sobolev_check(
    const Hypersurface& mesh, const GeometryCache<double>& cache, const ScalarField& v, int n, int k)
{
    require_surface_dimension(n);
    require_nonnegative(v, mesh.num_vertices());
    const double area = cache.total_area;
    const SobolevConstants c = compute_constants(n, k, area, 1.0);
    const double kd = k;
    const double q = (kd + 1) / kd;

    const double lhs_norm = lp_norm(cache, v, q * c.Q_k);
    const double H_pow = lp_norm_pow(cache, cache.mean_curvature, double(n + k + 1));
    const double grad_q = gradient_lp_norm(mesh, v, q);
    const double v_q = lp_norm(cache, v, q);
    const double grad_2 = gradient_lp_norm(mesh, v, 2.0);
    const double v_2 = lp_norm(cache, v, 2.0);

    NonlinearSobolevReports out;
    auto fill = [&](InequalityReport& r, const char* name, double constant, const char* constant_name,
                    double grad, double vn, const char* suffix) {
        r.name = name;
        r.lhs = std::pow(lhs_norm, kd + 1);
        r.rhs = constant * (std::pow(grad, kd + 1) + H_pow * std::pow(vn, kd + 1));
        r.constants[constant_name] = constant;
        r.constants["Q_k"] = c.Q_k;
        r.constants["c_nk"] = c.c_nk;
        r.factors["norm_v_lhs"] = lhs_norm;
        r.factors[std::string("norm_grad_v_") + suffix] = grad;
        r.factors[std::string("norm_v_") + suffix] = vn;
        r.factors["H_norm_pow"] = H_pow;
        r.factors["volume"] = area;
        r.finalize();
    };
    fill(out.lp_form, "nonlinear_sobolev_lp", c.A_nk, "A_nk", grad_q, v_q, "lq");
    fill(out.l2_form, "nonlinear_sobolev_l2", c.A_hat_nk, "A_hat_nk", grad_2, v_2, "l2");
    return out;
}

InequalityReport gradient_form_check(
    const Hypersurface& mesh, const GeometryCache<double>& cache, const ScalarField& v, int n, int k)
{
    require_surface_dimension(n);
    require_nonnegative(v, mesh.num_vertices());
    const SobolevConstants c = compute_constants(n, k, cache.total_area, 1.0);
    const double kd = k;
    const double lhs_norm = lp_norm(cache, v, 2.0 * c.Q_k);
    const double v_2 = lp_norm(cache, v, 2.0);
    const double grad_2 = gradient_lp_norm(mesh, v, 2.0);
    const double H_pow = lp_norm_pow(cache, cache.mean_curvature, double(n + k + 1));

    InequalityReport r;
    r.name = "gradient_form";
    r.lhs = lhs_norm * lhs_norm;
    r.rhs = c.A_tilde_nk * (std::pow(v_2, (kd - 1) / kd) * std::pow(grad_2, (kd + 1) / kd) +
                               std::pow(H_pow, 1.0 / kd) * v_2 * v_2);
    r.constants["A_tilde_nk"] = c.A_tilde_nk;
    r.constants["Q_k"] = c.Q_k;
    r.factors["norm_v_2Q"] = lhs_norm;
    r.factors["norm_v_l2"] = v_2;
    r.factors["norm_grad_v_l2"] = grad_2;
    r.factors["H_norm_pow"] = H_pow;
    r.finalize();
    return r;
}

InequalityReport spacetime_sobolev_check(
    const FlowTrajectory& traj, const std::vector<ScalarField>& v_fields, int n, int k)
{
    require(!traj.states.empty(), ErrorCode::EmptyTrajectory, "trajectory has no snapshots");
    require(n == traj.dimension, ErrorCode::InvalidArgument, "n differs from the trajectory dimension");
    require(n >= 2 && k >= 2, ErrorCode::HypothesisViolated, "the space-time inequality needs n, k >= 2");
    require(v_fields.size() == traj.states.size(), ErrorCode::InvalidArgument, "need one field per snapshot");
    require(traj.states.size() >= 2, ErrorCode::InsufficientSamples, "need at least two snapshots");

    for (std::size_t i = 1; i < traj.steps.size(); ++i) {
        const double prev = traj.steps[i - 1].area, cur = traj.steps[i].area;
        require(cur <= prev * (1.0 + 1e-12), ErrorCode::HypothesisViolated,
            "area increased at step " + std::to_string(traj.steps[i].step) + ": f(H) H < 0 somewhere");
    }

    const double volume = traj.initial_area();
    const double T = traj.states.back().time - traj.states.front().time;
    const SobolevConstants c = compute_constants(n, k, volume, T);
    const double kd = k, nd = n;

    std::vector<double> times, v_gamma, grad_sq;
    double max_v2 = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const FlowState& s = traj.states[i];
        require(s.has_mesh(), ErrorCode::InvalidArgument, "snapshot without mesh data");
        require_nonnegative(v_fields[i], s.mesh.num_vertices());
        times.push_back(s.time);
        v_gamma.push_back(lp_norm_pow(s.cache, v_fields[i], c.gamma));
        const double g = gradient_lp_norm(s.mesh, v_fields[i], 2.0);
        grad_sq.push_back(g * g);
        max_v2 = std::max(max_v2, lp_norm(s.cache, v_fields[i], 2.0));
    }
    const double lhs = trapezoid(times, v_gamma);
    const double grad_norm = std::sqrt(trapezoid(times, grad_sq));
    const double H_pow = traj.spacetime_integral(double(n + k + 1));

    InequalityReport r;
    r.name = "spacetime_sobolev";
    r.lhs = lhs;
    r.rhs = c.B_nkT * std::pow(max_v2, (kd + 1) * (kd + 1) / (kd * kd * nd) + (kd - 1) / kd) *
        (std::pow(grad_norm, (kd + 1) / kd) + std::pow(max_v2, (kd + 1) / kd) * std::pow(H_pow, 1.0 / kd));
    r.constants["B_nkT"] = c.B_nkT;
    r.constants["gamma"] = c.gamma;
    r.constants["A_tilde_nk"] = c.A_tilde_nk;
    r.factors["volume"] = volume;
    r.factors["T"] = T;
    r.factors["max_norm_v_l2"] = max_v2;
    r.factors["spacetime_norm_grad_v_l2"] = grad_norm;
    r.factors["spacetime_H_norm_pow"] = H_pow;
    r.finalize();
    return r;
}

} // namespace hkflow
