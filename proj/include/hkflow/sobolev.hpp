#pragma once

#include <hkflow/geometry.hpp>
#include <hkflow/report.hpp>
#include <hkflow/trajectory.hpp>

#include <vector>

namespace hkflow {

/// Explicit constants of the Michael-Simon inequality and its nonlinear versions.
struct SobolevConstants
{
    int n = 2;
    int k = 2;
    double volume = 0.0;
    double T = 0.0;

    double omega_n = 0.0;
    /// kn / (kn - (k+1))
    double Q_k = 0.0;
    /// 2 + (k+1)^2 / (k^2 n), the space-time exponent
    double gamma = 0.0;
    /// 4^(n+1) / omega_n^(1/n)
    double c_n = 0.0;
    double c_nk = 0.0;
    double a_nk = 0.0;
    double A_nk = 0.0;
    /// A_nk * volume^((k-1)/(2(k+1)))
    double A_hat_nk = 0.0;
    /// A_nk^(1/k) (2k/(k+1))^((k+1)/k)
    double A_tilde_nk = 0.0;
    /// A_tilde_nk * volume^((k-1)(k+1)/(2k^2 n)) * max(T^((k-1)/k), T^((k-1)/(2k)))
    double B_nkT = 0.0;

    /// Interpolation exponent for 1 < s < n/(n-1).
    double mu(double s) const;
};

/// Requires kn > k+1 and (k >= 2 or n > 2).
SobolevConstants compute_constants(int n, int k, double volume, double T);

/// Michael-Simon constant alone; valid for every n >= 2.
double michael_simon_constant(int n);

/// (int w^(n/(n-1)))^((n-1)/n) <= c_n int (|grad w| + |H| w).
InequalityReport michael_simon_check(
    const Hypersurface& mesh, const GeometryCache<double>& cache, const ScalarField& w, int n);

struct NonlinearSobolevReports
{
    /// Norms L^((k+1)/k) on the right, constant A_nk.
    InequalityReport lp_form;
    /// Norms L^2 on the right, constant A_hat_nk.
    InequalityReport l2_form;
};

NonlinearSobolevReports nonlinear_sobolev_check(
    const Hypersurface& mesh, const GeometryCache<double>& cache, const ScalarField& v, int n, int k);

/// ||v||^2_{2Q_k} <= A_tilde (||v||_2^((k-1)/k) ||grad v||_2^((k+1)/k) + (||H||^(n+k+1)_(n+k+1))^(1/k) ||v||_2^2).
InequalityReport gradient_form_check(
    const Hypersurface& mesh, const GeometryCache<double>& cache, const ScalarField& v, int n, int k);

/// Space-time inequality over the stored snapshots; v_fields holds one field per state.
/// Time integrals use the trapezoid rule over snapshot times.
InequalityReport spacetime_sobolev_check(
    const FlowTrajectory& traj, const std::vector<ScalarField>& v_fields, int n, int k);

} // namespace hkflow
