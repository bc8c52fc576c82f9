#pragma once

#include <hkflow/trajectory.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace hkflow {

/// Area of the unit n-sphere in R^(n+1): 2 pi^((n+1)/2) / Gamma((n+1)/2).
double unit_sphere_area(int n);

/// Round n-sphere of initial radius r0 moving under dF/dt = -H^k nu.
struct SphereSolution
{
    int n = 2;
    int k = 2;
    double r0 = 1.0;

    void validate() const;
    /// r0^(k+1) / ((k+1) n^k)
    double tmax() const;
};

/// r(t) = r0 [1 - (k+1) n^k t / r0^(k+1)]^(1/(k+1)); throws TimeBeyondTmax outside [0, T_max).
double sphere_radius(const SphereSolution& sol, double t);
double sphere_mean_curvature(const SphereSolution& sol, double t);

/// Space-time norm of H over [0, T]. A divergent integral is reported as such, not as inf.
struct SpacetimeNorm
{
    bool divergent = false;
    /// int_0^T int H^alpha dmu dt (meaningless when divergent)
    double power = 0.0;
    double norm = 0.0;

    bool finite() const { return !divergent; }
};

SpacetimeNorm sphere_spacetime_norm(const SphereSolution& sol, double alpha, double T);

/// Parabolic-type rescaling x -> Q^beta x, t -> Q^gamma_exp t.
struct RescaleParams
{
    double Q = 1.0;
    double beta = 1.0;
    double gamma_exp = 1.0;

    /// beta = 1, gamma_exp = k + 1: the scaling that leaves the L^(n+k+1) space-time norm invariant.
    static RescaleParams parabolic(double Q, int k);
    void validate() const;
};

/// Scales positions, times, curvature, areas and accumulators of every record and state.
FlowTrajectory rescale_trajectory(const FlowTrajectory& traj, const RescaleParams& params, int k);

/// |f(x) - Q^(k beta) f(x / Q^beta)| for f(x) = x^k.
double functional_equation_residual(int k, double beta, double Q, double x);

/// Same residual for an arbitrary f.
double functional_equation_residual(
    const std::function<double(double)>& f, int k, double beta, double Q, double x);

/// Mesh-free (or mesh-backed when n = 2) trajectory sampled from the exact sphere solution.
/// Records carry exact H, areas and accumulators; states hold scaled copies of unit_mesh
/// when one is given.
FlowTrajectory sphere_trajectory(
    const SphereSolution& sol,
    const std::vector<double>& times,
    const std::vector<double>& alphas,
    const Hypersurface* unit_mesh = nullptr,
    bool terminated_by_blowup = true);

} // namespace hkflow
