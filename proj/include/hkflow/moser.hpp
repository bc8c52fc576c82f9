#pragma once

#include <hkflow/report.hpp>
#include <hkflow/sobolev.hpp>
#include <hkflow/trajectory.hpp>

#include <limits>
#include <optional>
#include <vector>

namespace hkflow {

struct MoserInputs
{
    int n = 2;
    int k = 2;
    double T = 1.0;
    double volume = 1.0;
    /// sup |f'(v) G|
    double C0inf = 0.0;
    /// int int |H|^(n+k+1) dmu dt
    double H_norm_accum = 0.0;
    /// Lower bound on f'(v).
    double C2 = 1.0;
    /// Integrability exponent of f'(v) G; infinity selects the bounded form.
    double q = std::numeric_limits<double>::infinity();
    /// ||f'(v) G||_{L^q}; defaults to the Hoelder bound C0inf (volume T)^(1/q).
    std::optional<double> C0q;
    double beta = 2.0;
};

/// Constants of the energy estimate, the iteration and the curvature sup bound.
struct MoserConstants
{
    MoserInputs inputs;
    SobolevConstants sobolev;
    double gamma = 0.0;
    double C0q = 0.0;
    double C0inf = 0.0;
    /// (1 + H_norm_accum)^(1/k)
    double C1 = 1.0;
    double C2 = 1.0;
    /// gamma / ((gamma - 2) q - gamma); 0 for q = infinity
    double nu_q = 0.0;
    double B = 0.0;
    /// B * max((1/C2)^((k+1)/(2k)), 1)
    double B_tilde = 0.0;
    /// Energy-estimate constant at (C0q, C1, beta, q).
    double C_full = 0.0;
    /// 8 max(1, C0inf) B_tilde^(2/gamma)
    double D = 0.0;
    /// Cutoff slope constant max(1, 1/T).
    double C_n = 1.0;
    /// E((n+k+1)/k)^(1/k) (1 + H_norm_accum)^(2/((gamma-2)(n+k+1)))
    double F_final = 0.0;

    /// Iteration constant E(beta); tends to 1 as beta grows.
    double E(double beta) const;
};

MoserConstants compute_moser_constants(const MoserInputs& inputs);

MoserConstants compute_moser_constants(int n, int k, double T, double volume, double C0inf,
    double H_norm_accum, double C2, double q, double beta);

/// Smoothstep time cutoff: 0 before t_{i-1}, 1 after t_i, s^2 (3 - 2s) in between.
struct Cutoff
{
    int index = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    bool identically_zero = false;

    static Cutoff zero();

    double value(double t) const;
    double derivative(double t) const;
    /// 1.5 / (t_end - t_start)
    double max_slope() const;
};

struct CutoffSchedule
{
    double T = 0.0;
    /// t_0 .. t_imax with t_i = (T/2)(1 - 4^-i)
    std::vector<double> times;
    /// cutoffs[i-1] ramps on [t_{i-1}, t_i]
    std::vector<Cutoff> cutoffs;
    double slope_bound = 1.0;

    const Cutoff& cutoff(int i) const;
};

CutoffSchedule cutoff_schedule(double T, int i_max);

/// Space-time cutoff sampled on the snapshots: eta and d(eta)/dt per state.
struct SpacetimeCutoff
{
    std::vector<ScalarField> values;
    std::vector<ScalarField> time_derivatives;
};

/// Energy estimate for f = x^k with a time-only cutoff. G = |A|^2, q = infinity,
/// C2 = k (min H)^(k-1) measured on the trajectory.
InequalityReport energy_estimate_check(const FlowTrajectory& traj, const std::vector<ScalarField>& v_fields,
    int k, double beta, const Cutoff& eta);

/// Same estimate with a general cutoff, including the Laplacian and gradient terms.
InequalityReport energy_estimate_check(const FlowTrajectory& traj, const std::vector<ScalarField>& v_fields,
    int k, double beta, const SpacetimeCutoff& eta);

struct MoserIteration
{
    /// Window starts t_m; window m is [t_m, T].
    std::vector<double> window_starts;
    /// beta0 (gamma/2)^m
    std::vector<double> exponents;
    /// ||H^k||_{L^p(M x I_m)}
    std::vector<double> norms;
    /// Iterated bound for each entry; bounds[0] == norms[0].
    std::vector<double> bounds;
    /// sup of H^k over [T/2, T]
    double sup_tail = 0.0;
    MoserConstants constants;
};

MoserIteration iterate_norms(const FlowTrajectory& traj, int k, double beta0, int m_max);

/// sup_{[T/2,T]} H <= F ||H||_{L^(n+k+1)(M x [0,T])}.
InequalityReport sup_bound_check(const FlowTrajectory& traj, int k);

/// Quantities measured along a trajectory that feed the constants.
struct MeasuredHypotheses
{
    double T = 0.0;
    double volume = 0.0;
    double min_H = 0.0;
    double C2 = 0.0;
    double C0inf = 0.0;
    double H_norm_accum = 0.0;
};

MeasuredHypotheses measure_hypotheses(const FlowTrajectory& traj, int k);

} // namespace hkflow
