#include "support.hpp"

using namespace hkflow;
using namespace hkflow::testing;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

constexpr double inf = std::numeric_limits<double>::infinity();

/// The same icosahedron at every time in [0, T]; all vertices are equivalent so H is constant.
FlowTrajectory frozen_icosahedron(double T, int samples)
{
    FlowTrajectory traj;
    traj.k = 2;
    const Hypersurface mesh = icosphere<double>(0);
    for (int i = 0; i < samples; ++i) {
        FlowState s = make_state(mesh, T * i / (samples - 1));
        s.step = static_cast<std::size_t>(i);
        StepRecord r;
        r.step = s.step;
        r.time = s.time;
        r.min_H = s.cache.mean_curvature.minCoeff();
        r.max_H = s.cache.mean_curvature.maxCoeff();
        r.max_H_pow = std::pow(r.max_H, 3);
        r.area = s.cache.total_area;
        r.min_quality = 1.0;
        traj.steps.push_back(r);
        traj.states.push_back(std::move(s));
    }
    return traj;
}

const FlowTrajectory& sphere_to_09_tmax()
{
    static const FlowTrajectory traj = sphere_run_until(3, 0.9 / 12.0, 10, {5.0});
    return traj;
}

} // namespace

TEST_SUITE("moser")
{
    TEST_CASE("exponent nu at q = 10")
    {
        const auto c = compute_moser_constants(2, 2, 1.0, 4 * pi, 0.5, 0.0, 1.0, 10.0, 2.0);
        CHECK(c.gamma == 3.125);
        CHECK(c.nu_q == doctest::Approx(3.125 / (1.125 * 10 - 3.125)).epsilon(1e-14));
        CHECK(c.nu_q == doctest::Approx(0.384615).epsilon(1e-6));
        CHECK(compute_moser_constants(2, 2, 1.0, 4 * pi, 0.5, 0.0, 1.0, inf, 2.0).nu_q == 0.0);
    }

    TEST_CASE("D and C1 from their formulas")
    {
        for (double C0 : {0.0, 0.3, 1.0}) {
            const auto c = compute_moser_constants(2, 2, 0.5, 4 * pi, C0, 0.0, 1.0, inf, 2.0);
            CHECK(rel_err(c.D, 8 * std::pow(c.B_tilde, 2 / c.gamma)) < 1e-14);
            CHECK(c.C1 == 1.0);
        }
        const auto big = compute_moser_constants(2, 2, 0.5, 4 * pi, 7.0, 24.0, 1.0, inf, 2.0);
        CHECK(rel_err(big.D, 56 * std::pow(big.B_tilde, 2 / big.gamma)) < 1e-14);
        CHECK(rel_err(big.C1, 5.0) < 1e-14);
    }

    TEST_CASE("B_tilde corrects B by C2")
    {
        const auto strong = compute_moser_constants(2, 2, 0.5, 4 * pi, 1.0, 0.0, 3.0, inf, 2.0);
        CHECK(strong.B_tilde == strong.B);
        const auto weak = compute_moser_constants(2, 2, 0.5, 4 * pi, 1.0, 0.0, 0.25, inf, 2.0);
        CHECK(rel_err(weak.B_tilde, weak.B * std::pow(4.0, 0.75)) < 1e-14);
        CHECK(weak.B == compute_constants(2, 2, 4 * pi, 0.5).B_nkT);
    }

    TEST_CASE("energy constant from its display")
    {
        const double beta = 3.0, C0 = 2.0, C2 = 1.0;
        const auto c = compute_moser_constants(2, 2, 0.5, 4 * pi, C0, 3.0, C2, 20.0, beta);
        const double core = std::pow(c.B_tilde * c.C1, 2 / c.gamma);
        const double expected = beta / (beta - 1) *
            std::max(2 * core, std::pow(2 * c.C0q * beta * beta / (beta - 1) * core, 1 + c.nu_q));
        CHECK(rel_err(c.C_full, expected) < 1e-13);
        CHECK(rel_err(c.C0q, C0 * std::pow(4 * pi * 0.5, 1.0 / 20)) < 1e-14);
    }

    TEST_CASE("finite-q constant converges to the bounded form")
    {
        const auto bounded = compute_moser_constants(2, 2, 0.5, 4 * pi, 2.0, 3.0, 1.0, inf, 2.5);
        double prev = inf;
        for (double q : {1e2, 1e4, 1e6}) {
            const auto c = compute_moser_constants(2, 2, 0.5, 4 * pi, 2.0, 3.0, 1.0, q, 2.5);
            const double err = rel_err(c.C_full, bounded.C_full);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 1e-4);
    }

    TEST_CASE("E(beta) decreases to 1")
    {
        const auto c = compute_moser_constants(2, 2, 0.5, 4 * pi, 1.0, 0.0, 1.0, inf, 2.0);
        double prev = inf;
        for (double beta : {2.0, 10.0, 100.0, 1000.0}) {
            const double e = c.E(beta);
            CHECK(std::isfinite(e));
            CHECK(e > 1.0);
            CHECK(e < prev);
            prev = e;
        }
        CHECK(c.E(1e9) == doctest::Approx(1.0).epsilon(1e-5));
        // Exponents of E by direct evaluation at beta = 2.
        const double g = c.gamma;
        const double expected = std::pow(c.D * c.C_n * 2, 0.5 * g / (g - 2)) *
            std::pow(g / 2, 0.5 * 2 * g / ((g - 2) * (g - 2))) * std::pow(4.0, 0.5 * g * g / ((g - 2) * (g - 2)));
        CHECK(rel_err(c.E(2.0), expected) < 1e-12);
    }

    TEST_CASE("parameter errors")
    {
        CHECK(code_of([] { compute_moser_constants(2, 2, 1, 1, 1, 0, 1, 2.5, 2.0); }) == ErrorCode::ExponentOutOfRange);
        // gamma/(gamma-2) = 25/9 sits exactly on the boundary.
        CHECK(code_of([] { compute_moser_constants(2, 2, 1, 1, 1, 0, 1, 25.0 / 9.0, 2.0); }) == ErrorCode::ExponentOutOfRange);
        CHECK(code_of([] { compute_moser_constants(2, 2, 1, 1, 1, 0, 1, inf, 1.9); }) == ErrorCode::BetaTooSmall);
        CHECK(code_of([] { compute_moser_constants(2, 2, 1, 1, 1, 0, 0.0, inf, 2.0); }) == ErrorCode::HypothesisViolated);
        CHECK(compute_moser_constants(2, 2, 1, 1, 1, 0, 1, 2.8, 2.0).nu_q > 0.0);
    }

    TEST_CASE("cutoff schedule examples")
    {
        const CutoffSchedule s = cutoff_schedule(1.0, 3);
        REQUIRE(s.times.size() == 4);
        CHECK(s.times[0] == 0.0);
        CHECK(s.times[1] == 3.0 / 8.0);
        CHECK(s.times[2] == 15.0 / 32.0);
        CHECK(s.slope_bound == 1.0);
        CHECK(s.cutoff(1).max_slope() == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(cutoff_schedule(0.25, 1).slope_bound == 4.0);
        CHECK(cutoff_schedule(1.0, 40).times.back() == doctest::Approx(0.5).epsilon(1e-15));
    }

    TEST_CASE("cutoff slopes and shape")
    {
        for (double T : {0.1, 1.0, 3.0}) {
            const CutoffSchedule s = cutoff_schedule(T, 6);
            for (int i = 1; i <= 6; ++i) {
                const Cutoff& eta = s.cutoff(i);
                CAPTURE(T);
                CAPTURE(i);
                CHECK(rel_err(eta.max_slope(), std::pow(4.0, i) / T) < 1e-12);
                CHECK(eta.max_slope() <= s.slope_bound * std::pow(4.0, i) * (1 + 1e-12));
                CHECK(eta.value(s.times[i - 1]) == 0.0);
                CHECK(eta.value(0.0) == 0.0);
                CHECK(eta.value(s.times[i]) == 1.0);
                CHECK(eta.value(T) == 1.0);
                // Sampled slope stays under the bound and peaks at the midpoint.
                double sampled = 0.0;
                for (int j = 0; j <= 1000; ++j) {
                    const double t = T * j / 1000.0;
                    const double v = eta.value(t);
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                    sampled = std::max(sampled, std::abs(eta.derivative(t)));
                }
                CHECK(sampled <= eta.max_slope() * (1 + 1e-12));
                const double mid = 0.5 * (s.times[i - 1] + s.times[i]);
                CHECK(rel_err(eta.derivative(mid), eta.max_slope()) < 1e-12);
                // Finite difference against the analytic derivative.
                const double h = 1e-7 * T;
                const double t = s.times[i - 1] + 0.3 * (s.times[i] - s.times[i - 1]);
                CHECK(std::abs((eta.value(t + h) - eta.value(t - h)) / (2 * h) - eta.derivative(t)) < 1e-5 * eta.max_slope());
            }
        }
    }

    TEST_CASE("energy estimate on the sphere with v = H")
    {
        const FlowTrajectory& traj = sphere_to_09_tmax();
        std::vector<ScalarField> H, zero;
        for (const auto& s : traj.states) {
            H.push_back(s.cache.mean_curvature);
            zero.push_back(constant(s.mesh, 0.0));
        }
        const double T = traj.final_time();
        const Cutoff eta = cutoff_schedule(T, 1).cutoff(1);
        const InequalityReport r = energy_estimate_check(traj, H, 2, 2.0, eta);
        CHECK(r.holds);
        CHECK(r.lhs > 0.0);
        CHECK(r.rhs > r.lhs);
        MESSAGE("energy estimate ratio " << r.ratio);

        const InequalityReport none = energy_estimate_check(traj, H, 2, 2.0, Cutoff::zero());
        CHECK(none.holds);
        CHECK(none.lhs == 0.0);
        CHECK(none.rhs == 0.0);

        const InequalityReport vz = energy_estimate_check(traj, zero, 2, 2.0, eta);
        CHECK(vz.holds);
        CHECK(vz.lhs == 0.0);
        CHECK(vz.rhs == 0.0);

        CHECK(code_of([&] { energy_estimate_check(traj, H, 2, 1.5, eta); }) == ErrorCode::BetaTooSmall);
        std::vector<ScalarField> neg = zero;
        neg.back()(0) = -1.0;
        CHECK(code_of([&] { energy_estimate_check(traj, neg, 2, 2.0, eta); }) == ErrorCode::NegativeField);
    }

    TEST_CASE("energy estimate on the sphere for larger beta")
    {
        const FlowTrajectory& traj = sphere_to_09_tmax();
        std::vector<ScalarField> H;
        for (const auto& s : traj.states) H.push_back(s.cache.mean_curvature);
        const CutoffSchedule sched = cutoff_schedule(traj.final_time(), 3);
        for (double beta : {2.5, 4.0, 8.0}) {
            for (int i = 1; i <= 3; ++i) {
                CAPTURE(beta);
                CAPTURE(i);
                CHECK(energy_estimate_check(traj, H, 2, beta, sched.cutoff(i)).holds);
            }
        }
    }

    TEST_CASE("iterated norms on the sphere stay under the bound")
    {
        const FlowTrajectory& traj = sphere_to_09_tmax();
        const MoserIteration it = iterate_norms(traj, 2, 2.5, 6);
        REQUIRE(it.norms.size() == 7);
        CHECK(it.bounds[0] == it.norms[0]);
        for (std::size_t m = 0; m < it.norms.size(); ++m) {
            CAPTURE(m);
            CHECK(it.norms[m] <= it.bounds[m]);
            if (m > 0) {
                CHECK(it.window_starts[m] > it.window_starts[m - 1]);
                CHECK(it.exponents[m] == doctest::Approx(it.exponents[m - 1] * 3.125 / 2));
            }
        }
        // Sphere oracle: H = 2 / r(t) with r^3 = 1 - 12 t, so H^2 = 4 (1 - 12 t)^(-2/3).
        const double T = traj.final_time();
        CHECK(rel_err(it.sup_tail, 4 * std::pow(1 - 12 * T, -2.0 / 3.0)) < 0.02);
        // Higher exponents approach the sup over the last window.
        CHECK(it.norms.back() / std::pow(4 * pi * 0.1, 1.0 / it.exponents.back()) < it.sup_tail * 1.5);
    }

    TEST_CASE("iterated norms of a frozen constant trajectory")
    {
        const FlowTrajectory traj = frozen_icosahedron(1.0, 17);
        const double H = traj.states[0].cache.mean_curvature(0);
        const double area = traj.states[0].cache.total_area;
        CHECK((traj.states[0].cache.mean_curvature.array() - H).abs().maxCoeff() < 1e-12);
        const MoserIteration it = iterate_norms(traj, 2, 2.5, 4);
        for (std::size_t m = 0; m < it.norms.size(); ++m) {
            const double len = 1.0 - it.window_starts[m];
            CHECK(rel_err(it.norms[m], H * H * std::pow(area * len, 1.0 / it.exponents[m])) < 1e-12);
        }
        CHECK(it.sup_tail == doctest::Approx(H * H).epsilon(1e-12));

        const MoserIteration single = iterate_norms(traj, 2, 2.5, 0);
        REQUIRE(single.norms.size() == 1);
        CHECK(rel_err(single.norms[0], H * H * std::pow(area, 1 / 2.5)) < 1e-12);
    }

    TEST_CASE("iteration needs two snapshots")
    {
        const FlowTrajectory traj = frozen_icosahedron(1.0, 1);
        CHECK(code_of([&] { iterate_norms(traj, 2, 2.5, 2); }) == ErrorCode::InsufficientSamples);
        const FlowTrajectory two = frozen_icosahedron(1.0, 2);
        CHECK(code_of([&] { iterate_norms(two, 2, 1.0, 2); }) == ErrorCode::BetaTooSmall);
    }

    TEST_CASE("sup bound on the sphere run")
    {
        const FlowTrajectory& traj = sphere_to_09_tmax();
        const InequalityReport r = sup_bound_check(traj, 2);
        CHECK(r.holds);
        const double T = traj.final_time();
        CHECK(rel_err(r.lhs, 2 * std::pow(1 - 12 * T, -1.0 / 3.0)) < 0.02);
        // int_0^T 4 pi r^2 (2/r)^5 dt with r^3 = 1 - 12 t.
        double accum = 0.0;
        const int N = 20000;
        for (int i = 0; i < N; ++i) {
            const double t = T * (i + 0.5) / N;
            accum += 128 * pi * std::pow(1 - 12 * t, -1.0) * T / N;
        }
        CHECK(rel_err(r.rhs / r.constants.at("F"), std::pow(accum, 0.2)) < 0.02);
        MESSAGE("sup bound ratio " << r.ratio);
    }

    TEST_CASE("sup bound on a frozen constant trajectory")
    {
        const FlowTrajectory traj = frozen_icosahedron(2.0, 9);
        const double H = traj.states[0].cache.mean_curvature(0);
        const double area = traj.states[0].cache.total_area;
        const InequalityReport r = sup_bound_check(traj, 2);
        CHECK(r.holds);
        CHECK(r.lhs == doctest::Approx(H).epsilon(1e-12));
        CHECK(rel_err(r.rhs, r.constants.at("F") * H * std::pow(area * 2.0, 0.2)) < 1e-12);
    }

    TEST_CASE("sup bound rejects n + 1 < k")
    {
        FlowParams p = FlowParams::power(4);
        p.stop_T = 1e-3;
        const FlowTrajectory traj = run(icosphere<double>(1), p, {});
        CHECK(code_of([&] { sup_bound_check(traj, 4); }) == ErrorCode::HypothesisViolated);
    }

    TEST_CASE("curvature evolution law on the sphere")
    {
        // Residual of dH/dt against f' Lap H + f |A|^2 + f'' |grad H|^2. The mean falls
        // under refinement; the max is set by the relaxing icosphere at early times.
        std::vector<double> means;
        for (int level : {3, 4}) {
            const FlowTrajectory traj = sphere_run_until(level, 0.03, 20);
            const EvolutionResiduals r = evolution_residuals(traj, FlowParams::power(2));
            CHECK(r.triples >= 2);
            CHECK(r.curvature_max < 5e-2);
            means.push_back(r.curvature_mean);
        }
        CHECK(means[1] < 0.5 * means[0]);
        CHECK(means[1] < 2e-2);
    }

    TEST_CASE("measured hypotheses on the sphere")
    {
        const FlowTrajectory& traj = sphere_to_09_tmax();
        const MeasuredHypotheses m = measure_hypotheses(traj, 2);
        CHECK(rel_err(m.min_H, 2.0) < 0.01);
        CHECK(rel_err(m.C2, 4.0) < 0.02);
        // |A|^2 = H^2 / 2 on a sphere, so k H^(k-1) |A|^2 = H^3.
        const double Hmax = 2 * std::pow(1 - 12 * traj.final_time(), -1.0 / 3.0);
        CHECK(rel_err(m.C0inf, std::pow(Hmax, 3)) < 0.05);
        CHECK(rel_err(m.volume, 4 * pi) < 0.01);
    }
}
