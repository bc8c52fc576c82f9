#include "support.hpp"

using namespace hkflow;
using namespace hkflow::testing;

namespace {

double mean_radius(const Hypersurface& mesh)
{
    const Eigen::RowVector3d c = mesh.vertices.colwise().mean();
    return (mesh.vertices.rowwise() - c).rowwise().norm().mean();
}

double radius_variation(const Hypersurface& mesh)
{
    const Eigen::RowVector3d c = mesh.vertices.colwise().mean();
    const Eigen::ArrayXd r = (mesh.vertices.rowwise() - c).rowwise().norm().array();
    return std::sqrt((r - r.mean()).square().mean()) / r.mean();
}

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

} // namespace

TEST_SUITE("flow")
{
    TEST_CASE("one step shrinks the unit sphere by dt n^k / r^k")
    {
        FlowParams p = FlowParams::power(2);
        p.fixed_dt = 1e-4;
        const FlowState s0 = make_state(icosphere<double>(4));
        const FlowState s1 = step(s0, p);
        CHECK(s1.time == doctest::Approx(1e-4).epsilon(1e-14));
        CHECK(s1.step == 1);
        const double drop = mean_radius(s0.mesh) - mean_radius(s1.mesh);
        CHECK(rel_err(drop, 4e-4) < 0.02);
        CHECK(s1.cache.has_shape_operator);
    }

    TEST_CASE("k = 1 keeps the sphere round")
    {
        FlowParams p = FlowParams::power(1);
        p.stop_T = 0.2;
        const auto mesh = icosphere<double>(3);
        const FlowTrajectory traj = run(mesh, p, {});
        CHECK(traj.termination == Termination::ReachedT);
        const double initial = radius_variation(mesh);
        for (const auto& s : traj.states) CHECK(radius_variation(s.mesh) <= initial + 1e-4);
    }

    TEST_CASE("mean-convexity and parabolicity gates")
    {
        auto dimpled = icosphere<double>(3);
        dimpled.vertices.row(0) *= 0.8;
        CHECK(code_of([&] { step(make_state(dimpled), FlowParams::power(2)); }) == ErrorCode::NotMeanConvex);
        CHECK(code_of([&] { run(dimpled, FlowParams::power(2), {}); }) == ErrorCode::NotMeanConvex);

        FlowParams backwards;
        backwards.k = 1;
        backwards.speed = SpeedFunction::custom([](double x) { return -x; }, [](double) { return -1.0; },
            [](double) { return 0.0; });
        CHECK(code_of([&] { step(make_state(icosphere<double>(2)), backwards); }) == ErrorCode::ParabolicityLost);

        FlowParams tiny = FlowParams::power(2);
        tiny.dt_min = 1.0;
        CHECK(code_of([&] { step(make_state(icosphere<double>(2)), tiny); }) == ErrorCode::StepUnderflow);
    }

    TEST_CASE("the mean-convexity gate does not apply to k = 1")
    {
        auto dimpled = icosphere<double>(3);
        dimpled.vertices.row(0) *= 0.8;
        FlowParams p = FlowParams::power(1);
        p.stop_T = 1e-4;
        CHECK(run(dimpled, p, {}).termination == Termination::ReachedT);
    }

    TEST_CASE("sphere blow-up happens near 1/12")
    {
        const FlowTrajectory& traj = sphere_blowup_run(3);
        CHECK(traj.termination == Termination::BlowupThreshold);
        CHECK(traj.steps.back().max_H_pow > 1e6);
        CHECK(rel_err(traj.final_time(), 1.0 / 12) < 0.02);
    }

    TEST_CASE("stop_T ends the run exactly")
    {
        FlowParams p = FlowParams::power(2);
        p.stop_T = 0.01;
        const FlowTrajectory traj = run(icosphere<double>(3), p, {4.0});
        CHECK(traj.termination == Termination::ReachedT);
        CHECK(traj.final_time() == 0.01);
        CHECK(traj.states.back().time == 0.01);
        CHECK(traj.states.back().step == traj.steps.back().step);
    }

    TEST_CASE("quality and step-size terminations are reported in-band")
    {
        FlowParams strict = FlowParams::power(2);
        strict.quality_floor = 0.99;
        CHECK(run(icosphere<double>(2), strict, {}).termination == Termination::QualityFailure);

        FlowParams tiny = FlowParams::power(2);
        tiny.dt_min = 1.0;
        CHECK(run(icosphere<double>(2), tiny, {}).termination == Termination::DtUnderflow);
    }

    TEST_CASE("trajectory invariants: increasing times, monotone accumulators")
    {
        FlowParams p = FlowParams::power(2);
        p.stop_T = 0.05;
        p.snapshot_stride = 7;
        const FlowTrajectory traj = run(ellipsoid<double>(1, 0.9, 0.8, 3), p, {1.0, 4.0, 5.0});
        for (std::size_t i = 1; i < traj.steps.size(); ++i) {
            CHECK(traj.steps[i].time > traj.steps[i - 1].time);
            for (std::size_t a = 0; a < 3; ++a) {
                CHECK(traj.steps[i].accumulators[a] >= traj.steps[i - 1].accumulators[a]);
                CHECK(traj.steps[i].accumulators[a] >= 0.0);
            }
        }
        for (std::size_t i = 1; i < traj.states.size(); ++i) CHECK(traj.states[i].time > traj.states[i - 1].time);
        CHECK(traj.states.front().step == 0);
        CHECK(traj.states.back().step == traj.steps.back().step);
    }

    TEST_CASE("area decreases along mean-convex flows")
    {
        FlowParams p = FlowParams::power(2);
        p.stop_T = 0.04;
        const FlowTrajectory traj = run(ellipsoid<double>(1, 0.9, 0.8, 3), p, {});
        for (std::size_t i = 1; i < traj.steps.size(); ++i) CHECK(traj.steps[i].area < traj.steps[i - 1].area);
    }

    TEST_CASE("a perturbed sphere stays round until r < 0.2")
    {
        auto mesh = icosphere<double>(3);
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> bump(-1e-3, 1e-3);
        for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) mesh.vertices.row(i) *= 1.0 + bump(rng);
        const double initial = radius_variation(mesh);
        FlowParams p = FlowParams::power(2);
        p.blowup_threshold = std::pow(2.0 / 0.2, 3);
        p.snapshot_stride = 5;
        const FlowTrajectory traj = run(mesh, p, {});
        CHECK(traj.termination == Termination::BlowupThreshold);
        for (const auto& s : traj.states) {
            if (mean_radius(s.mesh) < 0.2) break;
            CHECK(radius_variation(s.mesh) < 5 * initial);
        }
    }

    TEST_CASE("accumulated H^4 integral matches the closed form")
    {
        const FlowTrajectory& traj = sphere_blowup_run(3);
        const double t = traj.final_time();
        const double closed = sphere_spacetime_norm(SphereSolution{2, 2, 1.0}, 4.0, std::min(t, 1.0 / 12)).power;
        CHECK(rel_err(traj.steps.back().accumulators[0], closed) < 0.05);
        CHECK(rel_err(traj.spacetime_integral(4.0), traj.steps.back().accumulators[0]) < 1e-12);
    }

    TEST_CASE("rescaling commutes with the flow")
    {
        const auto mesh = icosphere<double>(2);
        FlowParams p = FlowParams::power(2);
        p.stop_T = 0.03;
        const FlowTrajectory base = run(mesh, p, {});
        for (double Q : {2.0, 3.0}) {
            FlowParams q = p;
            q.stop_T = 0.03 * std::pow(Q, 3);
            const FlowTrajectory big = run(scaled(mesh, Q), q, {});
            REQUIRE(big.steps.size() == base.steps.size());
            const auto& a = base.states.back().mesh.vertices;
            const auto& b = big.states.back().mesh.vertices;
            CHECK((b / Q - a).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    TEST_CASE("singular time and type-I rate from the mesh run")
    {
        const FlowTrajectory& traj = sphere_blowup_run(3);
        const TmaxEstimate est = estimate_tmax(traj, 2);
        CHECK(rel_err(est.tmax, 1.0 / 12) < 0.01);
        CHECK(rel_err(est.rate, 2.0 / 3) < 0.02);
        CHECK(est.samples >= 10);
        CHECK(est.slope < 0.0);
    }

    TEST_CASE("singular time for the three-dimensional sphere")
    {
        const SphereSolution sol{3, 2, 1.0};
        std::vector<double> times;
        for (int i = 0; i < 200; ++i) times.push_back(sol.tmax() * (1.0 - std::pow(0.95, i)));
        const FlowTrajectory traj = sphere_trajectory(sol, times, {});
        const TmaxEstimate est = estimate_tmax(traj, 2);
        CHECK(rel_err(est.tmax, 1.0 / 27) < 0.01);
        CHECK(rel_err(est.rate, 1.0) < 0.02);
    }

    TEST_CASE("too few samples for a singular-time fit")
    {
        const SphereSolution sol{2, 2, 1.0};
        const FlowTrajectory traj = sphere_trajectory(sol, {0.0, 0.02, 0.04}, {});
        CHECK(code_of([&] { estimate_tmax(traj, 2); }) == ErrorCode::InsufficientSamples);
    }

    TEST_CASE("evolution residuals on the sphere")
    {
        FlowParams p = FlowParams::power(2);
        p.stop_T = 0.06;
        p.snapshot_stride = 20;
        const FlowTrajectory traj = run(icosphere<double>(4), p, {});
        const EvolutionResiduals r = evolution_residuals(traj, p);
        CHECK(r.triples >= 3);
        CHECK(r.volume_form_max < 1e-2);
        CHECK(r.sphere_max < 1e-2);
    }

    TEST_CASE("evolution residuals on the ellipsoid")
    {
        FlowParams p = FlowParams::power(2);
        p.stop_T = 0.02;
        p.snapshot_stride = 20;
        const FlowTrajectory traj = run(ellipsoid<double>(1, 0.9, 0.8, 4), p, {});
        const EvolutionResiduals r = evolution_residuals(traj, p);
        CHECK(r.volume_form_max < 5e-2);
        MESSAGE("ellipsoid curvature-law residual (reported): " << r.curvature_max);
    }

    TEST_CASE("frozen snapshots give a residual equal to the full right side")
    {
        const FlowState s = make_state(icosphere<double>(3));
        FlowTrajectory traj;
        traj.k = 2;
        for (int i = 0; i < 4; ++i) traj.states.push_back(s);
        const EvolutionResiduals r = evolution_residuals(traj, FlowParams::power(2));
        CHECK(r.volume_form_max == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.volume_form_mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.sphere_max == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.curvature_max == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("residuals need three snapshots")
    {
        FlowTrajectory traj;
        traj.states.push_back(make_state(icosphere<double>(2)));
        CHECK(code_of([&] { evolution_residuals(traj, FlowParams::power(2)); }) == ErrorCode::InsufficientSamples);
    }

    TEST_CASE("parameter validation")
    {
        FlowParams p = FlowParams::power(2);
        p.dt_safety = 1.5;
        CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
        p = FlowParams::power(2);
        p.k = 3;
        CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
        p = FlowParams::power(2);
        p.tangential_smoothing = -1.0;
        CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
        CHECK(code_of([&] { run(icosphere<double>(1), FlowParams::power(2), {-1.0}); }) == ErrorCode::InvalidArgument);
    }

    TEST_CASE("termination names round-trip")
    {
        for (auto t : {Termination::ReachedT, Termination::BlowupThreshold, Termination::DtUnderflow, Termination::QualityFailure}) {
            CHECK(termination_from_string(to_string(t)) == t);
        }
        CHECK(to_string(Termination::BlowupThreshold) == std::string_view("blowup_threshold"));
    }
}
