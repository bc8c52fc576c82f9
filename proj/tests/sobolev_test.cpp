#include "support.hpp"

using namespace hkflow;
using namespace hkflow::testing;

namespace {

struct Sample
{
    std::string label;
    Hypersurface mesh;
    GeometryCache<double> cache;
    ScalarField field;
};

ScalarField exp_z(const Hypersurface& m)
{
    return m.vertices.col(2).array().exp();
}

ScalarField one_plus_z(const Hypersurface& m)
{
    return (m.vertices.col(2).array() + 1.0).matrix();
}

/// Meshes and fields shared by the property checks.
std::vector<Sample> corpus()
{
    std::vector<std::pair<std::string, Hypersurface>> meshes = {
        {"icosphere3", icosphere<double>(3)},
        {"icosphere4", icosphere<double>(4)},
        {"icosphere4_r2", icosphere<double>(4, 2.0)},
        {"ellipsoid_1_0.9_0.8", ellipsoid<double>(1, 0.9, 0.8, 4)},
        {"ellipsoid_1.5_1_0.5", ellipsoid<double>(1.5, 1, 0.5, 4)},
        {"torus", torus<double>(1.0, 0.4, 64, 32)},
    };
    std::mt19937_64 rng(2024);
    std::vector<Sample> out;
    for (auto& [label, mesh] : meshes) {
        const auto cache = build_geometry(mesh);
        const double top = mesh.vertices.col(2).maxCoeff();
        out.push_back({label + ":const", mesh, cache, constant(mesh, 1.0)});
        out.push_back({label + ":coord", mesh, cache, (mesh.vertices.col(2).array() + top).matrix()});
        out.push_back({label + ":exp", mesh, cache, exp_z(mesh)});
        out.push_back({label + ":random", mesh, cache, random_smooth_field(mesh, rng)});
    }
    return out;
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

TEST_SUITE("sobolev")
{
    TEST_CASE("constants for n = 2, k = 2")
    {
        const SobolevConstants c = compute_constants(2, 2, 4 * pi, 1.0);
        CHECK(c.Q_k == 4.0);
        CHECK(c.gamma == 3.125);
        CHECK(std::abs(c.c_n - 64.0 / std::sqrt(4 * pi)) < 1e-12 * c.c_n);
        CHECK(c.c_n == doctest::Approx(18.0540).epsilon(1e-5));
    }

    TEST_CASE("k = 1 recovers the classical exponent")
    {
        CHECK(compute_constants(3, 1, 1.0, 1.0).Q_k == doctest::Approx(3.0).epsilon(1e-15));
        for (int n = 3; n <= 8; ++n) {
            CHECK(compute_constants(n, 1, 1.0, 1.0).Q_k == doctest::Approx(n / (n - 2.0)).epsilon(1e-14));
        }
    }

    TEST_CASE("hypotheses on (n, k)")
    {
        CHECK(code_of([] { compute_constants(2, 1, 1.0, 1.0); }) == ErrorCode::HypothesisViolated);
        CHECK(code_of([] { compute_constants(1, 3, 1.0, 1.0); }) == ErrorCode::HypothesisViolated);
        CHECK(code_of([] { compute_constants(2, 2, -1.0, 1.0); }) == ErrorCode::InvalidArgument);
    }

    TEST_CASE("constant relations rederived independently")
    {
        for (int n = 2; n <= 5; ++n) {
            for (int k = 1; k <= 4; ++k) {
                if (k * n <= k + 1 || (k == 1 && n <= 2)) continue;
                const double vol = 3.7, T = 0.4;
                const SobolevConstants c = compute_constants(n, k, vol, T);
                const double nd = n, kd = k;
                CHECK(c.Q_k > 1.0);
                CHECK(c.gamma > 2.0);
                CHECK(c.gamma <= 2.0 + (kd + 1) * (kd + 1) / (kd * kd * nd));
                CHECK(c.c_nk > c.c_n);
                const double omega = 2 * std::pow(pi, (nd + 1) / 2) / std::tgamma((nd + 1) / 2);
                CHECK(rel_err(c.c_n, std::pow(4.0, nd + 1) / std::pow(omega, 1.0 / nd)) < 1e-13);
                CHECK(rel_err(c.c_nk, c.c_n * (kd + 1) * (nd - 1) / (kd * nd - kd - 1)) < 1e-13);
                // A through logarithms, as an independent evaluation path.
                const double log_A = (nd - 1) * (kd + 1) * (nd + kd + 1) / (kd * nd - kd - 1) * std::log(2.0) +
                    (nd + kd + 1) * std::log(2 * c.c_nk);
                CHECK(std::abs(std::log(c.A_nk) - log_A) < 1e-12 * std::abs(log_A));
                CHECK(rel_err(c.A_hat_nk, c.A_nk * std::pow(vol, (kd - 1) / (2 * (kd + 1)))) < 1e-13);
                const double log_At = log_A / kd + (kd + 1) / kd * std::log(2 * kd / (kd + 1));
                CHECK(std::abs(std::log(c.A_tilde_nk) - log_At) < 1e-12 * std::max(1.0, std::abs(log_At)));
                const double tfac = std::max(std::pow(T, (kd - 1) / kd), std::pow(T, (kd - 1) / (2 * kd)));
                CHECK(rel_err(c.B_nkT, c.A_tilde_nk * std::pow(vol, (kd - 1) * (kd + 1) / (2 * kd * kd * nd)) * tfac) < 1e-13);
            }
        }
    }

    TEST_CASE("the space-time constant reduces to A when k = 1")
    {
        for (int n = 3; n <= 6; ++n) {
            for (double T : {0.3, 1.0, 5.0}) {
                const SobolevConstants c = compute_constants(n, 1, 2.0, T);
                CHECK(rel_err(c.B_nkT, c.A_nk) < 1e-13);
            }
        }
    }

    TEST_CASE("A_{2,2} is astronomically large")
    {
        const double A = compute_constants(2, 2, 4 * pi, 1.0).A_nk;
        CHECK(A > 1e14);
        CHECK(A < 1e16);
    }

    TEST_CASE("interpolation exponent is positive on its interval")
    {
        std::mt19937_64 rng(9);
        for (int n = 2; n <= 6; ++n) {
            for (int k = 2; k <= 4; ++k) {
                const SobolevConstants c = compute_constants(n, k, 1.0, 1.0);
                std::uniform_real_distribution<double> s(1.0, double(n) / (n - 1));
                for (int trial = 0; trial < 100; ++trial) {
                    double sv = s(rng);
                    if (sv <= 1.0) continue;
                    CHECK(c.mu(sv) > 0.0);
                }
            }
        }
    }

    TEST_CASE("Michael-Simon with w = 1 on the unit sphere")
    {
        const auto mesh = icosphere<double>(4);
        const auto cache = build_geometry(mesh);
        const InequalityReport r = michael_simon_check(mesh, cache, constant(mesh, 1.0), 2);
        CHECK(r.holds);
        CHECK(rel_err(r.lhs, std::sqrt(4 * pi)) < 0.01);
        CHECK(rel_err(r.rhs, 64.0 / std::sqrt(4 * pi) * 2 * 4 * pi) < 0.01);
        CHECK(r.rhs == doctest::Approx(453.7).epsilon(0.01));
        CHECK(r.ratio == doctest::Approx(r.lhs / r.rhs));
    }

    TEST_CASE("Michael-Simon with w = 0")
    {
        const auto mesh = icosphere<double>(2);
        const InequalityReport r = michael_simon_check(mesh, build_geometry(mesh), constant(mesh, 0.0), 2);
        CHECK(r.holds);
        CHECK(r.ratio == 0.0);
        CHECK(r.lhs == 0.0);
    }

    TEST_CASE("Michael-Simon ratio for 1 + z on the ellipsoid is refinement-stable")
    {
        std::vector<double> ratios;
        for (int level : {4, 5}) {
            const auto mesh = ellipsoid<double>(1, 0.9, 0.8, level);
            const auto r = michael_simon_check(mesh, build_geometry(mesh), one_plus_z(mesh), 2);
            CHECK(r.holds);
            ratios.push_back(r.ratio);
        }
        CHECK(rel_err(ratios[1], ratios[0]) < 0.01);
    }

    TEST_CASE("negative fields are rejected")
    {
        const auto mesh = icosphere<double>(2);
        const auto cache = build_geometry(mesh);
        const ScalarField z = coordinate(mesh, 2);
        CHECK(code_of([&] { michael_simon_check(mesh, cache, z, 2); }) == ErrorCode::NegativeField);
        CHECK(code_of([&] { nonlinear_sobolev_check(mesh, cache, z, 2, 2); }) == ErrorCode::NegativeField);
        CHECK(code_of([&] { gradient_form_check(mesh, cache, z, 2, 2); }) == ErrorCode::NegativeField);
    }

    TEST_CASE("nonlinear Sobolev with constant fields")
    {
        const auto mesh = icosphere<double>(4);
        const auto cache = build_geometry(mesh);
        const double area = cache.total_area;
        const auto zero = nonlinear_sobolev_check(mesh, cache, constant(mesh, 0.0), 2, 2);
        CHECK(zero.lp_form.holds);
        CHECK(zero.l2_form.holds);
        CHECK(zero.lp_form.lhs == 0.0);

        const auto one = nonlinear_sobolev_check(mesh, cache, constant(mesh, 1.0), 2, 2);
        // ||1||^3 in L^6 is Area^(1/2); ||1||^3 in L^(3/2) is Area^2.
        CHECK(rel_err(one.lp_form.lhs, std::sqrt(area)) < 1e-12);
        CHECK(rel_err(one.lp_form.lhs, std::sqrt(4 * pi)) < 0.01);
        const double A = compute_constants(2, 2, area, 1.0).A_nk;
        const double H5 = lp_norm_pow(cache, cache.mean_curvature, 5.0);
        CHECK(rel_err(H5, 32 * 4 * pi) < 0.02);
        CHECK(rel_err(one.lp_form.rhs, A * (gradient_lp_norm(mesh, constant(mesh, 1.0), 1.5) * 0 + H5 * area * area)) < 1e-9);
        CHECK(one.lp_form.holds);
        CHECK(one.lp_form.ratio < 1e-15);
        CHECK(one.l2_form.holds);
    }

    TEST_CASE("nonlinear Sobolev for 1 + z is refinement-stable")
    {
        std::vector<NonlinearSobolevReports> reports;
        for (int level : {4, 5}) {
            const auto mesh = icosphere<double>(level);
            reports.push_back(nonlinear_sobolev_check(mesh, build_geometry(mesh), one_plus_z(mesh), 2, 2));
            CHECK(reports.back().lp_form.holds);
            CHECK(reports.back().l2_form.holds);
        }
        CHECK(rel_err(reports[1].lp_form.lhs, reports[0].lp_form.lhs) < 0.02);
        for (const auto& [name, value] : reports[1].lp_form.factors) {
            CHECK_MESSAGE(rel_err(value, reports[0].lp_form.factors.at(name)) < 0.02, name);
        }
    }

    TEST_CASE("gradient form with constant and exponential fields")
    {
        const auto mesh = icosphere<double>(4);
        const auto cache = build_geometry(mesh);
        const auto one = gradient_form_check(mesh, cache, constant(mesh, 1.0), 2, 2);
        CHECK(one.holds);
        CHECK(one.factors.at("norm_grad_v_l2") < 1e-12);
        CHECK(rel_err(one.lhs, std::pow(cache.total_area, 0.25)) < 1e-12);
        CHECK(rel_err(one.lhs, std::pow(4 * pi, 0.25)) < 0.01);
        CHECK(gradient_form_check(mesh, cache, constant(mesh, 0.0), 2, 2).holds);

        std::vector<InequalityReport> reports;
        for (int level : {4, 5}) {
            const auto m = icosphere<double>(level);
            reports.push_back(gradient_form_check(m, build_geometry(m), exp_z(m), 2, 2));
            CHECK(reports.back().holds);
        }
        for (const auto& [name, value] : reports[1].factors) {
            CHECK_MESSAGE(rel_err(value, reports[0].factors.at(name)) < 0.02, name);
        }
    }

    TEST_CASE("every static inequality holds on the corpus")
    {
        const auto samples = corpus();
        CHECK(samples.size() >= 20);
        for (const auto& s : samples) {
            CAPTURE(s.label);
            const auto ms = michael_simon_check(s.mesh, s.cache, s.field, 2);
            CHECK(ms.holds);
            CHECK(ms.ratio > 0.0);
            const auto ns = nonlinear_sobolev_check(s.mesh, s.cache, s.field, 2, 2);
            CHECK(ns.lp_form.holds);
            CHECK(ns.l2_form.holds);
            CHECK(gradient_form_check(s.mesh, s.cache, s.field, 2, 2).holds);
            CHECK(nonlinear_sobolev_check(s.mesh, s.cache, s.field, 2, 3).lp_form.holds);
        }
    }

    TEST_CASE("space-time inequality with v = 1 on a short sphere run")
    {
        const FlowTrajectory traj = sphere_run_until(3, 0.01, 5);
        std::vector<ScalarField> ones;
        for (const auto& s : traj.states) ones.push_back(constant(s.mesh, 1.0));
        const InequalityReport r = spacetime_sobolev_check(traj, ones, 2, 2);
        CHECK(r.holds);
        // LHS = int Area dt; the exact sphere gives int 4 pi r(t)^2 dt.
        const SphereSolution sol{2, 2, 1.0};
        double exact = 0.0;
        const int N = 2000;
        for (int i = 0; i < N; ++i) {
            const double t = 0.01 * (i + 0.5) / N;
            exact += 4 * pi * std::pow(sphere_radius(sol, t), 2) * 0.01 / N;
        }
        CHECK(rel_err(r.lhs, exact) < 0.01);
        CHECK(r.factors.at("T") == doctest::Approx(0.01));
    }

    TEST_CASE("space-time inequality with v = 0 and v = H")
    {
        const FlowTrajectory traj = sphere_run_until(3, 0.03, 5);
        std::vector<ScalarField> zeros, H;
        for (const auto& s : traj.states) {
            zeros.push_back(constant(s.mesh, 0.0));
            H.push_back(s.cache.mean_curvature);
        }
        CHECK(spacetime_sobolev_check(traj, zeros, 2, 2).holds);
        const InequalityReport r = spacetime_sobolev_check(traj, H, 2, 2);
        CHECK(r.holds);
        CHECK(r.factors.count("spacetime_H_norm_pow") == 1);
        CHECK(r.factors.at("max_norm_v_l2") > 0.0);
    }

    TEST_CASE("space-time inequality rejects area growth")
    {
        FlowTrajectory traj = sphere_run_until(2, 0.01, 5);
        traj.steps[3].area *= 2.0;
        std::vector<ScalarField> ones;
        for (const auto& s : traj.states) ones.push_back(constant(s.mesh, 1.0));
        CHECK(code_of([&] { spacetime_sobolev_check(traj, ones, 2, 2); }) == ErrorCode::HypothesisViolated);
    }
}
