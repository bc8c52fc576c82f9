#include "commands.hpp"

#include "trajectory_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace hkflow::cli {

namespace fs = std::filesystem;

int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MeshNotFound:
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
        return 2;
    case ErrorCode::StepUnderflow:
        return 4;
    default:
        return 3;
    }
}

std::string error_message(const Error& e)
{
    const std::string what = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

namespace {

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
    out << text;
}

ScalarField abs_H(const FlowState& s)
{
    return s.cache.mean_curvature.cwiseAbs();
}

/// Evaluates one check, storing either its result or an error object.
struct CheckRunner
{
    json& checks;
    std::optional<Error> first_error;

    void operator()(const std::string& name, const std::function<json()>& fn)
    {
        try {
            checks[name] = fn();
        } catch (const Error& e) {
            checks[name] = error_json(e.code(), error_message(e));
            if (!first_error) first_error = e;
        }
    }
};

json run_checks(const RunConfig& cfg, const FlowTrajectory& traj, const fs::path& dir, std::optional<Error>& first_error)
{
    json checks = json::object();
    CheckRunner check{checks, std::nullopt};
    auto wants = [&](const char* name) { return cfg.checks.count(name) > 0; };
    const FlowState& first = traj.states.front();
    const FlowState& last = traj.states.back();

    if (wants("michael_simon")) {
        check("michael_simon", [&] {
            return json{{"field", "|H|"},
                {"initial", to_json(michael_simon_check(first.mesh, first.cache, abs_H(first), cfg.n))},
                {"final", to_json(michael_simon_check(last.mesh, last.cache, abs_H(last), cfg.n))}};
        });
    }
    if (wants("nonlinear_sobolev")) {
        check("nonlinear_sobolev", [&] {
            return json{{"field", "|H|"},
                {"initial", to_json(nonlinear_sobolev_check(first.mesh, first.cache, abs_H(first), cfg.n, cfg.k))},
                {"final", to_json(nonlinear_sobolev_check(last.mesh, last.cache, abs_H(last), cfg.n, cfg.k))}};
        });
    }
    if (wants("gradient_form")) {
        check("gradient_form", [&] {
            return json{{"field", "|H|"},
                {"initial", to_json(gradient_form_check(first.mesh, first.cache, abs_H(first), cfg.n, cfg.k))},
                {"final", to_json(gradient_form_check(last.mesh, last.cache, abs_H(last), cfg.n, cfg.k))}};
        });
    }
    std::vector<ScalarField> H;
    for (const auto& s : traj.states) H.push_back(abs_H(s));
    if (wants("spacetime_sobolev")) {
        check("spacetime_sobolev", [&] { return to_json(spacetime_sobolev_check(traj, H, cfg.n, cfg.k)); });
    }
    if (wants("energy_estimate")) {
        check("energy_estimate", [&] {
            const double T = traj.final_time() - first.time;
            require(T > 0.0, ErrorCode::InsufficientSamples, "the run has zero length");
            const Cutoff eta = cutoff_schedule(T, 1).cutoff(1);
            json r = to_json(energy_estimate_check(traj, H, cfg.k, cfg.beta, eta));
            r["beta"] = number(cfg.beta);
            return r;
        });
    }
    if (wants("moser_iterate")) {
        check("moser_iterate", [&] {
            return to_json(iterate_norms(traj, cfg.k, double(cfg.n + cfg.k + 1) / cfg.k, cfg.moser_steps));
        });
    }
    if (wants("sup_bound")) {
        check("sup_bound", [&] { return to_json(sup_bound_check(traj, cfg.k)); });
    }
    if (wants("extension_monitor")) {
        check("extension_monitor", [&] {
            json list = json::array();
            for (double a : traj.alphas) list.push_back(to_json(monitor(traj, cfg.pinching_C, a)));
            return list;
        });
    }
    if (wants("blowup_sequence")) {
        check("blowup_sequence", [&] {
            const BlowupSequence seq = blowup_sequence(traj, cfg.k, cfg.blowup_count);
            fs::create_directories(dir / "blowup");
            json entries = json::array();
            for (const auto& e : seq.entries) {
                json j = to_json(e);
                const std::string name = "rescaled_" + std::to_string(e.i) + ".off";
                write_off((dir / "blowup" / name).string(), e.rescaled_snapshot);
                j["file"] = "blowup/" + name;
                entries.push_back(j);
            }
            return json{{"tolerance", number(seq.tolerance)}, {"entries", entries}};
        });
    }
    if (wants("evolution_residuals")) {
        check("evolution_residuals", [&] { return to_json(evolution_residuals(traj, cfg.flow_params())); });
    }
    first_error = check.first_error;
    return checks;
}

} // namespace

int cmd_flow(const RunConfig& cfg, std::ostream& out)
{
    cfg.validate();
    const Hypersurface mesh = load_mesh(cfg.mesh);
    const FlowTrajectory traj = run(mesh, cfg.flow_params(), cfg.alphas);

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    fs::remove_all(dir / "snapshots");
    fs::remove_all(dir / "blowup");
    write_trajectory(dir, traj);
    write_plot_script(dir, traj);

    json report;
    report["kind"] = "flow";
    report["format_version"] = 1;
    json config = json::object();
    for (const auto& [key, value] : cfg.to_key_values()) {
        if (key != "output_dir") config[key] = value;
    }
    report["config"] = config;
    report["mesh"] = {{"vertices", mesh.num_vertices()}, {"faces", mesh.num_faces()}};
    const StepRecord& final_step = traj.steps.back();
    report["run"] = {
        {"termination", std::string(to_string(traj.termination))},
        {"steps", final_step.step},
        {"final_time", number(final_step.time)},
        {"final_max_H", number(final_step.max_H)},
        {"final_area", number(final_step.area)},
        {"snapshots", traj.states.size()},
    };
    json acc = json::array();
    for (std::size_t i = 0; i < traj.alphas.size(); ++i) {
        acc.push_back({{"alpha", number(traj.alphas[i])}, {"value", number(final_step.accumulators.at(i))}});
    }
    report["accumulators"] = acc;
    report["tmax_estimate"] = nullptr;
    if (traj.termination == Termination::BlowupThreshold) {
        try {
            report["tmax_estimate"] = to_json(estimate_tmax(traj, cfg.k));
        } catch (const Error&) {
        }
    }
    std::optional<Error> first_error;
    report["checks"] = run_checks(cfg, traj, dir, first_error);
    write_text(dir / "report.json", dump(report));

    if (first_error) {
        out << dump(error_json(first_error->code(), error_message(*first_error)));
        return exit_code(first_error->code());
    }
    out << dump({{"status", "ok"}, {"output_dir", dir.string()}, {"run", report["run"]}});
    return 0;
}

namespace {

ScalarField diagnose_field(const Hypersurface& mesh, const std::string& field, std::uint64_t seed)
{
    const double R = mesh.vertices.rowwise().norm().maxCoeff();
    const Eigen::ArrayXd z = mesh.vertices.col(2).array();
    if (field == "one") return ScalarField::Ones(mesh.num_vertices());
    if (field == "affine") return (1.0 + z / R).matrix();
    if (field == "exp") return z.exp().matrix();
    if (field == "random") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Eigen::ArrayXd e = Eigen::ArrayXd::Zero(mesh.num_vertices());
        for (int i = 0; i < 3; ++i) {
            const Eigen::ArrayXd xi = mesh.vertices.col(i).array() / R;
            e += u(rng) * xi;
            for (int j = i; j < 3; ++j) e += u(rng) * xi * mesh.vertices.col(j).array() / R;
        }
        return e.exp().matrix();
    }
    throw Error(ErrorCode::InvalidArgument, "unknown field '" + field + "' (one, affine, exp, random)");
}

} // namespace

json cmd_diagnose(const DiagnoseOptions& o)
{
    const Hypersurface mesh = load_mesh(o.mesh);
    const GeometryCache<double> cache = build_geometry(mesh);
    const ScalarField w = diagnose_field(mesh, o.field, o.seed);

    json reports = json::object();
    bool all_hold = true;
    for (const auto& name : o.checks) {
        if (name == "michael_simon") {
            const auto r = michael_simon_check(mesh, cache, w, 2);
            all_hold = all_hold && r.holds;
            reports[name] = to_json(r);
        } else if (name == "nonlinear_sobolev") {
            const auto r = nonlinear_sobolev_check(mesh, cache, w, 2, o.k);
            all_hold = all_hold && r.lp_form.holds && r.l2_form.holds;
            reports[name] = to_json(r);
        } else if (name == "gradient_form") {
            const auto r = gradient_form_check(mesh, cache, w, 2, o.k);
            all_hold = all_hold && r.holds;
            reports[name] = to_json(r);
        } else {
            throw Error(ErrorCode::InvalidArgument,
                "diagnose runs michael_simon, nonlinear_sobolev and gradient_form, not '" + name + "'");
        }
    }
    return {
        {"kind", "diagnose"},
        {"mesh", o.mesh},
        {"field", o.field},
        {"seed", o.seed},
        {"n", 2},
        {"k", o.k},
        {"vertices", mesh.num_vertices()},
        {"faces", mesh.num_faces()},
        {"area", number(cache.total_area)},
        {"pinching_minimum", number(pinching_minimum(cache))},
        {"reports", reports},
        {"all_hold", all_hold},
    };
}

json cmd_constants(const ConstantsOptions& o)
{
    require(o.n + 1 >= o.k, ErrorCode::HypothesisViolated,
        "n + 1 >= k is required; (n+k+1)/k = " + std::to_string(double(o.n + o.k + 1) / o.k) + " < 2");
    const SobolevConstants s = compute_constants(o.n, o.k, o.volume, o.T);
    MoserInputs in;
    in.n = o.n;
    in.k = o.k;
    in.T = o.T;
    in.volume = o.volume;
    in.C0inf = o.C0inf;
    in.H_norm_accum = o.H_norm_accum;
    in.C2 = o.C2;
    in.q = o.q;
    in.beta = o.beta;
    const MoserConstants m = compute_moser_constants(in);
    return {{"kind", "constants"}, {"sobolev", to_json(s)}, {"moser", to_json(m)}};
}

std::string constants_table(const json& constants)
{
    std::ostringstream out;
    for (const char* group : {"sobolev", "moser"}) {
        out << "[" << group << "]\n";
        for (const auto& [key, value] : constants.at(group).items()) {
            out << "  " << std::left << std::setw(12) << key << " ";
            if (value.is_null()) {
                out << "inf";
            } else if (value.is_number_integer()) {
                out << value.get<long long>();
            } else {
                out << std::setprecision(12) << value.get<double>();
            }
            out << '\n';
        }
    }
    return out.str();
}

json cmd_sphere(const SphereOptions& o)
{
    const SphereSolution sol{o.n, o.k, o.r0};
    sol.validate();
    json queries = json::array();
    for (double t : o.times) {
        queries.push_back({{"t", number(t)}, {"r", number(sphere_radius(sol, t))},
            {"H", number(sphere_mean_curvature(sol, t))}});
    }
    const double T = o.T ? *o.T : sol.tmax();
    json norms = json::array();
    for (double a : o.alphas) {
        const SpacetimeNorm s = sphere_spacetime_norm(sol, a, T);
        norms.push_back({{"alpha", number(a)}, {"T", number(T)}, {"divergent", s.divergent},
            {"power", s.divergent ? json(nullptr) : number(s.power)},
            {"norm", s.divergent ? json(nullptr) : number(s.norm)}});
    }
    return {
        {"kind", "sphere"},
        {"n", o.n},
        {"k", o.k},
        {"r0", number(o.r0)},
        {"tmax", number(sol.tmax())},
        {"queries", queries},
        {"norms", norms},
    };
}

json cmd_blowup(const BlowupOptions& o)
{
    const fs::path dir = o.dir;
    const fs::path report_path = dir / "report.json";
    require(fs::exists(report_path), ErrorCode::MeshNotFound, "no report.json in " + dir.string());
    json report;
    try {
        std::ifstream in(report_path);
        report = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("report.json: ") + e.what());
    }
    int k = 0;
    Termination termination{};
    try {
        k = std::stoi(report.at("config").at("k").get<std::string>());
        termination = termination_from_string(report.at("run").at("termination").get<std::string>());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("report.json lacks config.k or run.termination: ") + e.what());
    }
    const FlowTrajectory traj = read_trajectory(dir, k, termination);
    const BlowupSequence seq = blowup_sequence(traj, k, o.count);

    fs::remove_all(dir / "blowup");
    fs::create_directories(dir / "blowup");
    json entries = json::array();
    for (const auto& e : seq.entries) {
        json j = to_json(e);
        const std::string name = "rescaled_" + std::to_string(e.i) + ".off";
        write_off((dir / "blowup" / name).string(), e.rescaled_snapshot);
        j["file"] = "blowup/" + name;
        entries.push_back(j);
    }
    json out = {{"kind", "blowup"}, {"k", k}, {"termination", std::string(to_string(termination))},
        {"tolerance", number(seq.tolerance)}, {"entries", entries}};
    try {
        out["tmax_estimate"] = to_json(estimate_tmax(traj, k));
    } catch (const Error& e) {
        out["tmax_estimate"] = error_json(e.code(), error_message(e));
    }
    json monitors = json::array();
    for (double a : o.alphas.empty() ? traj.alphas : o.alphas) monitors.push_back(to_json(monitor(traj, o.C, a)));
    out["monitor"] = monitors;
    write_text(dir / "blowup.json", dump(out));
    return out;
}

} // namespace hkflow::cli
