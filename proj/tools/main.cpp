#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <limits>

using namespace hkflow;
using namespace hkflow::cli;

namespace {

double parse_q(const std::string& text)
{
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double q = 0.0;
    try {
        q = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used > 0 && used == text.size(), ErrorCode::ParseError, "bad value '" + text + "' for q");
    return q;
}

int fail(ErrorCode code, const std::string& message)
{
    std::cout << dump(error_json(code, message));
    return exit_code(code);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Curvature flows by powers of mean curvature: simulation and inequality diagnostics"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Kernel threads (overrides HKFLOW_THREADS)")->check(CLI::NonNegativeNumber);

    // flow
    auto* flow = app.add_subcommand("flow", "Run the flow and write trajectory, snapshots and report");
    std::string config_path;
    flow->add_option("--config", config_path, "Flat key = value configuration file");
    KeyValues overrides;
    std::map<std::string, std::string> flag_values;
    for (const auto& key : RunConfig::keys()) {
        flow->add_option("--" + key, flag_values[key], "Overrides the config key '" + key + "'");
    }

    // diagnose
    auto* diagnose = app.add_subcommand("diagnose", "Static inequality checks on one mesh and field");
    DiagnoseOptions dopt;
    diagnose->add_option("--mesh", dopt.mesh, "Mesh file or builtin (icosphere:L[:R], ellipsoid:A:B:C[:L], torus:R:r[:N:M])");
    diagnose->add_option("--k", dopt.k, "Power of the speed")->check(CLI::PositiveNumber);
    diagnose->add_option("--field", dopt.field, "one, affine, exp or random")
        ->check(CLI::IsMember({"one", "affine", "exp", "random"}));
    diagnose->add_option("--seed", dopt.seed, "Seed of the random field");
    diagnose->add_option("--checks", dopt.checks, "michael_simon, nonlinear_sobolev, gradient_form")->delimiter(',');
    std::string diagnose_out;
    diagnose->add_option("--output", diagnose_out, "Also write the JSON here");

    // constants
    auto* constants = app.add_subcommand("constants", "Print the explicit constants");
    ConstantsOptions copt;
    std::string q_text = "inf";
    bool constants_json = false;
    constants->add_option("--n", copt.n, "Dimension");
    constants->add_option("--k", copt.k, "Power of the speed");
    constants->add_option("--T", copt.T, "Time span");
    constants->add_option("--volume", copt.volume, "Initial area of the hypersurface");
    constants->add_option("--C0inf", copt.C0inf, "sup |f'(v) G|");
    constants->add_option("--H_norm_accum", copt.H_norm_accum, "int int |H|^(n+k+1)");
    constants->add_option("--C2", copt.C2, "Lower bound on f'(v)");
    constants->add_option("--q", q_text, "Integrability exponent (number or inf)");
    constants->add_option("--beta", copt.beta, "Moser exponent");
    constants->add_flag("--json", constants_json, "Print JSON instead of a table");

    // sphere
    auto* sphere = app.add_subcommand("sphere", "Closed-form shrinking sphere");
    SphereOptions sopt;
    std::optional<double> sphere_T;
    sphere->add_option("--n", sopt.n, "Dimension");
    sphere->add_option("--k", sopt.k, "Power of the speed");
    sphere->add_option("--r0", sopt.r0, "Initial radius");
    sphere->add_option("--t", sopt.times, "Query times")->delimiter(',');
    sphere->add_option("--alpha", sopt.alphas, "Exponents of space-time norms")->delimiter(',');
    sphere->add_option("--T", sphere_T, "Upper limit of the norms (default T_max)");

    // blowup
    auto* blowup = app.add_subcommand("blowup", "Rescale a stored blow-up run");
    BlowupOptions bopt;
    blowup->add_option("dir", bopt.dir, "Output directory of a flow run")->required();
    blowup->add_option("--count", bopt.count, "Number of rescaled snapshots")->check(CLI::PositiveNumber);
    blowup->add_option("--C", bopt.C, "Pinching constant for the monitor");
    blowup->add_option("--alpha", bopt.alphas, "Exponents for the monitor (default: the run's)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(ErrorCode::InvalidArgument, e.what());
    }
    if (threads > 0) set_max_threads(threads);

    try {
        if (flow->parsed()) {
            KeyValues kv = config_path.empty() ? KeyValues{} : read_config(config_path);
            for (const auto& key : RunConfig::keys()) {
                if (flow->count("--" + key) > 0) kv[key] = flag_values[key];
            }
            return cmd_flow(RunConfig::from(kv), std::cout);
        }
        if (diagnose->parsed()) {
            const json j = cmd_diagnose(dopt);
            const std::string text = dump(j);
            if (!diagnose_out.empty()) {
                std::ofstream out(diagnose_out, std::ios::binary);
                require(out.good(), ErrorCode::IoError, "cannot write " + diagnose_out);
                out << text;
            }
            std::cout << text;
            return 0;
        }
        if (constants->parsed()) {
            copt.q = parse_q(q_text);
            const json j = cmd_constants(copt);
            std::cout << (constants_json ? dump(j) : constants_table(j));
            return 0;
        }
        if (sphere->parsed()) {
            sopt.T = sphere_T;
            std::cout << dump(cmd_sphere(sopt));
            return 0;
        }
        if (blowup->parsed()) {
            std::cout << dump(cmd_blowup(bopt));
            return 0;
        }
    } catch (const Error& e) {
        return fail(e.code(), error_message(e));
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(ErrorCode::IoError, e.what());
    }
    return 0;
}
