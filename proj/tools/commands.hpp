#pragma once

#include "config.hpp"
#include "json_out.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hkflow::cli {

/// Maps an error to the process exit status: 2 I/O, 3 precondition, 4 numerical failure.
int exit_code(ErrorCode code);

/// Runs the flow and writes trajectory.csv, snapshots/, report.json and plot.gp.
/// Returns the exit status; the summary (or the first check error) goes to out.
int cmd_flow(const RunConfig& config, std::ostream& out);

struct DiagnoseOptions
{
    std::string mesh = "icosphere:4";
    int k = 2;
    /// one, affine (1 + z/R), exp (exp(z)) or random (seeded smooth positive field)
    std::string field = "one";
    std::uint64_t seed = 0;
    std::vector<std::string> checks = {"michael_simon", "nonlinear_sobolev", "gradient_form"};
};

json cmd_diagnose(const DiagnoseOptions& options);

struct ConstantsOptions
{
    int n = 2;
    int k = 2;
    double T = 1.0;
    double volume = 12.566370614359172;
    double C0inf = 1.0;
    double H_norm_accum = 0.0;
    double C2 = 1.0;
    double q = std::numeric_limits<double>::infinity();
    double beta = 2.0;
};

json cmd_constants(const ConstantsOptions& options);
/// Aligned text table with 12 significant digits.
std::string constants_table(const json& constants);

struct SphereOptions
{
    int n = 2;
    int k = 2;
    double r0 = 1.0;
    std::vector<double> times;
    std::vector<double> alphas;
    /// Upper limit of the space-time norms; T_max when unset.
    std::optional<double> T;
};

json cmd_sphere(const SphereOptions& options);

struct BlowupOptions
{
    std::string dir;
    int count = 3;
    double C = 0.5;
    std::vector<double> alphas;
};

/// Post-processes a directory written by cmd_flow; writes blowup.json and rescaled snapshots.
json cmd_blowup(const BlowupOptions& options);

/// Error text without the leading code name.
std::string error_message(const Error& e);

/// Stable JSON text: sorted keys, two-space indent, trailing newline.
std::string dump(const json& j);

} // namespace hkflow::cli
