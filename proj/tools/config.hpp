#pragma once

#include <hkflow/trajectory.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hkflow::cli {

/// Flat key/value settings: one `key = value` per line, `#` to end of line is a comment.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config(const std::string& text);
KeyValues read_config(const std::string& path);

inline const std::vector<std::string>& all_checks()
{
    static const std::vector<std::string> names = {"michael_simon", "nonlinear_sobolev", "gradient_form",
        "spacetime_sobolev", "energy_estimate", "moser_iterate", "sup_bound", "extension_monitor",
        "blowup_sequence", "evolution_residuals"};
    return names;
}

struct RunConfig
{
    std::string mesh = "icosphere:3";
    int n = 2;
    int k = 2;
    std::vector<double> alphas = {4.0, 5.0};
    std::optional<double> T;
    std::optional<double> blowup_threshold;
    int snapshot_stride = 20;
    std::set<std::string> checks;
    std::string output_dir = "hkflow_out";
    std::uint64_t seed = 0;

    double dt_safety = 0.2;
    std::optional<double> fixed_dt;
    double quality_floor = 0.05;
    double tangential_smoothing = 1.0;
    /// Pinching constant for the extension monitor.
    double pinching_C = 0.5;
    int blowup_count = 3;
    /// Moser exponent for the energy estimate.
    double beta = 2.0;
    int moser_steps = 6;

    /// Every known key, in a stable order.
    static const std::vector<std::string>& keys();
    static RunConfig from(const KeyValues& kv);

    /// Checks settings and the preconditions of every requested check.
    void validate() const;
    FlowParams flow_params() const;
    KeyValues to_key_values() const;
};

/// Shortest text that reads back to the same double.
std::string format_number(double x);
std::vector<double> parse_list(const std::string& text, const std::string& key);

} // namespace hkflow::cli
