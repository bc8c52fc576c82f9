#include "config.hpp"

#include <hkflow/common.hpp>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

namespace hkflow::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& key)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used > 0 && used == text.size(), ErrorCode::ParseError, "bad number '" + text + "' for " + key);
    return v;
}

long long to_integer(const std::string& text, const std::string& key)
{
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used > 0 && used == text.size(), ErrorCode::ParseError, "bad integer '" + text + "' for " + key);
    return v;
}

std::optional<double> optional_number(const std::string& text, const std::string& key)
{
    if (text.empty() || text == "none") return std::nullopt;
    return to_double(text, key);
}

std::string join(const std::vector<std::string>& parts)
{
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
    return out;
}

} // namespace

KeyValues parse_config(const std::string& text)
{
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::ParseError,
            "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        require(!key.empty(), ErrorCode::ParseError, "line " + std::to_string(lineno) + ": empty key");
        const auto& known = RunConfig::keys();
        require(std::find(known.begin(), known.end(), key) != known.end(), ErrorCode::ParseError,
            "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        require(!kv.count(key), ErrorCode::ParseError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues read_config(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), ErrorCode::IoError, "cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& text, const std::string& key)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(item, key));
    }
    return out;
}

const std::vector<std::string>& RunConfig::keys()
{
    static const std::vector<std::string> names = {"mesh", "n", "k", "alphas", "T", "blowup_threshold",
        "snapshot_stride", "checks", "output_dir", "seed", "dt_safety", "fixed_dt", "quality_floor",
        "tangential_smoothing", "pinching_C", "blowup_count", "beta", "moser_steps"};
    return names;
}

RunConfig RunConfig::from(const KeyValues& kv)
{
    RunConfig c;
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto v = get("mesh")) c.mesh = *v;
    if (auto v = get("n")) c.n = static_cast<int>(to_integer(*v, "n"));
    if (auto v = get("k")) c.k = static_cast<int>(to_integer(*v, "k"));
    if (auto v = get("alphas")) c.alphas = parse_list(*v, "alphas");
    if (auto v = get("T")) c.T = optional_number(*v, "T");
    if (auto v = get("blowup_threshold")) c.blowup_threshold = optional_number(*v, "blowup_threshold");
    if (auto v = get("snapshot_stride")) c.snapshot_stride = static_cast<int>(to_integer(*v, "snapshot_stride"));
    if (auto v = get("checks")) {
        std::istringstream in(*v);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty() || item == "none") continue;
            if (item == "all") {
                c.checks.insert(all_checks().begin(), all_checks().end());
                continue;
            }
            require(std::find(all_checks().begin(), all_checks().end(), item) != all_checks().end(),
                ErrorCode::ParseError, "unknown check '" + item + "'");
            c.checks.insert(item);
        }
    }
    if (auto v = get("output_dir")) c.output_dir = *v;
    if (auto v = get("seed")) {
        const long long s = to_integer(*v, "seed");
        require(s >= 0, ErrorCode::InvalidArgument, "seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get("dt_safety")) c.dt_safety = to_double(*v, "dt_safety");
    if (auto v = get("fixed_dt")) c.fixed_dt = optional_number(*v, "fixed_dt");
    if (auto v = get("quality_floor")) c.quality_floor = to_double(*v, "quality_floor");
    if (auto v = get("tangential_smoothing")) c.tangential_smoothing = to_double(*v, "tangential_smoothing");
    if (auto v = get("pinching_C")) c.pinching_C = to_double(*v, "pinching_C");
    if (auto v = get("blowup_count")) c.blowup_count = static_cast<int>(to_integer(*v, "blowup_count"));
    if (auto v = get("beta")) c.beta = to_double(*v, "beta");
    if (auto v = get("moser_steps")) c.moser_steps = static_cast<int>(to_integer(*v, "moser_steps"));
    return c;
}

void RunConfig::validate() const
{
    require(n == 2, ErrorCode::HypothesisViolated, "mesh flows need n = 2 (surfaces in R^3)");
    require(k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
    require(T || blowup_threshold, ErrorCode::InvalidArgument, "set T or blowup_threshold");
    require(!T || (*T > 0.0 && std::isfinite(*T)), ErrorCode::InvalidArgument, "T must be positive");
    require(!blowup_threshold || *blowup_threshold > 0.0, ErrorCode::InvalidArgument,
        "blowup_threshold must be positive");
    require(snapshot_stride >= 1, ErrorCode::InvalidArgument, "snapshot_stride must be >= 1");
    for (double a : alphas) require(a > 0.0 && std::isfinite(a), ErrorCode::InvalidArgument, "alphas must be positive");
    require(!output_dir.empty(), ErrorCode::InvalidArgument, "output_dir is empty");
    require(blowup_count >= 1, ErrorCode::InvalidArgument, "blowup_count must be >= 1");
    require(moser_steps >= 0, ErrorCode::InvalidArgument, "moser_steps must be >= 0");
    flow_params().validate();

    auto wants = [&](const char* name) { return checks.count(name) > 0; };
    const double beta_sup = double(n + k + 1) / k;
    if (wants("moser_iterate") || wants("sup_bound")) {
        require(beta_sup >= 2.0, ErrorCode::HypothesisViolated,
            "moser_iterate and sup_bound need (n+k+1)/k >= 2, i.e. n + 1 >= k");
    }
    if (wants("energy_estimate")) require(beta >= 2.0, ErrorCode::BetaTooSmall, "beta must be >= 2");
    if (wants("nonlinear_sobolev") || wants("gradient_form") || wants("spacetime_sobolev") ||
        wants("energy_estimate") || wants("moser_iterate") || wants("sup_bound")) {
        require(k * n > k + 1 && (k >= 2 || n > 2), ErrorCode::HypothesisViolated,
            "the nonlinear Sobolev inequalities need kn > k + 1");
    }
    if (wants("blowup_sequence")) {
        require(blowup_threshold.has_value(), ErrorCode::HypothesisViolated,
            "blowup_sequence needs a run stopped by blowup_threshold");
    }
}

FlowParams RunConfig::flow_params() const
{
    FlowParams p = FlowParams::power(k);
    p.dt_safety = dt_safety;
    p.fixed_dt = fixed_dt;
    p.stop_T = T;
    if (blowup_threshold) p.blowup_threshold = *blowup_threshold;
    p.quality_floor = quality_floor;
    p.snapshot_stride = snapshot_stride;
    p.tangential_smoothing = tangential_smoothing;
    return p;
}

KeyValues RunConfig::to_key_values() const
{
    KeyValues kv;
    kv["mesh"] = mesh;
    kv["n"] = std::to_string(n);
    kv["k"] = std::to_string(k);
    std::vector<std::string> a;
    for (double x : alphas) a.push_back(format_number(x));
    kv["alphas"] = join(a);
    kv["T"] = T ? format_number(*T) : "none";
    kv["blowup_threshold"] = blowup_threshold ? format_number(*blowup_threshold) : "none";
    kv["snapshot_stride"] = std::to_string(snapshot_stride);
    kv["checks"] = checks.empty() ? "none" : join({checks.begin(), checks.end()});
    kv["output_dir"] = output_dir;
    kv["seed"] = std::to_string(seed);
    kv["dt_safety"] = format_number(dt_safety);
    kv["fixed_dt"] = fixed_dt ? format_number(*fixed_dt) : "none";
    kv["quality_floor"] = format_number(quality_floor);
    kv["tangential_smoothing"] = format_number(tangential_smoothing);
    kv["pinching_C"] = format_number(pinching_C);
    kv["blowup_count"] = std::to_string(blowup_count);
    kv["beta"] = format_number(beta);
    kv["moser_steps"] = std::to_string(moser_steps);
    return kv;
}

} // namespace hkflow::cli
