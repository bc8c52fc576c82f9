#include "json_out.hpp"

#include <cmath>

namespace hkflow::cli {

json number(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

namespace {

json number_map(const std::map<std::string, double>& m)
{
    json out = json::object();
    for (const auto& [k, v] : m) out[k] = number(v);
    return out;
}

json number_list(const std::vector<double>& v)
{
    json out = json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

} // namespace

json to_json(const InequalityReport& r)
{
    return {
        {"name", r.name},
        {"lhs", number(r.lhs)},
        {"rhs", number(r.rhs)},
        {"ratio", number(r.ratio)},
        {"holds", r.holds},
        {"constants", number_map(r.constants)},
        {"factors", number_map(r.factors)},
    };
}

json to_json(const NonlinearSobolevReports& r)
{
    return {{"lp_form", to_json(r.lp_form)}, {"l2_form", to_json(r.l2_form)}};
}

json to_json(const DivergenceTrend& t)
{
    return {
        {"fitted", t.fitted},
        {"diverging", t.diverging},
        {"slope", number(t.slope)},
        {"slope_stderr", number(t.slope_stderr)},
        {"x_start", number(t.x_start)},
        {"x_end", number(t.x_end)},
        {"blocks", t.blocks},
    };
}

json to_json(const ExtensionReport& r)
{
    return {
        {"condition_a",
            {
                {"C_used", number(r.condition_a.C_used)},
                {"min_pinching_over_run", number(r.condition_a.min_pinching_over_run)},
                {"holds", r.condition_a.holds},
            }},
        {"condition_b",
            {
                {"alpha", number(r.condition_b.alpha)},
                {"accumulated_norm", number(r.condition_b.accumulated_norm)},
                {"diverging", r.condition_b.diverging},
                {"informative", r.condition_b.informative},
                {"trend", to_json(r.condition_b.trend)},
            }},
        {"verdict", std::string(to_string(r.verdict))},
        {"blowup", r.blowup},
        {"warnings", r.warnings},
    };
}

json to_json(const EvolutionResiduals& r)
{
    return {
        {"triples", r.triples},
        {"volume_form_max", number(r.volume_form_max)},
        {"volume_form_mean", number(r.volume_form_mean)},
        {"curvature_max", number(r.curvature_max)},
        {"curvature_mean", number(r.curvature_mean)},
        {"sphere_max", number(r.sphere_max)},
        {"sphere_mean", number(r.sphere_mean)},
    };
}

json to_json(const MoserIteration& it)
{
    bool bounded = true;
    for (std::size_t m = 0; m < it.norms.size(); ++m) bounded = bounded && it.norms[m] <= it.bounds[m];
    return {
        {"window_starts", number_list(it.window_starts)},
        {"exponents", number_list(it.exponents)},
        {"norms", number_list(it.norms)},
        {"bounds", number_list(it.bounds)},
        {"sup_tail", number(it.sup_tail)},
        {"bounded", bounded},
        {"E_beta0", number(it.constants.E(it.constants.inputs.beta))},
        {"C1", number(it.constants.C1)},
        {"D", number(it.constants.D)},
    };
}

json to_json(const TmaxEstimate& e)
{
    return {
        {"tmax", number(e.tmax)},
        {"slope", number(e.slope)},
        {"intercept", number(e.intercept)},
        {"rate", number(e.rate)},
        {"samples", e.samples},
        {"window_start", number(e.window_start)},
    };
}

json to_json(const SobolevConstants& c)
{
    return {
        {"n", c.n},
        {"k", c.k},
        {"volume", number(c.volume)},
        {"T", number(c.T)},
        {"omega_n", number(c.omega_n)},
        {"Q_k", number(c.Q_k)},
        {"gamma", number(c.gamma)},
        {"c_n", number(c.c_n)},
        {"c_nk", number(c.c_nk)},
        {"a_nk", number(c.a_nk)},
        {"A_nk", number(c.A_nk)},
        {"A_hat_nk", number(c.A_hat_nk)},
        {"A_tilde_nk", number(c.A_tilde_nk)},
        {"B_nkT", number(c.B_nkT)},
    };
}

json to_json(const MoserConstants& c)
{
    return {
        {"beta", number(c.inputs.beta)},
        {"q", number(c.inputs.q)},
        {"C0q", number(c.C0q)},
        {"C0inf", number(c.C0inf)},
        {"C1", number(c.C1)},
        {"C2", number(c.C2)},
        {"nu_q", number(c.nu_q)},
        {"B_tilde", number(c.B_tilde)},
        {"C_full", number(c.C_full)},
        {"D", number(c.D)},
        {"C_n", number(c.C_n)},
        {"E_beta", number(c.E(c.inputs.beta))},
        {"F_final", number(c.F_final)},
    };
}

json to_json(const BlowupEntry& e)
{
    return {
        {"i", e.i},
        {"state_index", e.state_index},
        {"t_i", number(e.t_i)},
        {"x_i", e.x_i},
        {"Q_i", number(e.Q_i)},
        {"max_rescaled_pow", number(e.max_rescaled_pow)},
        {"value_at_x", number(e.value_at_x)},
        {"min_rescaled_principal", number(e.min_rescaled_principal)},
        {"max_rescaled_principal", number(e.max_rescaled_principal)},
        {"curvature_in_bounds", e.curvature_in_bounds},
        {"pinching_ratio_initial", number(e.pinching_ratio_initial)},
        {"pinching_ratio_rescaled", number(e.pinching_ratio_rescaled)},
    };
}

json error_json(ErrorCode code, const std::string& message)
{
    return {{"error", std::string(to_string(code))}, {"message", message}};
}

} // namespace hkflow::cli
