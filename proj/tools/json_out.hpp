#pragma once

#include <hkflow/hkflow.hpp>

#include <json.hpp>

namespace hkflow::cli {

using json = nlohmann::json;

/// Non-finite values become null.
json number(double x);

json to_json(const InequalityReport& r);
json to_json(const NonlinearSobolevReports& r);
json to_json(const ExtensionReport& r);
json to_json(const DivergenceTrend& t);
json to_json(const EvolutionResiduals& r);
json to_json(const MoserIteration& it);
json to_json(const TmaxEstimate& e);
json to_json(const SobolevConstants& c);
json to_json(const MoserConstants& c);
json to_json(const BlowupEntry& e);

json error_json(ErrorCode code, const std::string& message);

} // namespace hkflow::cli
