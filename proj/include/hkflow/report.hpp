#pragma once

#include <map>
#include <string>

namespace hkflow {

/// One evaluated inequality instance lhs <= rhs.
struct InequalityReport
{
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    /// lhs / rhs, defined as 0 when both sides vanish.
    double ratio = 0.0;
    bool holds = false;
    std::map<std::string, double> constants;
    /// Norms and other measured quantities entering either side.
    std::map<std::string, double> factors;

    void finalize()
    {
        if (lhs == 0.0 && rhs == 0.0) {
            ratio = 0.0;
            holds = true;
            return;
        }
        ratio = lhs / rhs;
        holds = lhs <= rhs;
    }
};

} // namespace hkflow
