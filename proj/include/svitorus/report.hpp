#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace svt {

/// Result of one verified inequality. The pass rule is fixed:
/// margin >= -3*stderr - abs_tol, with margin = right - left.
struct VerifyReport {
    std::string name;
    double left = 0.0;
    double right = 0.0;
    double stderr_ = 0.0;
    double abs_tol = 0.0;
    double runtime_seconds = 0.0;
    bool pass = false;
    std::map<std::string, double> constants_used;
    std::string notes;

    double margin() const { return right - left; }

    void finalize() { pass = margin() >= -3.0 * stderr_ - abs_tol; }
};

/// Result of one pointwise coefficient-condition check.
/// pass <=> residual <= tolerance. For condition (E) the residual is the
/// negated smallest Gram eigenvalue (so the rule reads kappa >= 1e-10) and
/// the measured kappa is reported separately.
struct ConditionReport {
    std::string condition;
    double residual = 0.0;
    std::array<int, 2> location = {0, 0};
    double tolerance = 0.0;
    bool pass = false;
    double kappa = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, double> constants;

    void finalize() { pass = residual <= tolerance; }
};

}  // namespace svt
