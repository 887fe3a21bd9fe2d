#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svitorus/config.hpp"

namespace svt {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool force = false;
};

/// Exit codes: 0 success, 1 condition/inequality failure, 2 usage/config
/// error, 3 numerical failure. ConfigError and BlowupError propagate to the
/// caller, which maps them to 2 and 3.
int cmd_check(ExperimentConfig cfg, const CliOverrides& over);
int cmd_simulate(ExperimentConfig cfg, const CliOverrides& over);
int cmd_verify(ExperimentConfig cfg, std::vector<std::string> names, const CliOverrides& over);
int cmd_rate_study(ExperimentConfig cfg, const std::string& parameter, const CliOverrides& over);

}  // namespace svt
