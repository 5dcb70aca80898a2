#pragma once

#include <string>

#include "fraclab/config.hpp"

namespace fraclab {

/// Exit codes: 0 pass, 1 failed pass-criteria, 2 config parse error,
/// 3 precondition violation, 4 numerical failure.
int run_experiment(const ExperimentConfig& cfg);
int run_config_file(const std::string& path);

} // namespace fraclab
