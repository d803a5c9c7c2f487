#pragma once

#include "relloc/cli/config.hpp"
#include "relloc/cli/output.hpp"

namespace relloc::cli {

/// Runs the configured experiment. Library errors propagate unchanged.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace relloc::cli
