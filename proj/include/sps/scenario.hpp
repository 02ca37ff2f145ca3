#pragma once

#include "sps/config.hpp"

namespace sps::scenario {

// Executes the configured scenario and writes its artifacts into cfg.out_dir.
// Raises ConfigError for a missing scenario name, PreconditionError when
// validate(cfg) reports violations, and NumericalError if a computation fails
// to converge.
void run(const config::ScenarioConfig& cfg);

}  // namespace sps::scenario
