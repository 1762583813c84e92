#pragma once

#include "config.hpp"
#include "report.hpp"

namespace gmclab {

// Executes the configured experiment. Writes report files and per-kind
// CSV artifacts under config.out_dir when it is nonempty. Deterministic:
// identical configs (including seed) produce byte-identical reports.
RunReport run_experiment(const ExperimentConfig& config);

}  // namespace gmclab
