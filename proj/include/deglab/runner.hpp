#pragma once

#include <string>

#include <json.hpp>

#include "deglab/config.hpp"

namespace deglab {

struct RunReport {
  nlohmann::json json;
  int pass_count = 0;
  int fail_count = 0;
  int flag_count = 0;
};

// Builds the space/field/operators once, runs every experiment (worker
// threads across experiments, deterministic sequential math inside each),
// writes <output_dir>/report.json, <output_dir>/tables/*.csv and the
// companion plot script, and returns the report.
RunReport run_experiments(const ExperimentConfig& cfg);

}  // namespace deglab
