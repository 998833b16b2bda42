#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deglab/space.hpp"

namespace deglab {

struct GridBlock {
  int dim = 1;
  double extent = 8.0;
  int nodes_per_axis = 64;
  Boundary boundary = Boundary::periodic;
};

struct PresetBlock {
  std::string preset;
  nlohmann::json params = nlohmann::json::object();
};

struct ExperimentSpec {
  int index = 0;
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

// One JSON document drives a run; see configs/ for samples. Parsing validates
// structure eagerly and reports the offending field through ConfigError.
struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int workers = 1;
  bool override_validity = false;
  GridBlock space;
  double shift = 1.0;
  PresetBlock field{"identity", nlohmann::json::object()};
  PresetBlock cutoff{"constant", nlohmann::json::object()};
  std::optional<PresetBlock> cutoff_tilde;
  std::optional<PresetBlock> region;
  std::vector<ExperimentSpec> experiments;
  nlohmann::json echo;  // the parsed document, echoed into the report
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// Deterministic preset catalogue (field, cutoff, region, multiplier) with
// parameter schemas; used by the `presets` CLI subcommand.
std::string presets_text();

// Experiment kinds accepted in configs, sorted.
const std::vector<std::string>& experiment_kinds();

}  // namespace deglab
