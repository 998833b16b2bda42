#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace deglab {

// One long-format measurement row. param_json is a compact JSON object
// naming the parameters the value was measured at.
struct CsvRow {
  std::string experiment;
  std::string param_json;
  std::string value_name;
  double value = 0;
  std::optional<double> reference;
  std::optional<double> ratio;
};

// Shortest round-trip decimal formatting (printf %.17g), shared by every
// writer so reruns are byte-identical.
std::string format_double(double v);

// RFC-4180-style body, LF line endings, header included.
std::string csv_text(const std::vector<CsvRow>& rows);

void write_text_file(const std::string& path, const std::string& text);

// Structural validation of a run report document; throws std::logic_error
// naming the first violated requirement. The schema is documented in the
// README and enforced on every run.
void validate_report(const nlohmann::json& report);

// Companion plot script operating only on the CSV tables.
std::string plots_script_text();

}  // namespace deglab
