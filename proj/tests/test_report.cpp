#include <doctest.h>

#include <cstdlib>
#include <string>

#include "deglab/report.hpp"
#include "deglab/common.hpp"

using namespace deglab;
using nlohmann::json;

namespace {

json minimal_report() {
  return json{
      {"schema_version", 1},
      {"tool", json{{"name", "x"}, {"version", "0"}}},
      {"config", json::object()},
      {"experiments",
       json::array({json{{"index", 0},
                         {"kind", "gaussian"},
                         {"status", "pass"},
                         {"csv", "tables/exp000_gaussian.csv"},
                         {"wall_time_s", 0.25},
                         {"summary", json::object()}}})},
      {"counts", json{{"pass", 1}, {"fail", 0}, {"flagged", 0}}},
  };
}

}  // namespace

TEST_CASE("shortest round-trip formatting") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    double v = std::ldexp(rng.uniform(-1, 1), rng.uniform_int(120) - 60);
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("csv body") {
  std::vector<CsvRow> rows;
  CsvRow plain;
  plain.experiment = "gaussian";
  plain.param_json = "{}";
  plain.value_name = "fitted_constant";
  plain.value = 0.25;
  rows.push_back(plain);

  CsvRow quoted;
  quoted.experiment = "dm";
  quoted.param_json = "{\"t\":0.1,\"role\":\"fit\"}";
  quoted.value_name = "w_kernel";
  quoted.value = 1.5;
  quoted.reference = 2.0;
  quoted.ratio = 0.75;
  rows.push_back(quoted);

  std::string text = csv_text(rows);
  CHECK(text.find("experiment,param_json,value_name,value,reference,ratio\n") == 0);
  CHECK(text.find("gaussian,{},fitted_constant,0.25,,\n") != std::string::npos);
  // embedded commas and quotes force quoting with doubled quotes
  CHECK(text.find("dm,\"{\"\"t\"\":0.1,\"\"role\"\":\"\"fit\"\"}\",w_kernel,1.5,2,0.75\n") !=
        std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');

  CHECK(csv_text({}) == "experiment,param_json,value_name,value,reference,ratio\n");
}

TEST_CASE("report schema validation") {
  CHECK_NOTHROW(validate_report(minimal_report()));

  auto doc = minimal_report();
  doc.erase("counts");
  CHECK_THROWS_AS(validate_report(doc), std::logic_error);

  doc = minimal_report();
  doc["experiments"][0]["status"] = "maybe";
  CHECK_THROWS_AS(validate_report(doc), std::logic_error);

  doc = minimal_report();
  doc["counts"]["pass"] = 2;
  CHECK_THROWS_AS(validate_report(doc), std::logic_error);

  doc = minimal_report();
  doc["experiments"][0].erase("wall_time_s");
  CHECK_THROWS_AS(validate_report(doc), std::logic_error);

  doc = minimal_report();
  doc["schema_version"] = "one";
  CHECK_THROWS_AS(validate_report(doc), std::logic_error);
}

TEST_CASE("plot companion") {
  std::string script = plots_script_text();
  CHECK(script.find("matplotlib") != std::string::npos);
  CHECK(script.find(".csv") != std::string::npos);
  CHECK(script == plots_script_text());
}
