#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "deglab/common.hpp"
#include "deglab/config.hpp"

using namespace deglab;
using nlohmann::json;

namespace {

json minimal_config() {
  return json{{"experiments", json::array({json{{"kind", "gaussian"}}})}};
}

template <typename Fn>
std::string error_field(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.field;
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("defaults of a minimal config") {
  auto cfg = parse_config(minimal_config());
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.seed == 1);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.workers == 1);
  CHECK_FALSE(cfg.override_validity);
  CHECK(cfg.space.dim == 1);
  CHECK(cfg.space.extent == doctest::Approx(8.0));
  CHECK(cfg.space.nodes_per_axis == 64);
  CHECK(cfg.space.boundary == Boundary::periodic);
  CHECK(cfg.shift == doctest::Approx(1.0));
  CHECK(cfg.field.preset == "identity");
  CHECK(cfg.cutoff.preset == "constant");
  CHECK_FALSE(cfg.cutoff_tilde.has_value());
  CHECK_FALSE(cfg.region.has_value());
  REQUIRE(cfg.experiments.size() == 1);
  CHECK(cfg.experiments[0].kind == "gaussian");
  CHECK(cfg.experiments[0].index == 0);
  CHECK(cfg.echo == minimal_config());
}

TEST_CASE("structural errors name the offending field") {
  CHECK(error_field([] { parse_config(json::array()); }) == "root");

  auto doc = minimal_config();
  doc["schema_version"] = 2;
  CHECK(error_field([&] { parse_config(doc); }) == "schema_version");

  doc = minimal_config();
  doc["workers"] = 0;
  CHECK(error_field([&] { parse_config(doc); }) == "workers");
  doc["workers"] = 65;
  CHECK(error_field([&] { parse_config(doc); }) == "workers");

  doc = minimal_config();
  doc["space"] = json{{"nodes_per_axis", 100}};
  CHECK(error_field([&] { parse_config(doc); }) == "space");
  doc["space"] = json{{"boundary", "dirichlet"}};
  CHECK(error_field([&] { parse_config(doc); }) == "space.boundary");

  doc = minimal_config();
  doc["shift"] = 0.0;
  CHECK(error_field([&] { parse_config(doc); }) == "shift");

  doc = minimal_config();
  doc["field"] = json{{"params", json::object()}};
  CHECK(error_field([&] { parse_config(doc); }) == "field");

  doc = json{{"schema_version", 1}};
  CHECK(error_field([&] { parse_config(doc); }) == "experiments");
  doc["experiments"] = json::array();
  CHECK(error_field([&] { parse_config(doc); }) == "experiments");
  doc["experiments"] = json::array({json{{"t_grid", json::array({0.1})}}});
  CHECK(error_field([&] { parse_config(doc); }) == "experiments");
}

TEST_CASE("experiment validation") {
  auto doc = minimal_config();
  doc["experiments"][0]["kind"] = "fourier";
  CHECK(error_field([&] { parse_config(doc); }) == "kind");

  doc = minimal_config();
  doc["experiments"][0] = json{{"kind", "multiplier_osc"}, {"s", 1.0}};
  CHECK(error_field([&] { parse_config(doc); }) == "s");
  doc["experiments"][0]["s"] = 1.01;
  CHECK_NOTHROW(parse_config(doc));

  doc = minimal_config();
  doc["experiments"][0] = json{{"kind", "dm"}, {"delta", -2.0}};
  CHECK(error_field([&] { parse_config(doc); }) == "delta");

  doc = minimal_config();
  doc["experiments"][0] = json{{"kind", "multiplier_osc"},
                               {"multiplier", json{{"params", json::object()}}}};
  CHECK(error_field([&] { parse_config(doc); }) == "multiplier");
}

TEST_CASE("time grids are held to the validity window") {
  // default space: h = 1/8, window [1/16, 4]
  auto doc = minimal_config();
  doc["experiments"][0]["t_grid"] = json::array({8.0});
  CHECK(error_field([&] { parse_config(doc); }) == "t_grid");

  doc["override_validity"] = true;
  CHECK_NOTHROW(parse_config(doc));

  doc = minimal_config();
  doc["experiments"][0]["t_grid"] = json::array({0.1, 1.0});
  CHECK_NOTHROW(parse_config(doc));

  doc["experiments"][0]["t_grid"] = json{{"min", 0.1}, {"max", 1.0}, {"count", 5}};
  CHECK_NOTHROW(parse_config(doc));
  doc["experiments"][0]["t_grid"] = json{{"min", 0.0}, {"max", 1.0}, {"count", 5}};
  CHECK(error_field([&] { parse_config(doc); }) == "t_grid");
  doc["experiments"][0]["t_grid"] = "soon";
  CHECK(error_field([&] { parse_config(doc); }) == "t_grid");

  // mihlin scales live on the multiplier axis, not the grid
  doc = minimal_config();
  doc["experiments"][0] = json{{"kind", "mihlin"}, {"t_grid", json::array({30.0})}};
  CHECK_NOTHROW(parse_config(doc));
}

TEST_CASE("weak11 instance lists") {
  auto doc = minimal_config();
  doc["experiments"][0] = json{{"kind", "weak11"}, {"fit", "everything"}};
  CHECK(error_field([&] { parse_config(doc); }) == "fit");

  doc["experiments"][0]["fit"] = json::array({json{{"kind", "multiplier"}}});
  CHECK(error_field([&] { parse_config(doc); }) == "fit");

  doc["experiments"][0]["fit"] = json::array(
      {json{{"kind", "multiplier"}, {"preset", "heat"}, {"params", json{{"t", 1.0}}}}});
  doc["experiments"][0]["held_out"] = json::array({json{{"kind", "riesz"}, {"axis", 0}}});
  CHECK_NOTHROW(parse_config(doc));

  doc["experiments"][0]["held_out"] = json::array({json{{"kind", "wavelet"}}});
  CHECK(error_field([&] { parse_config(doc); }) == "held_out");
}

TEST_CASE("preset catalogue and kind list") {
  std::string text = presets_text();
  CHECK(text == presets_text());
  CHECK(text.find("bochner_riesz") != std::string::npos);
  CHECK(text.find("indicator_region") != std::string::npos);
  CHECK(text.find("plateau") != std::string::npos);

  const auto& kinds = experiment_kinds();
  CHECK(std::is_sorted(kinds.begin(), kinds.end()));
  for (const char* k : {"full", "gaussian", "weak11", "cz", "riesz", "mihlin"})
    CHECK(std::find(kinds.begin(), kinds.end(), k) != kinds.end());
  CHECK(kinds.size() == 11);
}

TEST_CASE("loading config files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "deglab_config_test";
  fs::create_directories(dir);

  CHECK(error_field([&] { load_config((dir / "absent.json").string()); }) == "config");

  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{not json";
  CHECK(error_field([&] { load_config(bad.string()); }) == "config");

  const fs::path good = dir / "good.json";
  std::ofstream(good) << minimal_config().dump();
  auto cfg = load_config(good.string());
  CHECK(cfg.experiments.size() == 1);
  fs::remove_all(dir);
}
