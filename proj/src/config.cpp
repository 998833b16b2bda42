#include "deglab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "deglab/common.hpp"
#include "deglab/media.hpp"
#include "deglab/multiplier.hpp"

namespace deglab {

namespace {

const std::set<std::string> kKinds = {"gaussian",       "supbounds", "complex_time", "offdiag",
                                      "dm",             "mihlin",    "multiplier_osc",
                                      "riesz",          "cz",        "weak11",       "full"};

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "neumann") return Boundary::neumann;
  throw ConfigError("space.boundary", "boundary must be 'periodic' or 'neumann'");
}

PresetBlock parse_preset_block(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("preset"))
    throw ConfigError(where, where + " must be an object with a 'preset' key");
  PresetBlock b;
  b.preset = j.at("preset").get<std::string>();
  b.params = j.value("params", nlohmann::json::object());
  return b;
}

void validate_s_field(const nlohmann::json& params, const std::string& exp_kind) {
  if (!params.contains("s")) return;
  double s = params.at("s").get<double>();
  try {
    holder_order(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("s", exp_kind + ": " + e.what());
  }
}

void validate_multiplier_block(const nlohmann::json& params, const std::string& key) {
  if (!params.contains(key)) return;
  const auto& m = params.at(key);
  if (!m.is_object() || !m.contains("preset"))
    throw ConfigError(key, "multiplier block must carry a 'preset'");
  // constructing the multiplier performs the full parameter validation
  make_multiplier(m.at("preset").get<std::string>(), m.value("params", nlohmann::json::object()));
}

void validate_t_grid(const nlohmann::json& params, const GridBlock& space, bool override_validity,
                     const std::string& kind) {
  if (!params.contains("t_grid")) return;
  const auto& tg = params.at("t_grid");
  std::vector<double> values;
  if (tg.is_array()) {
    for (const auto& v : tg) values.push_back(v.get<double>());
  } else if (tg.is_object()) {
    double lo = tg.value("min", 0.0), hi = tg.value("max", 0.0);
    int count = tg.value("count", 0);
    if (!(lo > 0) || !(hi >= lo) || count < 1)
      throw ConfigError("t_grid", kind + ": t_grid object needs positive min <= max and count >= 1");
    values = {lo, hi};
  } else {
    throw ConfigError("t_grid", kind + ": t_grid must be an array or {min,max,count}");
  }
  for (double t : values)
    if (!(t > 0)) throw ConfigError("t_grid", kind + ": t values must be positive");
  if (kind == "mihlin") return;  // pure multiplier scaling, no spatial window
  const double h = space.extent / space.nodes_per_axis;
  const double w0 = 4 * h * h, w1 = (space.extent / 4) * (space.extent / 4);
  for (double t : values) {
    if ((t < w0 || t > w1) && !override_validity)
      throw ConfigError("t_grid", kind + ": t = " + std::to_string(t) +
                                      " lies outside the validity window [" + std::to_string(w0) +
                                      ", " + std::to_string(w1) +
                                      "]; set override_validity to proceed");
  }
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds(kKinds.begin(), kKinds.end());
  return kinds;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("root", "config must be a JSON object");
  ExperimentConfig cfg;
  cfg.echo = doc;
  cfg.schema_version = doc.value("schema_version", 1);
  if (cfg.schema_version != 1)
    throw ConfigError("schema_version", "unsupported schema_version (expected 1)");
  cfg.seed = doc.value("seed", 1ull);
  cfg.output_dir = doc.value("output_dir", std::string("out"));
  cfg.workers = doc.value("workers", 1);
  if (cfg.workers < 1 || cfg.workers > 64)
    throw ConfigError("workers", "workers must be between 1 and 64");
  cfg.override_validity = doc.value("override_validity", false);

  if (doc.contains("space")) {
    const auto& sp = doc.at("space");
    cfg.space.dim = sp.value("dim", 1);
    cfg.space.extent = sp.value("extent", 8.0);
    cfg.space.nodes_per_axis = sp.value("nodes_per_axis", 64);
    cfg.space.boundary = parse_boundary(sp.value("boundary", std::string("periodic")));
  }
  try {
    build_grid(cfg.space.dim, cfg.space.extent, cfg.space.nodes_per_axis, cfg.space.boundary);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("space", e.what());
  }

  cfg.shift = doc.value("shift", 1.0);
  if (!(cfg.shift > 0)) throw ConfigError("shift", "shift must be positive");

  if (doc.contains("field")) cfg.field = parse_preset_block(doc.at("field"), "field");
  if (doc.contains("cutoff")) cfg.cutoff = parse_preset_block(doc.at("cutoff"), "cutoff");
  if (doc.contains("cutoff_tilde"))
    cfg.cutoff_tilde = parse_preset_block(doc.at("cutoff_tilde"), "cutoff_tilde");
  if (doc.contains("region")) cfg.region = parse_preset_block(doc.at("region"), "region");

  if (!doc.contains("experiments") || !doc.at("experiments").is_array() ||
      doc.at("experiments").empty())
    throw ConfigError("experiments", "config needs a nonempty 'experiments' array");

  int index = 0;
  for (const auto& e : doc.at("experiments")) {
    if (!e.is_object() || !e.contains("kind"))
      throw ConfigError("experiments", "each experiment needs a 'kind'");
    ExperimentSpec spec;
    spec.kind = e.at("kind").get<std::string>();
    if (!kKinds.count(spec.kind))
      throw ConfigError("kind", "unknown experiment kind '" + spec.kind + "'");
    spec.params = e;
    spec.params.erase("kind");
    validate_s_field(spec.params, spec.kind);
    validate_multiplier_block(spec.params, "multiplier");
    validate_t_grid(spec.params, cfg.space, cfg.override_validity, spec.kind);
    if (spec.params.contains("delta") && !(spec.params.at("delta").get<double>() > 0))
      throw ConfigError("delta", spec.kind + ": delta must be positive");
    if (spec.kind == "weak11") {
      for (const char* key : {"fit", "held_out"}) {
        if (!spec.params.contains(key)) continue;
        const auto& list = spec.params.at(key);
        if (!list.is_array())
          throw ConfigError(key, std::string("weak11: '") + key + "' must be an array");
        for (const auto& inst : list) {
          if (!inst.is_object()) throw ConfigError(key, "weak11: instances must be objects");
          const std::string ik = inst.value("kind", std::string("multiplier"));
          if (ik == "multiplier") {
            if (!inst.contains("preset"))
              throw ConfigError(key, "weak11: multiplier instance needs a 'preset'");
            make_multiplier(inst.at("preset").get<std::string>(),
                            inst.value("params", nlohmann::json::object()));
          } else if (ik != "riesz") {
            throw ConfigError(key, "weak11: instance kind must be 'multiplier' or 'riesz'");
          }
        }
      }
    }
    spec.index = index++;
    cfg.experiments.push_back(std::move(spec));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot read config file: " + path);
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::string presets_text() {
  std::string out;
  out += "coefficient fields:\n";
  out += "  anisotropic_plateau  params: center [per-axis], r_plateau, r_outer, eigs [per-axis]\n";
  out += "  identity             params: none\n";
  out += "  indicator_region     params: lo [per-axis], hi [per-axis]\n";
  out += "  plateau_bump         params: center [per-axis], r_plateau, r_outer\n";
  out += "cutoffs:\n";
  out += "  constant             params: value (default 1)\n";
  out += "  plateau              params: center [per-axis], r_inner, r_outer, margin (optional)\n";
  out += "  smooth_bump          params: center [per-axis], radius, margin (optional)\n";
  out += "regions:\n";
  out += "  all                  params: none\n";
  out += "  ball                 params: center [per-axis], radius\n";
  out += "  box                  params: lo [per-axis], hi [per-axis]\n";
  out += "multipliers:\n";
  out += "  bochner_riesz        params: alpha, R\n";
  out += "  constant             params: value (default 1)\n";
  out += "  heat                 params: t\n";
  out += "  imaginary_power      params: s\n";
  out += "  schrodinger          params: alpha, t\n";
  out += "  wave                 params: alpha, t\n";
  out += "experiment kinds:\n  ";
  const auto& kinds = experiment_kinds();
  for (size_t i = 0; i < kinds.size(); ++i) {
    out += kinds[i];
    out += (i + 1 < kinds.size()) ? ", " : "\n";
  }
  return out;
}

}  // namespace deglab
