#include "deglab.h"

#include <cstring>
#include <new>
#include <string>
#include <system_error>

#include "deglab/common.hpp"
#include "deglab/config.hpp"
#include "deglab/runner.hpp"

struct deglab_config {
  deglab::ExperimentConfig cfg;
};

struct deglab_report {
  deglab::RunReport report;
};

namespace {

thread_local std::string g_last_error;

deglab_status fail(deglab_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename Fn>
deglab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const deglab::ConfigError& e) {
    return fail(DEGLAB_E_CONFIG, "config field '" + e.field + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(DEGLAB_E_INVALID_ARG, e.what());
  } catch (const std::system_error& e) {
    return fail(DEGLAB_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DEGLAB_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DEGLAB_E_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* deglab_version(void) { return "0.1.0"; }

const char* deglab_last_error(void) { return g_last_error.c_str(); }

deglab_status deglab_config_load(const char* path, deglab_config** out) {
  if (!path || !out) return fail(DEGLAB_E_INVALID_ARG, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* handle = new deglab_config{deglab::load_config(path)};
    *out = handle;
    g_last_error.clear();
    return DEGLAB_OK;
  });
}

deglab_status deglab_config_parse(const char* json_text, deglab_config** out) {
  if (!json_text || !out) return fail(DEGLAB_E_INVALID_ARG, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw deglab::ConfigError("config", std::string("config is not valid JSON: ") + e.what());
    }
    auto* handle = new deglab_config{deglab::parse_config(doc)};
    *out = handle;
    g_last_error.clear();
    return DEGLAB_OK;
  });
}

deglab_status deglab_config_set_output_dir(deglab_config* cfg, const char* dir) {
  if (!cfg || !dir) return fail(DEGLAB_E_INVALID_ARG, "null argument");
  cfg->cfg.output_dir = dir;
  return DEGLAB_OK;
}

deglab_status deglab_config_set_workers(deglab_config* cfg, int workers) {
  if (!cfg) return fail(DEGLAB_E_INVALID_ARG, "null argument");
  if (workers < 1 || workers > 64) return fail(DEGLAB_E_CONFIG, "workers must be between 1 and 64");
  cfg->cfg.workers = workers;
  return DEGLAB_OK;
}

deglab_status deglab_config_set_override_validity(deglab_config* cfg, int enabled) {
  if (!cfg) return fail(DEGLAB_E_INVALID_ARG, "null argument");
  cfg->cfg.override_validity = enabled != 0;
  return DEGLAB_OK;
}

void deglab_config_free(deglab_config* cfg) { delete cfg; }

deglab_status deglab_run(const deglab_config* cfg, deglab_report** out) {
  if (!cfg || !out) return fail(DEGLAB_E_INVALID_ARG, "null argument");
  *out = nullptr;
  return guarded([&]() -> deglab_status {
    auto* handle = new deglab_report{deglab::run_experiments(cfg->cfg)};
    *out = handle;
    g_last_error.clear();
    if (handle->report.fail_count > 0) {
      g_last_error = "one or more gated experiments failed";
      return DEGLAB_E_CHECK_FAILED;
    }
    return DEGLAB_OK;
  });
}

int deglab_report_pass_count(const deglab_report* rep) {
  return rep ? rep->report.pass_count : 0;
}

int deglab_report_fail_count(const deglab_report* rep) {
  return rep ? rep->report.fail_count : 0;
}

int deglab_report_flag_count(const deglab_report* rep) {
  return rep ? rep->report.flag_count : 0;
}

char* deglab_report_json(const deglab_report* rep) {
  if (!rep) return nullptr;
  return dup_string(rep->report.json.dump(2));
}

void deglab_report_free(deglab_report* rep) { delete rep; }

char* deglab_presets(void) { return dup_string(deglab::presets_text()); }

void deglab_string_free(char* s) { delete[] s; }

}  // extern "C"
