// Command-line front end; talks to the library exclusively through the C API.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "deglab.h"

namespace {

int exit_code_for(deglab_status s) {
  switch (s) {
    case DEGLAB_OK:
      return 0;
    case DEGLAB_E_CHECK_FAILED:
      return 1;
    default:
      return 2;
  }
}

int run_command(const std::string& config_path, const std::string& output_dir, int workers,
                bool override_validity) {
  deglab_config* cfg = nullptr;
  deglab_status s = deglab_config_load(config_path.c_str(), &cfg);
  if (s != DEGLAB_OK) {
    std::fprintf(stderr, "error: %s\n", deglab_last_error());
    return exit_code_for(s);
  }
  if (!output_dir.empty()) deglab_config_set_output_dir(cfg, output_dir.c_str());
  if (workers > 0) {
    s = deglab_config_set_workers(cfg, workers);
    if (s != DEGLAB_OK) {
      std::fprintf(stderr, "error: %s\n", deglab_last_error());
      deglab_config_free(cfg);
      return exit_code_for(s);
    }
  }
  if (override_validity) deglab_config_set_override_validity(cfg, 1);

  deglab_report* rep = nullptr;
  s = deglab_run(cfg, &rep);
  deglab_config_free(cfg);
  if (!rep) {
    std::fprintf(stderr, "error: %s\n", deglab_last_error());
    return exit_code_for(s);
  }
  std::printf("pass: %d  fail: %d  flagged: %d\n", deglab_report_pass_count(rep),
              deglab_report_fail_count(rep), deglab_report_flag_count(rep));
  if (s == DEGLAB_E_CHECK_FAILED) std::fprintf(stderr, "error: %s\n", deglab_last_error());
  deglab_report_free(rep);
  return exit_code_for(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for degenerate divergence-form operators"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  int workers = 0;
  bool override_validity = false;

  auto* run = app.add_subcommand("run", "Run the experiments described by a JSON config");
  run->add_option("config", config_path, "Path to the config file")->required();
  run->add_option("--output-dir", output_dir, "Override the configured output directory");
  run->add_option("--workers", workers, "Number of worker threads");
  run->add_flag("--override-validity", override_validity,
                "Accept t values outside the validity window (results are flagged)");

  auto* presets = app.add_subcommand("presets", "List presets and experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (presets->parsed()) {
    char* text = deglab_presets();
    if (!text) return 2;
    std::fputs(text, stdout);
    deglab_string_free(text);
    return 0;
  }
  return run_command(config_path, output_dir, workers, override_validity);
}
