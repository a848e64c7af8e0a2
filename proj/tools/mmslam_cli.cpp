#include "mmslam/mmslam.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

int exit_code(mmslam_status status) {
  switch (status) {
    case MMSLAM_OK:
      return 0;
    case MMSLAM_CONFIG_ERROR:
      return 2;
    case MMSLAM_DIVERGENCE:
      return 3;
    default:
      return 1;
  }
}

int report(mmslam_status status, const char* what) {
  std::cerr << "mmslam: " << what << ": " << mmslam_last_error() << '\n';
  return exit_code(status);
}

struct RunArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> particles;
  bool known_vehicle = false;
  std::string out_dir = ".";
  std::optional<std::string> dump_scans;
  std::optional<std::string> replay_scans;
  bool quiet = false;
};

int run_command(const RunArgs& args) {
  mmslam_config* config = nullptr;
  mmslam_status s = mmslam_config_load_file(args.config_path.c_str(), &config);
  if (s != MMSLAM_OK) return report(s, "config");

  const auto cleanup = [&](int code) {
    mmslam_config_destroy(config);
    return code;
  };
  if (args.seed) mmslam_config_set_seed(config, *args.seed);
  if (args.mode) {
    const mmslam_mode mode =
        *args.mode == "specular_only" ? MMSLAM_MODE_SPECULAR_ONLY : MMSLAM_MODE_ALL_PATHS;
    mmslam_config_set_mode(config, mode);
  }
  if (args.particles) {
    s = mmslam_config_set_particles(config, *args.particles);
    if (s != MMSLAM_OK) return cleanup(report(s, "config"));
  }

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) {
    std::cerr << "mmslam: cannot create " << args.out_dir << ": " << ec.message() << '\n';
    return cleanup(1);
  }

  mmslam_run_options options{};
  options.known_vehicle = args.known_vehicle ? 1 : 0;
  options.dump_scans_path = args.dump_scans ? args.dump_scans->c_str() : nullptr;
  options.replay_scans_path = args.replay_scans ? args.replay_scans->c_str() : nullptr;

  mmslam_result* result = nullptr;
  s = mmslam_run(config, &options, &result);
  if (s != MMSLAM_OK) return cleanup(report(s, "run"));

  const std::string csv = (std::filesystem::path(args.out_dir) / "steps.csv").string();
  const std::string json = (std::filesystem::path(args.out_dir) / "result.json").string();
  int code = 0;
  if ((s = mmslam_result_write_csv(result, csv.c_str())) != MMSLAM_OK ||
      (s = mmslam_result_write_json(result, json.c_str())) != MMSLAM_OK) {
    code = report(s, "output");
  } else if (!args.quiet) {
    double wall = 0.0;
    mmslam_step last{};
    const std::size_t n = mmslam_result_step_count(result);
    for (std::size_t i = 0; i < n; ++i) {
      mmslam_result_get_step(result, i, &last);
      wall += last.wall_time_s;
    }
    std::fprintf(stderr,
                 "steps %zu  final GOSPA %.3f  position error %.3f m  landmarks %d  (%.2f s)\n",
                 n, last.gospa_total,
                 std::sqrt(last.abs_error[0] * last.abs_error[0] +
                           last.abs_error[1] * last.abs_error[1]),
                 last.landmarks, wall);
  }
  mmslam_result_destroy(result);
  return cleanup(code);
}

int default_config_command(const std::optional<std::string>& out_path) {
  mmslam_config* config = nullptr;
  mmslam_status s = mmslam_config_default(&config);
  if (s != MMSLAM_OK) return report(s, "config");
  const char* json = nullptr;
  s = mmslam_config_to_json(config, &json);
  int code = 0;
  if (s != MMSLAM_OK) {
    code = report(s, "config");
  } else if (out_path) {
    std::FILE* f = std::fopen(out_path->c_str(), "wb");
    if (!f) {
      std::cerr << "mmslam: cannot write " << *out_path << '\n';
      code = 1;
    } else {
      std::fputs(json, f);
      std::fputc('\n', f);
      std::fclose(f);
    }
  } else {
    std::cout << json << '\n';
  }
  mmslam_config_destroy(config);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmWave PMBM SLAM simulator"};
  app.set_version_flag("--version", std::string(mmslam_version()));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate a scenario and run the filter");
  run->add_option("--config", run_args.config_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "Override the scenario seed");
  run->add_option("--mode", run_args.mode, "Likelihood mode")
      ->check(CLI::IsMember({"all_paths", "specular_only"}));
  run->add_option("--particles", run_args.particles, "Override the particle count");
  run->add_flag("--known-vehicle", run_args.known_vehicle,
                "Feed the true vehicle state (mapping only)");
  run->add_option("--out-dir", run_args.out_dir, "Directory for steps.csv and result.json");
  run->add_option("--dump-scans", run_args.dump_scans, "Write generated scans as JSON lines");
  run->add_option("--replay-scans", run_args.replay_scans, "Read scans from a JSON-lines dump")
      ->check(CLI::ExistingFile);
  run->add_flag("--quiet", run_args.quiet, "Suppress the summary line");

  std::optional<std::string> default_out;
  auto* defaults = app.add_subcommand("default-config", "Print the default scenario as JSON");
  defaults->add_option("--out", default_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // Argument errors are configuration errors.
    return code == 0 ? 0 : 2;
  }
  if (*run) return run_command(run_args);
  if (*defaults) return default_config_command(default_out);
  return 1;
}
