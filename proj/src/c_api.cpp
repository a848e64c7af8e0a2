#include "mmslam/mmslam.h"

#include "mmslam/config.hpp"
#include "mmslam/runner.hpp"

#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>

struct mmslam_config {
  mmslam::ScenarioConfig config;
  std::string json;
};

struct mmslam_result {
  mmslam::RunResult result;
};

namespace {

thread_local std::string g_last_error;

mmslam_status fail(mmslam_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
mmslam_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const mmslam::ConfigError& e) {
    return fail(MMSLAM_CONFIG_ERROR, e.what());
  } catch (const mmslam::FilterDivergence& e) {
    return fail(MMSLAM_DIVERGENCE, e.what());
  } catch (const mmslam::ScanIoError& e) {
    return fail(MMSLAM_IO_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MMSLAM_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(MMSLAM_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(MMSLAM_INTERNAL_ERROR, "unknown error");
  }
}

mmslam_status validated(mmslam_config* c) {
  c->config.validate();
  return MMSLAM_OK;
}

}  // namespace

extern "C" {

const char* mmslam_last_error(void) { return g_last_error.c_str(); }

const char* mmslam_version(void) { return "1.0.0"; }

mmslam_status mmslam_config_default(mmslam_config** out) {
  if (!out) return fail(MMSLAM_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] {
    *out = new mmslam_config{mmslam::default_scenario(), {}};
    return MMSLAM_OK;
  });
}

mmslam_status mmslam_config_load_file(const char* path, mmslam_config** out) {
  if (!path || !out) return fail(MMSLAM_INVALID_ARGUMENT, "path or out is NULL");
  return guarded([&] {
    *out = new mmslam_config{mmslam::load_scenario_file(path), {}};
    return MMSLAM_OK;
  });
}

mmslam_status mmslam_config_load_json(const char* json, mmslam_config** out) {
  if (!json || !out) return fail(MMSLAM_INVALID_ARGUMENT, "json or out is NULL");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      throw mmslam::ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    *out = new mmslam_config{mmslam::scenario_from_json(j), {}};
    return MMSLAM_OK;
  });
}

mmslam_status mmslam_config_set_seed(mmslam_config* config, uint64_t seed) {
  if (!config) return fail(MMSLAM_INVALID_ARGUMENT, "config is NULL");
  config->config.seed = seed;
  return MMSLAM_OK;
}

mmslam_status mmslam_config_set_mode(mmslam_config* config, mmslam_mode mode) {
  if (!config) return fail(MMSLAM_INVALID_ARGUMENT, "config is NULL");
  switch (mode) {
    case MMSLAM_MODE_ALL_PATHS:
      config->config.mode = mmslam::LikelihoodMode::kAllPaths;
      return MMSLAM_OK;
    case MMSLAM_MODE_SPECULAR_ONLY:
      config->config.mode = mmslam::LikelihoodMode::kSpecularOnly;
      return MMSLAM_OK;
  }
  return fail(MMSLAM_INVALID_ARGUMENT, "unknown mode");
}

mmslam_status mmslam_config_set_particles(mmslam_config* config, int particles) {
  if (!config) return fail(MMSLAM_INVALID_ARGUMENT, "config is NULL");
  const int previous = config->config.particle_count;
  config->config.particle_count = particles;
  const mmslam_status s = guarded([&] { return validated(config); });
  if (s != MMSLAM_OK) config->config.particle_count = previous;
  return s;
}

mmslam_status mmslam_config_set_steps(mmslam_config* config, int steps) {
  if (!config) return fail(MMSLAM_INVALID_ARGUMENT, "config is NULL");
  const int previous = config->config.steps;
  config->config.steps = steps;
  const mmslam_status s = guarded([&] { return validated(config); });
  if (s != MMSLAM_OK) config->config.steps = previous;
  return s;
}

mmslam_status mmslam_config_to_json(mmslam_config* config, const char** json) {
  if (!config || !json) return fail(MMSLAM_INVALID_ARGUMENT, "config or json is NULL");
  return guarded([&] {
    config->json = mmslam::to_json(config->config).dump(2);
    *json = config->json.c_str();
    return MMSLAM_OK;
  });
}

void mmslam_config_destroy(mmslam_config* config) { delete config; }

mmslam_status mmslam_run(const mmslam_config* config, const mmslam_run_options* options,
                         mmslam_result** out) {
  if (!config || !out) return fail(MMSLAM_INVALID_ARGUMENT, "config or out is NULL");
  return guarded([&] {
    mmslam::RunOptions opts;
    std::vector<mmslam::ScanRecord> replay;
    std::ofstream dump;
    if (options) {
      opts.known_vehicle = options->known_vehicle != 0;
      if (options->replay_scans_path) {
        replay = mmslam::read_scan_file(options->replay_scans_path);
        opts.replay = &replay;
      }
      if (options->dump_scans_path) {
        dump.open(options->dump_scans_path, std::ios::binary | std::ios::trunc);
        if (!dump) {
          throw mmslam::ScanIoError(std::string("cannot write ") + options->dump_scans_path);
        }
        opts.scan_sink = &dump;
      }
    }
    auto result = std::make_unique<mmslam_result>();
    result->result = mmslam::run(config->config, opts);
    if (dump.is_open()) {
      dump.flush();
      if (!dump) throw mmslam::ScanIoError("failed writing scan dump");
    }
    *out = result.release();
    return MMSLAM_OK;
  });
}

size_t mmslam_result_step_count(const mmslam_result* result) {
  return result ? result->result.steps.size() : 0;
}

mmslam_status mmslam_result_get_step(const mmslam_result* result, size_t index, mmslam_step* out) {
  if (!result || !out) return fail(MMSLAM_INVALID_ARGUMENT, "result or out is NULL");
  if (index >= result->result.steps.size()) return fail(MMSLAM_INVALID_ARGUMENT, "index out of range");
  const auto& r = result->result.steps[index];
  out->step = r.step;
  const mmslam::Vec7 truth = r.truth.as_vector();
  const mmslam::Vec7 est = r.estimate.as_vector();
  for (int i = 0; i < 7; ++i) {
    out->truth[i] = truth[i];
    out->estimate[i] = est[i];
    out->abs_error[i] = r.abs_error[i];
  }
  out->gospa_total = r.gospa.total;
  out->gospa_localization = r.gospa.localization;
  out->gospa_missed = r.gospa.missed;
  out->gospa_false = r.gospa.false_targets;
  int i = 0;
  for (mmslam::LandmarkType t : mmslam::kSurfaceTypes) {
    const auto it = r.type_gospa.find(t);
    out->type_gospa[i++] = it == r.type_gospa.end() ? 0.0 : it->second.total;
  }
  out->ess = r.ess;
  out->hypotheses = r.hypothesis_count;
  out->landmarks = static_cast<int>(r.landmarks.size());
  out->wall_time_s = r.wall_time_s;
  return MMSLAM_OK;
}

mmslam_status mmslam_result_write_csv(const mmslam_result* result, const char* path) {
  if (!result || !path) return fail(MMSLAM_INVALID_ARGUMENT, "result or path is NULL");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw mmslam::ScanIoError(std::string("cannot write ") + path);
    mmslam::write_csv(out, result->result);
    if (!out.flush()) throw mmslam::ScanIoError(std::string("failed writing ") + path);
    return MMSLAM_OK;
  });
}

mmslam_status mmslam_result_write_json(const mmslam_result* result, const char* path) {
  if (!result || !path) return fail(MMSLAM_INVALID_ARGUMENT, "result or path is NULL");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw mmslam::ScanIoError(std::string("cannot write ") + path);
    out << mmslam::result_json(result->result).dump(2) << '\n';
    if (!out.flush()) throw mmslam::ScanIoError(std::string("failed writing ") + path);
    return MMSLAM_OK;
  });
}

void mmslam_result_destroy(mmslam_result* result) { delete result; }

}  // extern "C"
