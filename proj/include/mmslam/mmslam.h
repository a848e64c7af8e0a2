#ifndef MMSLAM_MMSLAM_H
#define MMSLAM_MMSLAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MMSLAM_BUILDING_LIBRARY)
#define MMSLAM_API __declspec(dllexport)
#else
#define MMSLAM_API __declspec(dllimport)
#endif
#else
#define MMSLAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmslam_status {
  MMSLAM_OK = 0,
  MMSLAM_INVALID_ARGUMENT = 1,
  MMSLAM_CONFIG_ERROR = 2,
  MMSLAM_DIVERGENCE = 3,
  MMSLAM_IO_ERROR = 4,
  MMSLAM_INTERNAL_ERROR = 5
} mmslam_status;

typedef enum mmslam_mode { MMSLAM_MODE_ALL_PATHS = 0, MMSLAM_MODE_SPECULAR_ONLY = 1 } mmslam_mode;

typedef struct mmslam_config mmslam_config;
typedef struct mmslam_result mmslam_result;

/* Message of the last failed call on this thread; never NULL. */
MMSLAM_API const char* mmslam_last_error(void);
MMSLAM_API const char* mmslam_version(void);

MMSLAM_API mmslam_status mmslam_config_default(mmslam_config** out);
MMSLAM_API mmslam_status mmslam_config_load_file(const char* path, mmslam_config** out);
MMSLAM_API mmslam_status mmslam_config_load_json(const char* json, mmslam_config** out);
MMSLAM_API mmslam_status mmslam_config_set_seed(mmslam_config* config, uint64_t seed);
MMSLAM_API mmslam_status mmslam_config_set_mode(mmslam_config* config, mmslam_mode mode);
MMSLAM_API mmslam_status mmslam_config_set_particles(mmslam_config* config, int particles);
MMSLAM_API mmslam_status mmslam_config_set_steps(mmslam_config* config, int steps);
/* Writes the configuration as JSON. The string is owned by the config and
   stays valid until the next call on it. */
MMSLAM_API mmslam_status mmslam_config_to_json(mmslam_config* config, const char** json);
MMSLAM_API void mmslam_config_destroy(mmslam_config* config);

typedef struct mmslam_run_options {
  int known_vehicle;
  /* Optional JSON-lines file receiving every generated scan. */
  const char* dump_scans_path;
  /* Optional JSON-lines file replacing scan generation. */
  const char* replay_scans_path;
} mmslam_run_options;

MMSLAM_API mmslam_status mmslam_run(const mmslam_config* config, const mmslam_run_options* options,
                                    mmslam_result** out);

typedef struct mmslam_step {
  int step;
  double truth[7];
  double estimate[7];
  double abs_error[7];
  double gospa_total;
  double gospa_localization;
  double gospa_missed;
  double gospa_false;
  /* Indexed SM, MR, VR. */
  double type_gospa[3];
  double ess;
  int hypotheses;
  int landmarks;
  double wall_time_s;
} mmslam_step;

MMSLAM_API size_t mmslam_result_step_count(const mmslam_result* result);
MMSLAM_API mmslam_status mmslam_result_get_step(const mmslam_result* result, size_t index,
                                                mmslam_step* out);
MMSLAM_API mmslam_status mmslam_result_write_csv(const mmslam_result* result, const char* path);
MMSLAM_API mmslam_status mmslam_result_write_json(const mmslam_result* result, const char* path);
MMSLAM_API void mmslam_result_destroy(mmslam_result* result);

#ifdef __cplusplus
}
#endif

#endif
