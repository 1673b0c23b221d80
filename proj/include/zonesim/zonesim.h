#ifndef ZONESIM_ZONESIM_H
#define ZONESIM_ZONESIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define ZS_API __attribute__((visibility("default")))
#else
#define ZS_API
#endif

typedef enum zs_status {
  ZS_OK = 0,
  ZS_ERR_INVALID_ARGUMENT = 1,
  ZS_ERR_PARSE = 2,
  ZS_ERR_VALIDATION = 3,
  ZS_ERR_INFEASIBLE = 4,
  ZS_ERR_DEADLOCK = 5,
  ZS_ERR_IO = 6,
  ZS_ERR_INCOMPATIBLE = 7,
  ZS_ERR_INTERNAL = 8
} zs_status;

typedef enum zs_run_status {
  ZS_RUN_COMPLETED = 0,
  ZS_RUN_TIME_CAP = 1,
  ZS_RUN_DEADLOCK = 2
} zs_run_status;

typedef struct zs_layout zs_layout;
typedef struct zs_scenario zs_scenario;
typedef struct zs_config zs_config;
typedef struct zs_partition zs_partition;
typedef struct zs_run zs_run;

/* Message for the last failed call on this thread; never NULL. */
ZS_API const char* zs_last_error(void);
ZS_API const char* zs_status_name(zs_status status);
ZS_API const char* zs_version(void);

/* Strings handed out by the library are released with zs_string_free. */
ZS_API void zs_string_free(char* s);

ZS_API zs_status zs_layout_load(const char* path, zs_layout** out);
ZS_API size_t zs_layout_workstation_count(const zs_layout* layout);
ZS_API void zs_layout_free(zs_layout* layout);

ZS_API zs_status zs_scenario_load(const char* path, zs_scenario** out);
ZS_API int zs_scenario_part_count(const zs_scenario* scenario);
ZS_API void zs_scenario_free(zs_scenario* scenario);

/* path may be NULL for built-in defaults. */
ZS_API zs_status zs_config_load(const char* path, zs_config** out);
ZS_API zs_status zs_config_set_method(zs_config* config, const char* method);
ZS_API zs_status zs_config_set_seed(zs_config* config, uint64_t seed);
ZS_API zs_status zs_config_get_method(const zs_config* config, const char** method);
ZS_API zs_status zs_config_get_robots(const zs_config* config, int* robots);
ZS_API void zs_config_free(zs_config* config);

ZS_API zs_status zs_partition_load(const zs_layout* layout, const char* path, zs_partition** out);
ZS_API zs_status zs_partition_save(const zs_layout* layout, const zs_partition* partition, const char* path);
/* Returns ZS_ERR_VALIDATION when violations exist; *report (optional) gets one
   violation per line. robots < 0 skips the robot-count check. */
ZS_API zs_status zs_partition_validate(const zs_layout* layout, const zs_partition* partition, int robots,
                                       char** report);
ZS_API int zs_partition_zone_count(const zs_partition* partition);
ZS_API void zs_partition_free(zs_partition* partition);

/* Offline design: method "sa" or "ga" over the scenario's training parts (its
   part types when it has none). progress_csv and objective are optional. */
ZS_API zs_status zs_optimize(const zs_layout* layout, const zs_scenario* scenario, const zs_config* config,
                             const char* method, int zones, uint64_t seed, zs_partition** out,
                             char** progress_csv, double* objective);

/* Initial design the configured method would start from. */
ZS_API zs_status zs_train(const zs_layout* layout, const zs_scenario* scenario, const zs_config* config,
                          zs_partition** out);

/* initial may be NULL: the design is then trained first. A deadlocked run still
   yields a handle; check zs_run_get_status. */
ZS_API zs_status zs_simulate(const zs_layout* layout, const zs_scenario* scenario, const zs_config* config,
                             const zs_partition* initial, zs_run** out);
ZS_API zs_run_status zs_run_get_status(const zs_run* run);
ZS_API zs_status zs_run_write(const zs_run* run, const char* dir);
/* One line: time to complete, percent in balance, travel distance spread. */
ZS_API zs_status zs_run_summary(const zs_run* run, char** line);
ZS_API zs_status zs_run_metrics_json(const zs_run* run, char** json);
ZS_API void zs_run_free(zs_run* run);

/* Recomputes metrics from <dir>/events.jsonl; *matches is 1 when they equal
   <dir>/metrics.json. */
ZS_API zs_status zs_replay(const char* dir, char** metrics_json, int* matches);

/* Comparative table over run directories; writes report.csv and
   report_throughput.csv into out_dir when it is not NULL. */
ZS_API zs_status zs_report(const char* const* dirs, size_t count, const char* out_dir, char** text);

#ifdef __cplusplus
}
#endif

#endif
