/* C interface to the model-switching driving simulator.
 *
 * All functions return msw_status (MSW_OK on success) unless noted. A
 * failing call leaves a human-readable message in msw_last_error(), which is
 * thread-local and valid until the next failing call on the same thread.
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with msw_string_free.
 */

#ifndef MSW_C_API_H
#define MSW_C_API_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msw_status {
    MSW_OK = 0,
    MSW_ERR_INVALID_ARGUMENT = 1,
    MSW_ERR_BAD_CONFIG = 2,
    MSW_ERR_RUNTIME = 3,
    MSW_ERR_IO = 4,
} msw_status;

typedef struct msw_scenario msw_scenario; /* opaque scenario config */
typedef struct msw_episode msw_episode;   /* opaque episode log */

const char* msw_version(void);
const char* msw_last_error(void);
void msw_string_free(char* s);

/* Scenario construction. kind is one of "stay_back", "merger", "give_way". */
msw_status msw_scenario_create(const char* kind, uint64_t seed, msw_scenario** out);
/* Build from a complete scenario JSON document (as produced by to_json). */
msw_status msw_scenario_from_json(const char* json, msw_scenario** out);
/* Apply a JSON merge-patch on top of an existing scenario. */
msw_status msw_scenario_patch(msw_scenario* scenario, const char* patch_json);
msw_status msw_scenario_to_json(const msw_scenario* scenario, char** out_json);
void msw_scenario_destroy(msw_scenario* scenario);

/* Run one closed-loop episode. method: "naive" | "turn" | "tom" |
 * "switcher:<lambda>" | "switcher:conservative" | "switcher:aggressive". */
msw_status msw_episode_run(const msw_scenario* scenario, const char* method, msw_episode** out);
int msw_episode_steps(const msw_episode* episode);
msw_status msw_episode_csv(const msw_episode* episode, char** out_csv);
msw_status msw_episode_summary_json(const msw_episode* episode, char** out_json);
void msw_episode_destroy(msw_episode* episode);

/* Full experiment from a spec JSON document:
 * {"scenario": "...", "methods": ["naive", "switcher:0.4", ...],
 *  "seeds": 30, "out_dir": "...", "workers": 1, "config_patch": {...}}
 * Writes per-episode CSVs, summary.json and timeseries.csv under out_dir
 * when given; always returns the summary JSON. */
msw_status msw_experiment_run(const char* spec_json, char** out_summary_json);

/* Re-summarize a persisted experiment directory from its CSV logs. */
msw_status msw_replay(const char* out_dir, char** out_summary_json);

/* Median Naive planning time on this machine, for pinning t_base in config. */
msw_status msw_calibrate(int samples, double* out_t_base_seconds);

#ifdef __cplusplus
}
#endif

#endif /* MSW_C_API_H */
