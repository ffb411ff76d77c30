/* C interface to the softpg shared library.
 *
 * All functions return a status code; 0 is success. On failure,
 * softpg_last_error() describes the problem for the calling thread.
 * Objects are opaque handles owned by the caller and released with the
 * matching _free function.
 */
#ifndef SOFTPG_H
#define SOFTPG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SOFTPG_API __declspec(dllexport)
#else
#define SOFTPG_API __attribute__((visibility("default")))
#endif

/* Status codes; they double as the CLI exit codes. */
#define SOFTPG_OK 0
#define SOFTPG_ERR_USAGE 1 /* invalid arguments or configuration */
#define SOFTPG_ERR_RUN 2   /* diverged runs or failed properties */
#define SOFTPG_ERR_IO 3    /* file system failures */

typedef struct softpg_bandit softpg_bandit;
typedef struct softpg_mdp softpg_mdp;
typedef struct softpg_experiment softpg_experiment;

SOFTPG_API const char* softpg_version(void);

/* Message for the most recent failure on this thread; never NULL. */
SOFTPG_API const char* softpg_last_error(void);

/* ---- bandit instances ---- */

/* family: "bernoulli", "gaussian" or "beta". */
SOFTPG_API int softpg_bandit_generate(int arms, double gap, const char* family, uint64_t seed,
                                      softpg_bandit** out);
SOFTPG_API int softpg_bandit_load(const char* path, softpg_bandit** out);
SOFTPG_API int softpg_bandit_save(const softpg_bandit* bandit, const char* path);
SOFTPG_API int softpg_bandit_arms(const softpg_bandit* bandit);
SOFTPG_API int softpg_bandit_mean(const softpg_bandit* bandit, int arm, double* out);
SOFTPG_API void softpg_bandit_free(softpg_bandit* bandit);

/* ---- tabular MDP instances ---- */

/* name: "cliff_world", "deep_sea" or "flat_grad". */
SOFTPG_API int softpg_mdp_builtin(const char* name, softpg_mdp** out);
SOFTPG_API int softpg_mdp_load(const char* path, softpg_mdp** out);
SOFTPG_API int softpg_mdp_save(const softpg_mdp* mdp, const char* path);
SOFTPG_API int softpg_mdp_states(const softpg_mdp* mdp);
SOFTPG_API int softpg_mdp_actions(const softpg_mdp* mdp);
SOFTPG_API int softpg_mdp_gamma(const softpg_mdp* mdp, double* out);
SOFTPG_API void softpg_mdp_free(softpg_mdp* mdp);

/* ---- presets and experiments ---- */

SOFTPG_API int softpg_preset_count(void);
/* Copies the name of preset `index` into buf (NUL-terminated). */
SOFTPG_API int softpg_preset_name(int index, char* buf, size_t len);

SOFTPG_API int softpg_experiment_from_preset(const char* name, softpg_experiment** out);
SOFTPG_API int softpg_experiment_load(const char* path, softpg_experiment** out);
SOFTPG_API int softpg_experiment_set_seed(softpg_experiment* exp, uint64_t seed);
SOFTPG_API int softpg_experiment_set_iters(softpg_experiment* exp, int64_t iters);
SOFTPG_API int softpg_experiment_set_workers(softpg_experiment* exp, int workers);
SOFTPG_API int softpg_experiment_set_output_dir(softpg_experiment* exp, const char* dir);

/* Runs every configured (instance, repeat, algorithm) combination and writes
 * trace CSVs, aggregate CSVs and a manifest into the output directory.
 * Returns SOFTPG_ERR_RUN when runs diverged (they are still recorded). */
SOFTPG_API int softpg_experiment_run(softpg_experiment* exp);
SOFTPG_API void softpg_experiment_free(softpg_experiment* exp);

/* Runs the numerical property suite; writes properties.csv under out_dir
 * (default "out/verify"). config_path may be NULL for defaults. On return,
 * *failures holds the number of failed properties (may be NULL). */
SOFTPG_API int softpg_verify(const char* config_path, const char* out_dir, int* failures);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SOFTPG_H */
