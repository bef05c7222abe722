#ifndef NRSWARM_H
#define NRSWARM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NrsPatternKind {
  NRS_PATTERN_KIND_STATIONARY = 0,
  NRS_PATTERN_KIND_TRANSLATIONAL = 1,
  NRS_PATTERN_KIND_OSCILLATORY = 2,
  NRS_PATTERN_KIND_IRREGULAR = 3,
  NRS_PATTERN_KIND_UNRESOLVED = 4,
} NrsPatternKind;

/**
 * Result code of every fallible call.
 */
typedef enum NrsStatus {
  NRS_STATUS_OK = 0,
  /**
   * Bad input: malformed config, out-of-range parameter, wrong dimensions.
   */
  NRS_STATUS_VALIDATION = 1,
  /**
   * The simulation itself failed, e.g. two agents collapsed.
   */
  NRS_STATUS_RUNTIME = 2,
  NRS_STATUS_IO = 3,
  NRS_STATUS_NULL_POINTER = 4,
  NRS_STATUS_PANIC = 5,
} NrsStatus;

/**
 * Parsed run configuration.
 */
typedef struct NrsConfig NrsConfig;

/**
 * Recorded trajectory.
 */
typedef struct NrsTrajectory NrsTrajectory;

/**
 * Classification result. `period` and `period_cv` are NaN when absent.
 */
typedef struct NrsLabel {
  enum NrsPatternKind kind;
  double terminal_speed;
  double com_speed;
  double shape_drift;
  double period;
  double period_cv;
} NrsLabel;

/**
 * Classifier thresholds; fill with [`nrs_thresholds_default`].
 */
typedef struct NrsThresholds {
  double transient_fraction;
  double v_eps;
  double v_com_min;
  double s_eps;
  double cv_max;
} NrsThresholds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * Valid until the next failing call on the same thread.
 */
const char *nrs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nrs_version(void);

/**
 * Parses a TOML run configuration. Sweep documents are rejected; use
 * [`nrs_sweep_execute`] for those.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NrsStatus nrs_config_parse(const char *text, struct NrsConfig **out_cfg);

/**
 * # Safety
 * `cfg` must come from [`nrs_config_parse`] and not be freed twice. Null is
 * ignored.
 */
void nrs_config_free(struct NrsConfig *cfg);

/**
 * Runs the configured simulation in memory.
 *
 * # Safety
 * `cfg` must be a live config handle and `out_traj` a valid pointer.
 */
enum NrsStatus nrs_simulate(const struct NrsConfig *cfg, struct NrsTrajectory **out_traj);

/**
 * Runs, classifies and writes the trajectory, report and optional render
 * into `out_dir`, or the config's own output directory when null.
 *
 * # Safety
 * `cfg` must be a live handle; `out_dir` null or NUL-terminated; `label`
 * null or valid.
 */
enum NrsStatus nrs_execute(const struct NrsConfig *cfg,
                           const char *out_dir,
                           struct NrsLabel *label);

/**
 * Runs a sweep document and writes its summary table under `out_dir`.
 *
 * # Safety
 * `text` and `out_dir` must be NUL-terminated; `n_cells` null or valid.
 */
enum NrsStatus nrs_sweep_execute(const char *text, const char *out_dir, size_t *n_cells);

/**
 * # Safety
 * `path` must be NUL-terminated and `out_traj` valid.
 */
enum NrsStatus nrs_trajectory_read(const char *path, struct NrsTrajectory **out_traj);

/**
 * # Safety
 * `traj` must be a live handle and `path` NUL-terminated.
 */
enum NrsStatus nrs_trajectory_write(const struct NrsTrajectory *traj, const char *path);

/**
 * # Safety
 * `traj` must come from this library and not be freed twice. Null is ignored.
 */
void nrs_trajectory_free(struct NrsTrajectory *traj);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t nrs_trajectory_len(const struct NrsTrajectory *traj);

/**
 * Number of agents, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t nrs_trajectory_agents(const struct NrsTrajectory *traj);

/**
 * Index of the distinguished agent.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t nrs_trajectory_red_index(const struct NrsTrajectory *traj);

/**
 * Copies sample `index` into `time` and `xy` (interleaved x, y; `xy_len`
 * must be at least twice the agent count).
 *
 * # Safety
 * `traj` must be live; `time` valid; `xy` must point to `xy_len` doubles.
 */
enum NrsStatus nrs_trajectory_sample(const struct NrsTrajectory *traj,
                                     size_t index,
                                     double *time,
                                     double *xy,
                                     size_t xy_len);

struct NrsThresholds nrs_thresholds_default(void);

/**
 * Classifies a trajectory. `thresholds` may be null for the defaults.
 *
 * # Safety
 * `traj` must be live, `thresholds` null or valid, `label` valid.
 */
enum NrsStatus nrs_classify(const struct NrsTrajectory *traj,
                            const struct NrsThresholds *thresholds,
                            struct NrsLabel *label);

/**
 * Writes an SVG render. `panels == 0` renders a snapshot of the last
 * sample, otherwise a filmstrip with that many panels.
 *
 * # Safety
 * `traj` must be live and `path` NUL-terminated.
 */
enum NrsStatus nrs_render_svg(const struct NrsTrajectory *traj,
                              const char *path,
                              size_t panels,
                              bool trails);

/**
 * Wheel outputs for speed `v` along heading `theta`.
 *
 * # Safety
 * `p` must point to 3 writable doubles.
 */
enum NrsStatus nrs_motor_outputs(double v, double theta, double c, double *p);

/**
 * Inverse of [`nrs_motor_outputs`].
 *
 * # Safety
 * `p` must point to 3 doubles; `v` and `theta` must be valid.
 */
enum NrsStatus nrs_motor_to_velocity(const double *p, double c, double *v, double *theta);

/**
 * Velocity of every agent under preference matrix `k` (row-major `n × n`).
 * `xy` holds `n` interleaved positions; `out_xy` receives `n` velocities.
 *
 * # Safety
 * `xy` and `out_xy` must hold `2n` doubles, `k` must hold `n²`.
 */
enum NrsStatus nrs_net_velocity(const double *xy,
                                size_t n,
                                const double *k,
                                double min_separation,
                                double *out_xy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NRSWARM_H */
