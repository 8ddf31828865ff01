/* C interface to the fpfuse fingerprint localization library.
 *
 * Every call returns an fpf_status. On failure the thread-local message is
 * available from fpf_last_error(), and pipeline stage failures additionally
 * report the stage name through fpf_last_error_stage().
 *
 * Configurations are passed as JSON text; see README.md for the keys.
 */
#ifndef FPFUSE_H
#define FPFUSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FPF_API __declspec(dllexport)
#else
#define FPF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fpf_status {
  FPF_OK = 0,
  FPF_ERR_IO = 1,
  FPF_ERR_PARSE = 2,
  FPF_ERR_SCHEMA = 3,
  FPF_ERR_DIMENSION = 4,
  FPF_ERR_PRECONDITION = 5,
  FPF_ERR_CONFLICT = 6,
  FPF_ERR_VERSION = 7,
  FPF_ERR_NUMERIC = 8,
  FPF_ERR_USAGE = 9,
  FPF_ERR_INTERNAL = 10
} fpf_status;

typedef enum fpf_fusion {
  FPF_FUSION_DEFAULT = 0, /* whatever the artifact was fitted with */
  FPF_FUSION_DST = 1,
  FPF_FUSION_CHOQUET = 2,
  FPF_FUSION_CONVEX = 3
} fpf_fusion;

typedef struct fpf_pipeline fpf_pipeline;

typedef struct fpf_prediction {
  double x, y;         /* fused estimate, meters */
  double rf_x, rf_y;
  double knn_x, knn_y;
  size_t cell;         /* argmax belief cell */
  double cell_x, cell_y;
  double s_rf, s_knn;  /* per-regressor confidences */
  double choquet;      /* aggregated confidence */
} fpf_prediction;

typedef struct fpf_predict_options {
  fpf_fusion fusion;
  double lambda; /* convex mode only; negative keeps the artifact value */
} fpf_predict_options;

FPF_API const char* fpf_version(void);
FPF_API const char* fpf_last_error(void);
FPF_API const char* fpf_last_error_stage(void);
FPF_API const char* fpf_status_name(fpf_status status);

/* Writes a synthetic radio map CSV. spec_json may be NULL for defaults. */
FPF_API fpf_status fpf_synth(const char* spec_json, const char* out_csv);

/* Runs split, calibration, training, and fusion fitting, then writes the
 * artifact atomically. */
FPF_API fpf_status fpf_fit(const char* config_json, const char* artifact_path);

FPF_API fpf_status fpf_pipeline_load(const char* artifact_path, fpf_pipeline** out);
FPF_API void fpf_pipeline_free(fpf_pipeline* pipeline);
FPF_API size_t fpf_pipeline_dim(const fpf_pipeline* pipeline);

/* One-shot prediction from a raw dBm scan (fresh filter state). */
FPF_API fpf_status fpf_pipeline_predict(const fpf_pipeline* pipeline, const double* scan, size_t d,
                                        const fpf_predict_options* options, fpf_prediction* out);

/* Streaming prediction: filter state persists across calls until reset. */
FPF_API fpf_status fpf_pipeline_stream_push(fpf_pipeline* pipeline, const double* scan, size_t d,
                                            const fpf_predict_options* options, fpf_prediction* out);
FPF_API fpf_status fpf_pipeline_stream_reset(fpf_pipeline* pipeline);

/* Belief map of a one-shot prediction; either path may be NULL. */
FPF_API fpf_status fpf_pipeline_belief_map(const fpf_pipeline* pipeline, const double* scan, size_t d,
                                           const char* csv_path, const char* pgm_path);

/* Ablation ladder / noise sweep over the configured data; writes
 * <out_dir>/<name>.json and <out_dir>/<name>.csv. */
FPF_API fpf_status fpf_ablate(const char* config_json, const char* out_dir);
FPF_API fpf_status fpf_noise_sweep(const char* config_json, const char* kind, const char* out_dir);

/* Latency report for a loaded pipeline as JSON written to out_json. */
FPF_API fpf_status fpf_bench(const fpf_pipeline* pipeline, size_t n_queries, uint64_t seed, const char* out_json);

#ifdef __cplusplus
}
#endif

#endif /* FPFUSE_H */
