/*
 * csisense - WiFi channel state information synthesis, processing, training
 * and evaluation toolkit.
 *
 * C interface of the shared library. All functions return csn_status unless
 * stated otherwise; on any failure csn_last_error() carries a message for
 * the calling thread. Handles are opaque and must be released with their
 * _free function. Configuration strings are JSON documents; every field is
 * optional and falls back to the built-in defaults (see the README for the
 * schemas).
 */

#ifndef CSISENSE_H
#define CSISENSE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CSN_ABI_VERSION 1

typedef enum csn_status {
    CSN_OK = 0,
    CSN_ERR_INVALID_ARGUMENT = 1, /* null pointer or malformed call */
    CSN_ERR_DOMAIN = 2,           /* value outside its physical/numeric domain */
    CSN_ERR_PARSE = 3,            /* malformed file or config */
    CSN_ERR_IO = 4,               /* missing or unwritable path */
    CSN_ERR_STATE = 5,            /* operation illegal for the handle state */
    CSN_ERR_INTERNAL = 6
} csn_status;

/* ------------------------------------------------------------------ */
/* Library                                                             */

void csn_version(int* major, int* minor, int* patch);
int csn_abi_version(void);

/* Message describing the calling thread's most recent failure. */
const char* csn_last_error(void);

/* Worker count for internal parallel loops; results are identical for any
 * value. <= 0 restores the default (CSI_SENSE_THREADS or the hardware). */
void csn_set_threads(int n);

/* Frees strings returned through out-parameters of this API. */
void csn_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Physics calculators                                                 */

/* Wave speed in a medium with the given relative constants, m/s. */
csn_status csn_wave_speed(double rel_permittivity, double rel_permeability, double* out_mps);

/* Doppler shift +-(v_o / v) * f in Hz; approaching selects the sign.
 * wave_speed_mps must be positive. */
csn_status csn_doppler_shift(double carrier_hz, double object_speed_mps, double wave_speed_mps,
                             int approaching, double* out_hz);

/* Phase change of a propagation distance, mod 2 pi, in [0, 2 pi). */
csn_status csn_phase_variation(double distance_m, double wavelength_m, double* out_rad);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

/* An ordered collection of labeled CSI sequences (one per class). */
typedef struct csn_dataset csn_dataset;

/* Synthesizes from a synthesis config (JSON) for a task name in
 * {biometrics, person, sign, falling, joint}. */
csn_status csn_dataset_synth(const char* synth_config_json, const char* task, csn_dataset** out);

/* Loads every sequence listed by a dataset directory's manifest (or all
 * .csi1 files in it), or one file. */
csn_status csn_dataset_open_dir(const char* dir, csn_dataset** out);
csn_status csn_dataset_open_file(const char* path, csn_dataset** out);

void csn_dataset_free(csn_dataset* ds);

csn_status csn_dataset_n_sequences(const csn_dataset* ds, int32_t* out);

/* Shape and label of one sequence. Any out-pointer may be NULL. */
csn_status csn_dataset_sequence_info(const csn_dataset* ds, int32_t index, uint32_t* n_frames,
                                     uint32_t* n_subcarriers, double* sample_rate,
                                     uint8_t* label_kind, uint32_t* class_id, float bio[4]);

/* Writes one sequence in the CSI1 format. */
csn_status csn_dataset_write_file(const csn_dataset* ds, int32_t index, const char* path);

/* Applies the denoising chain (median, mean, Butterworth) in place; the
 * sequences become amplitude-only. */
csn_status csn_dataset_filter(csn_dataset* ds, const char* filter_config_json);

/* Copies the amplitude matrix (n_frames x n_subcarriers, frame-major) of
 * one sequence into buffer. */
csn_status csn_dataset_amplitudes(const csn_dataset* ds, int32_t index, float* buffer,
                                  size_t capacity, size_t* written);

/* ------------------------------------------------------------------ */
/* Models                                                              */

typedef struct csn_model csn_model;

/* Builds an untrained model from a pipeline config (JSON: task, variant,
 * scale) for n_classes classification classes. */
csn_status csn_model_build(const char* pipeline_config_json, int32_t n_classes, uint64_t seed,
                           csn_model** out);

/* Loads a trained model from a directory holding model.csnw and
 * model_manifest.json (as written by csn_run_train / csn_run_e2e). */
csn_status csn_model_load(const char* model_dir, csn_model** out);

void csn_model_free(csn_model* m);

csn_status csn_model_num_params(csn_model* m, int64_t* out);

/* Filters, splits and (optionally) augments the dataset per the pipeline
 * config, then trains on the training side. */
csn_status csn_model_train(csn_model* m, const csn_dataset* data,
                           const char* pipeline_config_json);

/* Loss log of the last training run. */
csn_status csn_model_epoch_loss(csn_model* m, int32_t epoch_index, double* out);

/* Evaluates on the held-out fifth of the dataset; *out_metrics_json gets a
 * malloc'd metrics document (free with csn_string_free). */
csn_status csn_model_eval(csn_model* m, const csn_dataset* data,
                          const char* pipeline_config_json, char** out_metrics_json);

/* Single-instance prediction from n_subcarriers amplitudes. */
csn_status csn_model_predict_class(csn_model* m, const float* amplitudes, size_t n,
                                   int32_t* out_class);
csn_status csn_model_predict_biometrics(csn_model* m, const float* amplitudes, size_t n,
                                        double out_bio[4]);

csn_status csn_model_save(csn_model* m, const char* path);

/* ------------------------------------------------------------------ */
/* Pipeline commands (what the command-line tool runs)                 */

/* Synthesizes one CSI1 file per configured subject plus a manifest. */
csn_status csn_run_synth(const char* synth_config_json, const char* task, const char* out_dir);

/* Denoises every sequence of a dataset directory into a new directory. */
csn_status csn_run_filter(const char* in_dir, const char* filter_config_json,
                          const char* out_dir);

/* Per-class group-averaging augmentation of a dataset directory. */
csn_status csn_run_augment(const char* in_dir, uint64_t seed, const char* out_dir);

/* Trains on a dataset directory; writes model.csnw and model_manifest.json. */
csn_status csn_run_train(const char* pipeline_config_json, const char* data_dir,
                         const char* out_dir);

/* Evaluates a trained model directory against a dataset directory; writes
 * metrics.json and the csv exports. */
csn_status csn_run_eval(const char* pipeline_config_json, const char* model_dir,
                        const char* data_dir, const char* out_dir);

/* Regenerates the plot-data exports from an existing metrics.json. */
csn_status csn_run_report(const char* metrics_json_path, const char* out_dir);

/* Whole pipeline: synthesize, filter, split/augment, train, evaluate,
 * report. *out_passed becomes 1 iff every configured threshold held. */
csn_status csn_run_e2e(const char* pipeline_config_json, const char* out_dir, int* out_passed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CSISENSE_H */
