/* C API for the fusqa library: phantom generation, mask degradation,
 * quality-model training, scoring, biometry, and the train-A/test-B
 * benchmark. All functions return a status code; on failure a thread-local
 * message is available via fusqa_last_error(). Handles are opaque and owned
 * by the caller (close with the matching *_close function). */
#ifndef FUSQA_H
#define FUSQA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fusqa_status {
  FUSQA_OK = 0,
  FUSQA_USAGE_ERROR = 1,   /* caller misuse: bad arguments, bad config */
  FUSQA_DATA_ERROR = 2,    /* bad or missing data: files, masks, labels */
  FUSQA_NUMERIC_ERROR = 3  /* numeric failure */
} fusqa_status;

/* Library version string, e.g. "1.0.0". */
const char* fusqa_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* fusqa_last_error(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */
/* ------------------------------------------------------------------ */

typedef struct fusqa_dataset fusqa_dataset;

/* Generates `count` phantoms (domain 'A' or 'B') and writes the dataset
 * (PGM pairs + manifest.json) to out_dir. */
fusqa_status fusqa_phantom_generate(const char* out_dir, int count, char domain,
                                    uint64_t seed, int image_size,
                                    double spacing_mm);

/* Expands every phantom in in_dir into 1 + n_good + n_poor labeled variants
 * and writes the degraded dataset to out_dir. */
fusqa_status fusqa_degrade_dataset(const char* in_dir, const char* out_dir,
                                   uint64_t seed, int n_good, int n_poor);

/* Opens a dataset directory (phantom or degraded manifest). */
fusqa_status fusqa_dataset_open(const char* dir, fusqa_dataset** out);
void fusqa_dataset_close(fusqa_dataset* dataset);
fusqa_status fusqa_dataset_size(const fusqa_dataset* dataset, size_t* out);

/* ------------------------------------------------------------------ */
/* Training                                                            */
/* ------------------------------------------------------------------ */

/* Trains a quality classifier ("single", "siamese" or "synergic") on the
 * labeled dataset in data_dir and saves the checkpoint to out_path. */
fusqa_status fusqa_train(const char* data_dir, const char* topology, int epochs,
                         double lr, int batch_size, uint64_t seed,
                         const char* out_path);

/* Trains the autoencoder baseline on the good masks of data_dir. */
fusqa_status fusqa_train_cae(const char* data_dir, int epochs, uint64_t seed,
                             const char* out_path);

/* ------------------------------------------------------------------ */
/* Models                                                              */
/* ------------------------------------------------------------------ */

typedef struct fusqa_model fusqa_model;

fusqa_status fusqa_model_open(const char* path, fusqa_model** out);
void fusqa_model_close(fusqa_model* model);

/* Writes the model kind ("qa:single", "qa:siamese", "qa:synergic" or "cae")
 * into buf; fails if buf_len is too small. */
fusqa_status fusqa_model_kind(const fusqa_model* model, char* buf, size_t buf_len);

/* Overrides the decision threshold of an autoencoder model. */
fusqa_status fusqa_model_set_tau(fusqa_model* model, double tau);

/* Scores one dataset entry. For qa models, score = probability the pair is
 * good (verdict: score >= 0.5). For cae models, score = difference ratio
 * (verdict: score < tau). Either output pointer may be NULL. */
fusqa_status fusqa_predict(const fusqa_model* model, const fusqa_dataset* dataset,
                           size_t index, double* score, int* verdict_good);

/* ------------------------------------------------------------------ */
/* Evaluation, biometry, benchmark                                     */
/* ------------------------------------------------------------------ */

/* Scores a saved model on a labeled dataset and writes a report ("json" or
 * "csv"). tau < 0 keeps a cae checkpoint's stored threshold. */
fusqa_status fusqa_evaluate(const char* model_path, const char* data_dir,
                            double tau, const char* report_path,
                            const char* format);

/* Crown-rump length and gestational age for a mask PGM. dating_config_path
 * may be NULL for the default dating model, or name a JSON file with keys
 * {c0, c1, c2, valid_lo_mm, valid_hi_mm}. On success both outputs are set.
 * When the mask is measurable but the CRL is outside dating validity, crl_mm
 * is set, ga_days is NaN and the call fails with FUSQA_DATA_ERROR. */
fusqa_status fusqa_measure_mask(const char* mask_path, double spacing_mm,
                                const char* dating_config_path, double* crl_mm,
                                double* ga_days);

/* Runs the benchmark and writes report.json, report.csv and
 * report_downstream.csv to out_dir. config_path may be NULL for defaults or
 * name a JSON config file. */
fusqa_status fusqa_benchmark(const char* config_path, uint64_t seed,
                             const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FUSQA_H */
