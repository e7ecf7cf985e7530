/* C surface of the layout toolkit. Every entry point returns lk_status;
 * on failure lk_last_error() holds a message for the calling thread. */
#ifndef LAYOUTKIT_LAYOUTKIT_H
#define LAYOUTKIT_LAYOUTKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lk_status {
  LK_OK = 0,
  LK_ERR_INVALID_ARGUMENT = 1,
  LK_ERR_OUT_OF_FRAME = 2,
  LK_ERR_BOUNDS = 3,
  LK_ERR_CAPACITY = 4,
  LK_ERR_PARSE = 5,
  LK_ERR_IO = 6,
  LK_ERR_NUMERIC = 7,
  LK_ERR_DEGENERATE = 8,
  LK_ERR_UNKNOWN = 100
} lk_status;

const char* lk_version(void);
const char* lk_status_name(lk_status status);
/* Message from the most recent failing call on this thread. */
const char* lk_last_error(void);

/* ---- layouts ------------------------------------------------------- */

typedef struct lk_layout lk_layout;

/* Box in center form: (x, y) is the middle, (w, h) the extent, frame pixels. */
typedef struct lk_object {
  int32_t category;
  double x, y, w, h;
} lk_object;

lk_status lk_layout_create(double frame_w, double frame_h,
                           const lk_object* objects, size_t count,
                           lk_layout** out);
/* Two-call sizing: pass objects = NULL to learn the count. */
lk_status lk_layout_objects(const lk_layout* layout, lk_object* objects,
                            size_t capacity, size_t* count);
lk_status lk_layout_frame(const lk_layout* layout, double* width,
                          double* height);
void lk_layout_free(lk_layout* layout);

/* ---- datasets ------------------------------------------------------ */

typedef struct lk_dataset lk_dataset;

lk_status lk_dataset_open(const char* annotation_path,
                          const char* caption_path, lk_dataset** out);
lk_status lk_dataset_synth(uint64_t seed, int32_t size, lk_dataset** out);
lk_status lk_dataset_write(const lk_dataset* dataset,
                           const char* annotation_path,
                           const char* caption_path);
lk_status lk_dataset_size(const lk_dataset* dataset, size_t* count);
lk_status lk_dataset_categories(const lk_dataset* dataset, size_t* count);
/* Copies record `index` (0-based, ascending id order) into a fresh layout
 * handle. id may be NULL. */
lk_status lk_dataset_record(const lk_dataset* dataset, size_t index,
                            int64_t* id, lk_layout** out);
void lk_dataset_free(lk_dataset* dataset);

/* ---- quality metric ------------------------------------------------ */

typedef struct lk_metric_params {
  double location_weight;  /* share of the absolute location kernel */
  double area_weight;      /* share of the absolute area term */
  double smoothing;        /* distance scale of the location kernel */
  int32_t max_exhaustive;  /* per-category size cutoff for enumeration */
} lk_metric_params;

lk_metric_params lk_metric_params_default(void);

typedef struct lk_lqs_report {
  double lr, lp;
  double alc, rlc;  /* meaningful only when has_location != 0 */
  int32_t has_location;
  double lc;
  double aac, rac, ac;
  double lqs;
} lk_lqs_report;

lk_status lk_lqs_score(const lk_layout* gt, const lk_layout* pred,
                       const lk_metric_params* params, lk_lqs_report* out);

/* ---- prediction files ---------------------------------------------- */

typedef struct lk_predictions lk_predictions;

lk_status lk_predictions_open(const char* jsonl_path, lk_predictions** out);
lk_status lk_predictions_size(const lk_predictions* preds, size_t* count);
lk_status lk_predictions_get(const lk_predictions* preds, size_t index,
                             int64_t* id, lk_layout** out);
void lk_predictions_free(lk_predictions* preds);

/* Scores predictions against ground truth. per_sample and ids, when not
 * NULL, must hold lk_predictions_size entries; rows come back in ascending
 * id order regardless of file order or jobs. */
lk_status lk_evaluate(const lk_dataset* gt, const lk_predictions* preds,
                      const lk_metric_params* params, int32_t jobs,
                      lk_lqs_report* corpus, lk_lqs_report* per_sample,
                      int64_t* ids);

/* ---- caption-to-layout model --------------------------------------- */

typedef struct lk_model lk_model;

typedef struct lk_model_config {
  int32_t width;
  int32_t encoder_layers, decoder_layers;
  int32_t heads;
  int32_t ffn_width;  /* 0 picks 4 * width */
  int32_t reg_width;  /* 0 picks width */
  int32_t grid_resolution;
  int32_t max_objects;
  double loss_balance;
  uint64_t seed;
} lk_model_config;

lk_model_config lk_model_config_default(void);

typedef struct lk_train_options {
  lk_model_config model;
  int32_t epochs;
  int32_t batch_size;
  double learning_rate;
  double divergence_factor;
  uint64_t shuffle_seed;
} lk_train_options;

lk_train_options lk_train_options_default(void);

/* Fits a fresh model on the dataset and saves checkpoint plus vocabulary.
 * loss_csv_path and diverged may be NULL. */
lk_status lk_train(const lk_dataset* data, const lk_train_options* options,
                   const char* checkpoint_path, const char* vocab_path,
                   const char* loss_csv_path, int32_t* diverged);

lk_status lk_model_open(const char* checkpoint_path, const char* vocab_path,
                        lk_model** out);
/* Greedy decoding for every record; writes one JSON line per prediction. */
lk_status lk_model_generate(const lk_model* model, const lk_dataset* data,
                            const char* predictions_path);
void lk_model_free(lk_model* model);

/* ---- rendering ----------------------------------------------------- */

/* names may be NULL; with a dataset its category names label the boxes.
 * *out_svg is heap-allocated, release with lk_string_free. */
lk_status lk_render_svg(const lk_layout* layout, const lk_dataset* names,
                        char** out_svg);
void lk_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
