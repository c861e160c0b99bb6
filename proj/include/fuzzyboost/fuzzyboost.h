/*
 * fuzzyboost C API.
 *
 * Boosted fuzzy-rule image classifier over local-feature descriptors, plus a
 * bag-of-features baseline and an evaluation harness. All objects are opaque
 * handles owned by the caller and released with the matching *_free call.
 * Every fallible call returns fb_status; on failure fb_last_error() holds a
 * message for the calling thread until its next failing call.
 *
 * Handles are immutable after creation and may be shared between threads,
 * except where a function takes a non-const pointer.
 */
#ifndef FUZZYBOOST_H
#define FUZZYBOOST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FUZZYBOOST_BUILD)
#    define FB_API __declspec(dllexport)
#  else
#    define FB_API __declspec(dllimport)
#  endif
#else
#  define FB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fb_status {
    FB_OK = 0,
    FB_ERR_INVALID_ARGUMENT = 1,
    FB_ERR_IO = 2,
    FB_ERR_MALFORMED_HEADER = 3,
    FB_ERR_DIMENSION_MISMATCH = 4,
    FB_ERR_NON_FINITE = 5,
    FB_ERR_EMPTY = 6,
    FB_ERR_VERSION = 7,
    FB_ERR_CORRUPT = 8,
    FB_ERR_DUPLICATE_CLASS = 9,
    FB_ERR_UNKNOWN_CLASS = 10,
    FB_ERR_TRAINING = 11,
    FB_ERR_PROTOCOL = 12,
    FB_ERR_NUMERIC = 13,
    FB_ERR_INTERNAL = 14
} fb_status;

typedef struct fb_image fb_image;
typedef struct fb_dataset fb_dataset;
typedef struct fb_model fb_model;
typedef struct fb_baseline fb_baseline;
typedef struct fb_report fb_report;

FB_API const char* fb_version(void);
FB_API const char* fb_status_name(fb_status status);
FB_API const char* fb_last_error(void);

/* Strings returned through char** are heap-allocated; release them here. */
FB_API void fb_string_free(char* text);

/* ---- descriptors ------------------------------------------------------ */

/* Reads a binary (FBDS) or CSV descriptor file. expected_dim = 0 accepts the
 * file's own N. The image id is the file stem. */
FB_API fb_status fb_image_read(const char* path, size_t expected_dim, fb_image** out);

/* Copies count x dim row-major values. */
FB_API fb_status fb_image_create(const char* image_id, const float* values, size_t count,
                                 size_t dim, fb_image** out);

/* ".csv" extension writes the CSV variant, anything else binary. */
FB_API fb_status fb_image_write(const fb_image* image, const char* path);

FB_API size_t fb_image_count(const fb_image* image);
FB_API size_t fb_image_dim(const fb_image* image);
FB_API const char* fb_image_id(const fb_image* image);
FB_API const float* fb_image_values(const fb_image* image);
FB_API void fb_image_free(fb_image* image);

/* ---- datasets --------------------------------------------------------- */

/* Loads a manifest and every descriptor file it references. threads = 0 uses
 * all cores. The time spent reading files is kept and copied into reports. */
FB_API fb_status fb_dataset_load(const char* manifest_path, unsigned threads, fb_dataset** out);
FB_API size_t fb_dataset_class_count(const fb_dataset* dataset);
FB_API const char* fb_dataset_class_name(const fb_dataset* dataset, size_t index);
FB_API size_t fb_dataset_image_count(const fb_dataset* dataset);
FB_API double fb_dataset_io_seconds(const fb_dataset* dataset);
FB_API void fb_dataset_free(fb_dataset* dataset);

/* Seeded stratified train/test split of a manifest; writes a new manifest. */
FB_API fb_status fb_manifest_split(const char* in_path, double test_fraction, uint64_t seed,
                                   const char* out_path);

typedef struct fb_synthetic_spec {
    const char* const* class_names; /* NULL: Bus, Cat, Train */
    size_t class_count;
    size_t train_per_class;
    size_t test_per_class;
    size_t descriptors_per_image;
    size_t dim;
    double spread;
    double separation; /* class mean offset in units of spread */
    uint64_t seed;
} fb_synthetic_spec;

FB_API void fb_synthetic_spec_default(fb_synthetic_spec* spec);

/* Writes Gaussian-cluster descriptor files and manifest.json under dir.
 * manifest_path (optional) receives the manifest location. */
FB_API fb_status fb_synthetic_write(const fb_synthetic_spec* spec, const char* dir,
                                    char** manifest_path);

/* ---- training --------------------------------------------------------- */

typedef enum fb_tnorm { FB_TNORM_MINIMUM = 0, FB_TNORM_PRODUCT = 1 } fb_tnorm;
typedef enum fb_tconorm { FB_TCONORM_MAXIMUM = 0, FB_TCONORM_PROBABILISTIC_SUM = 1 } fb_tconorm;
typedef enum fb_metric { FB_METRIC_EUCLIDEAN = 0, FB_METRIC_MANHATTAN = 1 } fb_metric;
typedef enum fb_weight_update {
    FB_WEIGHT_UPDATE_BALANCED = 0,
    FB_WEIGHT_UPDATE_CORRECT_ONLY = 1
} fb_weight_update;

typedef struct fb_train_config {
    uint32_t t_max;
    fb_tnorm tnorm;
    fb_tconorm tconorm;
    uint64_t seed;
    double sigma_floor_abs;
    double sigma_floor_rel;
    fb_metric metric;
    fb_weight_update weight_update;
    const char* negatives; /* "all", "count:<n>", "<n>", "fraction:<f>"; NULL = all */
    unsigned threads;      /* 0 = all cores */
} fb_train_config;

FB_API void fb_train_config_default(fb_train_config* config);

typedef enum fb_round_outcome {
    FB_ROUND_ACCEPTED = 0,
    FB_ROUND_PERFECT = 1,
    FB_ROUND_REJECTED = 2
} fb_round_outcome;

typedef struct fb_round_event {
    const char* class_name;
    size_t round;
    double epsilon;
    double alpha;
    fb_round_outcome outcome;
    size_t rules;
    double elapsed_seconds;
} fb_round_event;

/* Called once per boosting round. Calls are serialized but may come from
 * worker threads. */
typedef void (*fb_progress_fn)(const fb_round_event* event, void* user);

/* Trains the named classes (all manifest classes when class_count = 0). */
FB_API fb_status fb_train(const fb_dataset* dataset, const char* const* classes,
                          size_t class_count, const fb_train_config* config,
                          fb_progress_fn progress, void* user, fb_model** out);

/* ---- models ----------------------------------------------------------- */

FB_API fb_status fb_model_load(const char* path, fb_model** out);
FB_API fb_status fb_model_save(const fb_model* model, const char* path);
FB_API void fb_model_free(fb_model* model);
FB_API size_t fb_model_class_count(const fb_model* model);
FB_API const char* fb_model_class_name(const fb_model* model, size_t index);
FB_API size_t fb_model_rule_count(const fb_model* model, size_t index);
FB_API size_t fb_model_dim(const fb_model* model);
FB_API fb_status fb_model_export_text(const fb_model* model, char** text);

/* New model = base plus the ensemble `class_name` taken from donor. The
 * base's ensembles are carried over unchanged. */
FB_API fb_status fb_model_add_class(const fb_model* base, const fb_model* donor,
                                    const char* class_name, fb_model** out);

/* Trains class_name on dataset and appends it to base. */
FB_API fb_status fb_model_add_trained_class(const fb_model* base, const fb_dataset* dataset,
                                            const char* class_name,
                                            const fb_train_config* config,
                                            fb_progress_fn progress, void* user,
                                            fb_model** out);

typedef struct fb_classification {
    size_t best; /* index into the model's classes */
    int tie;     /* nonzero when several classes share the top score */
} fb_classification;

/* scores (optional) receives one H^c value per class; capacity must be at
 * least fb_model_class_count when scores is non-NULL. */
FB_API fb_status fb_classify(const fb_model* model, const fb_image* image, double* scores,
                             size_t capacity, fb_classification* out);

/* ---- bag-of-features baseline ----------------------------------------- */

typedef struct fb_baseline_config {
    size_t k;
    uint64_t seed;
    double ridge;
    double gamma; /* 0 = 1 / mean pairwise chi-square distance */
    unsigned threads;
} fb_baseline_config;

FB_API void fb_baseline_config_default(fb_baseline_config* config);
FB_API fb_status fb_baseline_train(const fb_dataset* dataset, const fb_baseline_config* config,
                                   fb_baseline** out);
FB_API fb_status fb_baseline_load(const char* path, fb_baseline** out);
FB_API fb_status fb_baseline_save(const fb_baseline* baseline, const char* path);
FB_API void fb_baseline_free(fb_baseline* baseline);
FB_API size_t fb_baseline_class_count(const fb_baseline* baseline);
FB_API const char* fb_baseline_class_name(const fb_baseline* baseline, size_t index);
FB_API fb_status fb_baseline_classify(const fb_baseline* baseline, const fb_image* image,
                                      double* values, size_t capacity, size_t* best);

/* ---- evaluation ------------------------------------------------------- */

FB_API fb_status fb_evaluate_model(const fb_model* model, const fb_dataset* dataset,
                                   unsigned threads, fb_report** out);
FB_API fb_status fb_evaluate_baseline(const fb_baseline* baseline, const fb_dataset* dataset,
                                      unsigned threads, fb_report** out);

/* Train on the train split and evaluate on the test split, timing both.
 * model_out / baseline_out are optional. */
FB_API fb_status fb_run_fuzzyboost(const fb_dataset* dataset, const fb_train_config* config,
                                   fb_progress_fn progress, void* user, fb_report** out,
                                   fb_model** model_out);
FB_API fb_status fb_run_baseline(const fb_dataset* dataset, const fb_baseline_config* config,
                                 fb_report** out, fb_baseline** baseline_out);

/* Fuzzyboost against the baseline at each dictionary size in ks. */
FB_API fb_status fb_benchmark(const fb_dataset* dataset, const fb_train_config* config,
                              const size_t* ks, size_t k_count,
                              const fb_baseline_config* baseline_config, size_t reference_k,
                              fb_progress_fn progress, void* user, fb_report** out);

FB_API fb_status fb_report_json(const fb_report* report, char** json);
FB_API fb_status fb_report_text(const fb_report* report, char** text);
/* Total accuracy in percent; for benchmarks, the fuzzyboost total. */
FB_API double fb_report_total_accuracy(const fb_report* report);
FB_API void fb_report_free(fb_report* report);

#ifdef __cplusplus
}
#endif

#endif /* FUZZYBOOST_H */
