#ifndef MORPHO_MORPHO_H
#define MORPHO_MORPHO_H

/* C interface of the morpho toolkit: dependency parsing, entity tagging and
 * sentence classification with morphological feature embeddings.
 *
 * Every function returns a morpho_status. On failure the message of the most
 * recent error on the calling thread is available from morpho_last_error().
 * Strings returned through char** out-parameters are owned by the caller and
 * released with morpho_string_free(). Handles are released with their _free
 * function; passing NULL to any _free function is a no-op. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(MORPHO_BUILDING_LIBRARY)
#define MORPHO_API __attribute__((visibility("default")))
#else
#define MORPHO_API
#endif

typedef enum morpho_status {
  MORPHO_OK = 0,
  MORPHO_E_INVALID_ARGUMENT = 1,
  MORPHO_E_IO = 2,
  MORPHO_E_PARSE = 3,
  MORPHO_E_FORMAT = 4,
  MORPHO_E_NUMERIC = 5,
  MORPHO_E_SHAPE = 6,
  MORPHO_E_INTERNAL = 7
} morpho_status;

typedef struct morpho_config morpho_config;
typedef struct morpho_treebank morpho_treebank;
typedef struct morpho_model morpho_model;

MORPHO_API const char* morpho_version(void);
/* Message of the last failure on this thread; "" if none. Valid until the
 * next failing call on the same thread. */
MORPHO_API const char* morpho_last_error(void);
MORPHO_API const char* morpho_status_name(morpho_status s);
MORPHO_API void morpho_string_free(char* s);

/* ---- experiment configuration (JSON documents) ---- */

MORPHO_API morpho_status morpho_config_load(const char* path, morpho_config** out);
MORPHO_API morpho_status morpho_config_parse(const char* json, morpho_config** out);
/* Dotted key as in the document, e.g. "encoder.hidden"; the value is parsed
 * as JSON and falls back to a plain string. */
MORPHO_API morpho_status morpho_config_set(morpho_config* c, const char* key, const char* value);
/* Applies MORPHOPARSE_SEED if set; *applied (may be NULL) tells whether. */
MORPHO_API morpho_status morpho_config_apply_env(morpho_config* c, int* applied);
MORPHO_API morpho_status morpho_config_to_json(const morpho_config* c, char** out);
MORPHO_API morpho_status morpho_config_hash(const morpho_config* c, char** out);
MORPHO_API void morpho_config_free(morpho_config* c);

/* ---- CoNLL-U treebanks ---- */

/* strict != 0 rejects malformed input; otherwise repairs are reported as
 * newline-separated lines in *warnings (may be NULL). */
MORPHO_API morpho_status morpho_treebank_read(const char* path, int strict, morpho_treebank** out, char** warnings);
MORPHO_API morpho_status morpho_treebank_parse(const char* text, int strict, morpho_treebank** out,
                                               char** warnings);
MORPHO_API size_t morpho_treebank_size(const morpho_treebank* t);
MORPHO_API size_t morpho_treebank_token_count(const morpho_treebank* t);
MORPHO_API morpho_status morpho_treebank_serialize(const morpho_treebank* t, char** out);
/* UPOS and feature-set agreement of `predicted` with `gold` as report lines
 * such as "UPOS accuracy (%): 92.45". */
MORPHO_API morpho_status morpho_feats_quality(const morpho_treebank* gold, const morpho_treebank* predicted,
                                              char** out);
MORPHO_API void morpho_treebank_free(morpho_treebank* t);

/* ---- experiments ---- */

/* Trains every cell of the configured experiment. The run log (JSON lines)
 * goes to log_path if non-NULL, checkpoints to checkpoint_path if non-NULL.
 * *report is a JSON object with "config_hash", "cells", "text" and "csv". */
MORPHO_API morpho_status morpho_train(const morpho_config* c, const char* checkpoint_path, const char* log_path,
                                      char** report);
/* Runs the baseline/+UPOS/+UPOS+feats/+feats grid over a base config, plus
 * the same grid trained for extra_epochs more epochs if extra_epochs > 0.
 * *report has the same shape as for morpho_train, with one row per
 * variant and significance against the matching baseline. */
MORPHO_API morpho_status morpho_ablate(const morpho_config* c, int extra_epochs, const char* log_path,
                                       char** report);

/* ---- trained models ---- */

MORPHO_API morpho_status morpho_model_load(const char* checkpoint_path, morpho_model** out);
MORPHO_API morpho_status morpho_model_config(const morpho_model* m, char** json);
/* Evaluates on data named by `data` (or the model's own config if NULL).
 * split is "train", "dev" or "test" for parsing; tagging and
 * classification models are scored on the whole data.corpus. *metrics is a
 * JSON object. */
MORPHO_API morpho_status morpho_model_evaluate(morpho_model* m, const morpho_config* data, const char* split,
                                               char** metrics);
/* Annotates a CoNLL-U input. Parsers return CoNLL-U with heads and
 * relations, taggers two-column "token<TAB>tag" text, classifiers
 * "label<TAB>tokens" lines. ctx_path names a context dump aligned with the
 * input and may be NULL for models without the ctx part. */
MORPHO_API morpho_status morpho_model_predict(morpho_model* m, const morpho_treebank* input, const char* ctx_path,
                                              char** out);
MORPHO_API void morpho_model_free(morpho_model* m);

/* Lists the entries of a checkpoint (name NULL or "") or renders one. */
MORPHO_API morpho_status morpho_dump_table(const char* checkpoint_path, const char* name, char** out);

/* ---- significance tests ---- */

typedef struct morpho_test_result {
  char test[32];
  double statistic;
  double p_value;
  double alpha;
  size_t n;
  int exact;
  int reject;
} morpho_test_result;

/* Two-sided Wilcoxon signed-rank test on n paired scores. */
MORPHO_API morpho_status morpho_stats_wilcoxon(const double* a, const double* b, size_t n, double alpha,
                                               morpho_test_result* out);
/* Two-sided z-test for x1/n1 against x2/n2 with pooled variance. */
MORPHO_API morpho_status morpho_stats_ztest(long long x1, long long n1, long long x2, long long n2, double alpha,
                                            morpho_test_result* out);
/* Header plus one table row; a rejected null is underlined as "_reject_". */
MORPHO_API morpho_status morpho_test_result_format(const morpho_test_result* r, char** out);

#ifdef __cplusplus
}
#endif

#endif
