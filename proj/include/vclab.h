/*
 * vclab C API: visual-token compression laboratory.
 *
 * All functions return VCLAB_OK (0) on success or a nonzero error code;
 * vclab_last_error() describes the most recent failure on the calling
 * thread. Strings returned through char** out-parameters are heap
 * allocated and must be released with vclab_string_free().
 */
#ifndef VCLAB_H
#define VCLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum vclab_status {
    VCLAB_OK = 0,
    VCLAB_ERR_INVALID = 1, /* bad arguments or configuration */
    VCLAB_ERR_RUNTIME = 2, /* execution failed */
    VCLAB_ERR_IO = 3,      /* file missing or unreadable */
};

const char* vclab_version(void);
const char* vclab_last_error(void);
void vclab_string_free(char* s);

/* ---- compression-ratio accounting (pure arithmetic) ---- */

/* Layer-summed visual tokens: K*L + (N-K)*ceil(L/S). */
int vclab_token_total(int n_layers, int visual_len, int layer, int stride, long long* out_tokens);

/* Exact ratio N*L / token_total plus its rounded percent. */
int vclab_compression_ratio(int n_layers, int visual_len, int layer, int stride,
                            long long* out_num, long long* out_den, long long* out_percent);

/* Full report (tokens, CR, FLOPs estimate) as aligned text or JSON. */
int vclab_crcalc_report(int n_layers, int visual_len, int layer, int stride, int d_model,
                        int vocab_size, int text_len, int as_json, char** out_text);

/* Per-stage rows of a named training scheme at paper or desk scale,
 * with the arithmetic-mean stage average. */
int vclab_scheme_report(const char* name, int n_layers, int visual_len, int paper_scale,
                        int as_json, char** out_text);

/* ---- experiment commands ----
 * Each loads the configuration file, applies "section.key=value"
 * overrides in order, runs the command, and returns the output
 * directory (named by the effective-config run id). */

/* Parse + validate a configuration, apply overrides, and return the
 * canonical echo text (every effective field, defaults included). */
int vclab_config_render(const char* config_path, const char* const* overrides, size_t n_overrides,
                        char** out_echo);

int vclab_cmd_gen_data(const char* config_path, const char* const* overrides, size_t n_overrides,
                       char** out_dir);
int vclab_cmd_train(const char* config_path, const char* const* overrides, size_t n_overrides,
                    char** out_dir);
int vclab_cmd_eval(const char* config_path, const char* const* overrides, size_t n_overrides,
                   char** out_dir);
int vclab_cmd_sweep(const char* config_path, const char* const* overrides, size_t n_overrides,
                    char** out_dir);
int vclab_cmd_probe(const char* config_path, const char* const* overrides, size_t n_overrides,
                    char** out_dir);

/* ---- checkpoint handles ---- */

typedef struct vclab_model vclab_model;

int vclab_model_load(const char* checkpoint_path, vclab_model** out_model);
void vclab_model_free(vclab_model* model);
int vclab_model_param_count(const vclab_model* model, long long* out_count);
int vclab_model_config_json(const vclab_model* model, char** out_json);

/* Greedy-decoding evaluation of a dataset under a compressor spec given
 * as "identity" or "kind:layer:stride"; returns the eval record JSON. */
int vclab_model_evaluate(const vclab_model* model, const char* dataset_path, const char* spec,
                         int max_samples, char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* VCLAB_H */
