/* Temporally-local recurrent models: public C API.
 *
 * The library is consumed through an opaque context holding an experiment
 * configuration and a master seed. All functions return TLRM_OK on success;
 * on failure they return a status code and leave a human-readable message
 * in tlrm_last_error() (thread-local).
 */
#ifndef TLRM_H
#define TLRM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_MSC_VER)
#define TLRM_API __declspec(dllexport)
#elif defined(__GNUC__)
#define TLRM_API __attribute__((visibility("default")))
#else
#define TLRM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tlrm_status {
    TLRM_OK = 0,
    TLRM_E_USAGE = 1,       /* bad arguments / configuration */
    TLRM_E_IO = 2,          /* missing or malformed files */
    TLRM_E_DOMAIN = 3,      /* value outside its domain */
    TLRM_E_SHAPE = 4,       /* dimension mismatch */
    TLRM_E_CONTRACT = 5,    /* call contract violated */
    TLRM_E_NO_SPIKES = 6,   /* decode of an all-zero frame */
    TLRM_E_PLACEMENT = 7,   /* ball placement failed */
    TLRM_E_SINGULAR = 8,    /* singular covariance */
    TLRM_E_UNSUPPORTED = 9, /* operation undefined for this model variant */
    TLRM_E_RUNTIME = 10     /* anything else */
} tlrm_status;

typedef struct tlrm_ctx tlrm_ctx;

TLRM_API const char* tlrm_version(void);

/* Message for the most recent failure on this thread; empty if none. */
TLRM_API const char* tlrm_last_error(void);

/* config_path may be NULL: defaults for dataset_kind ("ppc"/"balls", NULL
 * means "ppc") are used instead. */
TLRM_API tlrm_status tlrm_ctx_create(const char* config_path, const char* dataset_kind,
                                     uint64_t seed, tlrm_ctx** out);
TLRM_API void tlrm_ctx_destroy(tlrm_ctx* ctx);

/* Override one `section.key = value` entry. */
TLRM_API tlrm_status tlrm_ctx_set(tlrm_ctx* ctx, const char* key, const char* value);

/* Write train/test dataset files (and CSV for PPC) into out_dir. */
TLRM_API tlrm_status tlrm_gen_data(tlrm_ctx* ctx, const char* out_dir);

/* Train `model` on a dataset file; writes <out_dir>/<model>.tlrm and a
 * training-log CSV. ckpt_path_out (optional) receives the checkpoint path. */
TLRM_API tlrm_status tlrm_train(tlrm_ctx* ctx, const char* model, const char* data_path,
                                const char* out_dir, char* ckpt_path_out, size_t ckpt_path_len);

/* Score a checkpoint on a dataset file (decode / filter / prediction MSE). */
TLRM_API tlrm_status tlrm_eval(tlrm_ctx* ctx, const char* ckpt_path, const char* data_path,
                               double* mse_out);

/* Next-frame prediction over a ball dataset; dumps the first trajectory's
 * predicted frames as PGM into out_dir. */
TLRM_API tlrm_status tlrm_predict(tlrm_ctx* ctx, const char* ckpt_path, const char* data_path,
                                  const char* out_dir, double* mse_out);

/* Backward-in-time generation from a VAE checkpoint. */
TLRM_API tlrm_status tlrm_generate(tlrm_ctx* ctx, const char* ckpt_path, const char* out_dir);

/* Full table reproductions; write tableN.csv and tableN_seeds.csv. */
TLRM_API tlrm_status tlrm_table1(tlrm_ctx* ctx, const char* out_dir);
TLRM_API tlrm_status tlrm_table2(tlrm_ctx* ctx, const char* out_dir);

/* PGM dump of a ball dataset (up to max_frames frames). */
TLRM_API tlrm_status tlrm_dump_frames(tlrm_ctx* ctx, const char* data_path, const char* out_dir,
                                      uint32_t max_frames);

#ifdef __cplusplus
}
#endif

#endif /* TLRM_H */
