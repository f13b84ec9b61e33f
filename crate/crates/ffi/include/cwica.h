#ifndef CWICA_H
#define CWICA_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum CwStatus {
  CW_STATUS_OK = 0,
  CW_STATUS_NULL_POINTER = 1,
  CW_STATUS_INVALID_ARGUMENT = 2,
  CW_STATUS_DIMENSION = 3,
  CW_STATUS_DOMAIN = 4,
  CW_STATUS_DEGENERATE = 5,
  CW_STATUS_NON_FINITE = 6,
  CW_STATUS_IO = 7,
  CW_STATUS_PARSE = 8,
  CW_STATUS_PANIC = 9,
} CwStatus;

// Opaque row-major matrix.
typedef struct CwMatrix CwMatrix;

// Opaque trained autoencoder.
typedef struct CwModel CwModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next call on this thread.
const char *cw_last_error_message(void);

// Copies `rows * cols` values from `data` into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be writable.
enum CwStatus cw_matrix_new(size_t rows, size_t cols, const double *data, struct CwMatrix **out);

// # Safety
// `m` must be NULL or a handle from this library not yet freed.
void cw_matrix_free(struct CwMatrix *m);

// # Safety
// `m` must be a live handle; `rows` and `cols` must be writable.
enum CwStatus cw_matrix_shape(const struct CwMatrix *m, size_t *rows, size_t *cols);

// Copies the matrix into `buf`, which must hold `len >= rows * cols` values.
//
// # Safety
// `m` must be a live handle; `buf` must point to `len` writable doubles.
enum CwStatus cw_matrix_copy(const struct CwMatrix *m, double *buf, size_t len);

// Squared Cramer-Wold distance between two samples with the Silverman
// bandwidth for `x`'s row count scaled by `bandwidth_multiplier`.
// `continuous_zero` selects kernel value 1 (instead of 0) at zero distance.
//
// # Safety
// `x`, `y` must be live handles; `out` must be writable.
enum CwStatus cw_cramer_wold_distance(const struct CwMatrix *x,
                                      const struct CwMatrix *y,
                                      double bandwidth_multiplier,
                                      bool continuous_zero,
                                      double *out);

// Independence index of `z` with one seeded column-shift draw.
//
// # Safety
// `z` must be a live handle; `out` must be writable.
enum CwStatus cw_independence_index(const struct CwMatrix *z,
                                    double bandwidth_multiplier,
                                    bool continuous_zero,
                                    uint64_t seed,
                                    double *out);

// Distance correlation between two samples with equal row counts.
//
// # Safety
// `x`, `y` must be live handles; `out` must be writable.
enum CwStatus cw_dcor(const struct CwMatrix *x, const struct CwMatrix *y, double *out);

// Mean distance correlation over all column pairs of `z`.
//
// # Safety
// `z` must be a live handle; `out` must be writable.
enum CwStatus cw_dcor_pairwise_mean(const struct CwMatrix *z, double *out);

// Mean absolute correlation between sources and recovered components under
// the best one-to-one matching.
//
// # Safety
// `sources`, `recovered` must be live handles; `out` must be writable.
enum CwStatus cw_max_corr(const struct CwMatrix *sources,
                          const struct CwMatrix *recovered,
                          double *out);

// Loads a model from a checkpoint JSON file written by `cwica train`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum CwStatus cw_model_load(const char *path, struct CwModel **out);

// # Safety
// `m` must be NULL or a handle from this library not yet freed.
void cw_model_free(struct CwModel *m);

// # Safety
// `m` must be a live handle; `input` and `latent` must be writable.
enum CwStatus cw_model_dims(const struct CwModel *m, size_t *input, size_t *latent);

// Latent codes of `x`; the result is a new handle owned by the caller.
//
// # Safety
// `m`, `x` must be live handles; `out` must be writable.
enum CwStatus cw_model_encode(const struct CwModel *m,
                              const struct CwMatrix *x,
                              struct CwMatrix **out);

// Decoder output for latent codes `z`; the result is owned by the caller.
//
// # Safety
// `m`, `z` must be live handles; `out` must be writable.
enum CwStatus cw_model_decode(const struct CwModel *m,
                              const struct CwMatrix *z,
                              struct CwMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CWICA_H */
