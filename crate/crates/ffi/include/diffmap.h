#ifndef DIFFMAP_H
#define DIFFMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DmStatus {
  DM_STATUS_OK = 0,
  DM_STATUS_NULL_POINTER = 1,
  DM_STATUS_INVALID_ARGUMENT = 2,
  DM_STATUS_IO = 3,
  DM_STATUS_INVALID_INPUT = 4,
  DM_STATUS_NUMERICAL = 5,
  DM_STATUS_PANIC = 6,
} DmStatus;

/**
 * Eigenvalues and eigenvectors of one diffusion map.
 */
typedef struct DmEmbedding DmEmbedding;

/**
 * Raw area × variable table.
 */
typedef struct DmFeatures DmFeatures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *dm_last_error(void);

/**
 * Loads a features CSV whose area codes are in column `id_column`.
 *
 * # Safety
 * `path` and `id_column` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum DmStatus dm_features_from_csv(const char *path,
                                   const char *id_column,
                                   struct DmFeatures **out);

/**
 * Builds a table from `n_rows * n_cols` row-major values. Areas are named
 * `R0`, `R1`, ... and columns `C0`, `C1`, ...
 *
 * # Safety
 * `values` must point to `n_rows * n_cols` readable doubles; `out` must be
 * writable.
 */
enum DmStatus dm_features_from_rows(const double *values,
                                    uintptr_t n_rows,
                                    uintptr_t n_cols,
                                    struct DmFeatures **out);

/**
 * # Safety
 * `features` must come from a `dm_features_*` constructor, or be null.
 */
void dm_features_free(struct DmFeatures *features);

/**
 * # Safety
 * `features` must be a live handle.
 */
uintptr_t dm_features_rows(const struct DmFeatures *features);

/**
 * # Safety
 * `features` must be a live handle.
 */
uintptr_t dm_features_cols(const struct DmFeatures *features);

/**
 * Standardizes, links each area to its `k_neighbors` strongest neighbours
 * and keeps `n_eigenvectors` nonzero eigenpairs.
 *
 * # Safety
 * `features` must be a live handle; `out` must be writable.
 */
enum DmStatus dm_embed(const struct DmFeatures *features,
                       uintptr_t k_neighbors,
                       uintptr_t n_eigenvectors,
                       struct DmEmbedding **out);

/**
 * # Safety
 * `embedding` must come from `dm_embed`, or be null.
 */
void dm_embedding_free(struct DmEmbedding *embedding);

/**
 * Number of areas, i.e. the length of each eigenvector.
 *
 * # Safety
 * `embedding` must be a live handle.
 */
uintptr_t dm_embedding_size(const struct DmEmbedding *embedding);

/**
 * Number of nonzero eigenpairs kept.
 *
 * # Safety
 * `embedding` must be a live handle.
 */
uintptr_t dm_embedding_count(const struct DmEmbedding *embedding);

/**
 * Number of connected components of the similarity graph.
 *
 * # Safety
 * `embedding` must be a live handle.
 */
uintptr_t dm_embedding_components(const struct DmEmbedding *embedding);

/**
 * Copies the nonzero eigenvalues, ascending, into `out[0..count]`.
 *
 * # Safety
 * `embedding` must be a live handle; `out` must hold `len` doubles.
 */
enum DmStatus dm_embedding_eigenvalues(const struct DmEmbedding *embedding,
                                       double *out,
                                       uintptr_t len);

/**
 * Copies nonzero eigenvector `index` (1-based) into `out[0..size]`.
 *
 * # Safety
 * `embedding` must be a live handle; `out` must hold `len` doubles.
 */
enum DmStatus dm_embedding_eigenvector(const struct DmEmbedding *embedding,
                                       uintptr_t index,
                                       double *out,
                                       uintptr_t len);

/**
 * Sample Pearson correlation of `x[0..n]` and `y[0..n]`.
 *
 * # Safety
 * `x` and `y` must hold `n` doubles; `out` must be writable.
 */
enum DmStatus dm_pearson(const double *x, const double *y, uintptr_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIFFMAP_H */
