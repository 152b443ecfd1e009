#ifndef TOPO_DENOISE_H
#define TOPO_DENOISE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdint.h>
#include <stddef.h>

// Status codes. The nonzero values for library errors match the CLI exit codes.
typedef enum TdStatus {
  TD_STATUS_OK = 0,
  // Null pointer or non-UTF-8 string from the caller.
  TD_STATUS_INVALID_ARGUMENT = 1,
  TD_STATUS_VALIDATION = 2,
  TD_STATUS_DEGENERATE = 3,
  TD_STATUS_RESOURCE_CAP = 4,
  TD_STATUS_PANIC = 5,
} TdStatus;

typedef enum TdShape {
  TD_SHAPE_CIRCLE = 0,
  TD_SHAPE_SPHERE = 1,
  TD_SHAPE_POINT = 2,
} TdShape;

typedef enum TdComplex {
  TD_COMPLEX_RIPS = 0,
  TD_COMPLEX_LAZY_WITNESS = 1,
} TdComplex;

// Barcode handle.
typedef struct TdBarcode TdBarcode;

// Point cloud handle.
typedef struct TdCloud TdCloud;

typedef struct TdDenoiseParams {
  size_t subset;
  double sigma;
  double omega;
  double step_c;
  size_t iterations;
  uint64_t seed;
} TdDenoiseParams;

typedef struct TdBarcodeParams {
  enum TdComplex complex;
  size_t max_dim;
  double max_eps;
  // Landmark count for witness complexes; capped at the cloud size.
  size_t landmarks;
  uint64_t landmark_seed;
  size_t nu;
  size_t max_simplices;
} TdBarcodeParams;

typedef struct TdInterval {
  size_t dim;
  double birth;
  // Infinity for classes alive at the end of the filtration.
  double death;
} TdInterval;

// Message for the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next call into this library on the same
// thread.
const char *td_last_error(void);

// Copies `n * dim` row-major coordinates into a new cloud.
//
// # Safety
// `coords` must point to `n * dim` readable doubles; `out` must be writable.
enum TdStatus td_cloud_new(const double *coords, size_t n, size_t dim, struct TdCloud **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum TdStatus td_cloud_read_csv(const char *path, struct TdCloud **out);

// # Safety
// `cloud` must be a live handle and `path` a NUL-terminated string.
enum TdStatus td_cloud_write_csv(const struct TdCloud *cloud, const char *path);

// Number of points; 0 for NULL.
//
// # Safety
// `cloud` must be NULL or a live handle.
size_t td_cloud_len(const struct TdCloud *cloud);

// # Safety
// `cloud` must be NULL or a live handle.
size_t td_cloud_dim(const struct TdCloud *cloud);

// Row-major coordinates, borrowed from the handle.
//
// # Safety
// `cloud` must be NULL or a live handle; the result dies with it.
const double *td_cloud_coords(const struct TdCloud *cloud);

// # Safety
// `cloud` must be NULL or a handle not yet freed.
void td_cloud_free(struct TdCloud *cloud);

// Samples `n` points from a noisy circle, sphere or point. `point_dim` is
// only read for `Point`.
//
// # Safety
// `out` must be writable.
enum TdStatus td_synth(enum TdShape shape,
                       size_t point_dim,
                       double sigma,
                       size_t n,
                       uint64_t seed,
                       struct TdCloud **out);

// Keeps the densest `fraction` of points under the k-nearest-neighbor estimate.
//
// # Safety
// `cloud` must be a live handle; `out` must be writable.
enum TdStatus td_threshold(const struct TdCloud *cloud,
                           size_t k,
                           double fraction,
                           struct TdCloud **out);

struct TdDenoiseParams td_denoise_defaults(void);

// De-noises a random subset of `data`; `m_norm` may be NULL.
//
// # Safety
// `data` and `params` must be valid; `out` must be writable.
enum TdStatus td_denoise(const struct TdCloud *data,
                         const struct TdDenoiseParams *params,
                         struct TdCloud **out,
                         double *m_norm);

struct TdBarcodeParams td_barcode_defaults(void);

// # Safety
// `cloud` and `params` must be valid; `out` must be writable.
enum TdStatus td_barcode(const struct TdCloud *cloud,
                         const struct TdBarcodeParams *params,
                         struct TdBarcode **out);

// # Safety
// `barcode` must be NULL or a live handle.
size_t td_barcode_len(const struct TdBarcode *barcode);

// # Safety
// `barcode` must be a live handle; `out` must be writable.
enum TdStatus td_barcode_interval(const struct TdBarcode *barcode,
                                  size_t index,
                                  struct TdInterval *out);

// Longest over second-longest interval length in `dim`: infinity for a
// single interval, NaN when there are none.
//
// # Safety
// `barcode` must be NULL or a live handle.
double td_barcode_prominence(const struct TdBarcode *barcode, size_t dim);

// # Safety
// `barcode` must be NULL or a handle not yet freed.
void td_barcode_free(struct TdBarcode *barcode);

#endif  /* TOPO_DENOISE_H */
