#ifndef ZSFREE_H
#define ZSFREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ZSF_NONE SIZE_MAX



/**
 * Search option bits.
 */
#define ZSF_NO_SYMMETRY 1

#define ZSF_NO_ANTICLIQUE 2

#define ZSF_NO_MEMO 4

/**
 * Result of every fallible call.
 */
typedef enum ZsfStatus {
  ZSF_STATUS_OK = 0,
  ZSF_STATUS_INVALID_ARGUMENT = 1,
  ZSF_STATUS_NULL_POINTER = 2,
  ZSF_STATUS_CAPACITY = 3,
  ZSF_STATUS_OVERFLOW = 4,
  ZSF_STATUS_INSTANTIATION_FAILED = 5,
  ZSF_STATUS_AUDIT = 6,
  ZSF_STATUS_CHECKPOINT = 7,
  ZSF_STATUS_INTERRUPTED = 8,
  ZSF_STATUS_IO = 9,
  ZSF_STATUS_BUFFER_TOO_SMALL = 10,
  ZSF_STATUS_OUT_OF_RANGE = 11,
  ZSF_STATUS_PANIC = 12,
} ZsfStatus;

/**
 * Almost-examples of one search, one per relabeling orbit.
 */
typedef struct ZsfSearch ZsfSearch;

/**
 * Rows of the table for one `k`.
 */
typedef struct ZsfTable ZsfTable;

/**
 * One table row without its example elements.
 */
typedef struct ZsfTableRow {
  size_t k;
  /**
   * The row applies when `divisor | n`.
   */
  uint64_t divisor;
  uint64_t n_min_observed;
  size_t value;
  uint64_t example_n;
  /**
   * Number of example elements, always `k`.
   */
  size_t example_len;
  bool minimal;
} ZsfTableRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t zsf_last_error(char *buf, size_t len);

/**
 * Number of distinct nonempty subset sums of `elements` in `Z_n` and
 * whether none of them is zero.
 *
 * # Safety
 * `elements` must point to `len` values; the out pointers must be valid.
 */
enum ZsfStatus zsf_sumset_size(uint64_t n,
                               const uint64_t *elements,
                               size_t len,
                               size_t *count_out,
                               bool *zero_sum_free_out);

/**
 * Whether `elements` are distinct nonzero residues mod `n`, zero-sum free,
 * with exactly `ell` nonempty sums.
 *
 * # Safety
 * `elements` must point to `len` values.
 */
bool zsf_verify_example(uint64_t n, const uint64_t *elements, size_t len, size_t ell);

/**
 * `f_n(k)` by enumeration. `*value_out` is [`ZSF_NONE`] when no
 * zero-sum-free `k`-set exists; otherwise the minimizing set is written to
 * `witness_out` (room for `k` values) unless it is null.
 *
 * # Safety
 * `value_out` must be valid; `witness_out` null or valid for `k` writes.
 */
enum ZsfStatus zsf_brute_force_f(uint64_t n,
                                 size_t k,
                                 bool orbit_reduction,
                                 size_t *value_out,
                                 uint64_t *witness_out);

/**
 * Runs a search. `ell_max` of [`ZSF_NONE`] selects `k(k+1)/2 - 1`;
 * `flags` combines `ZSF_NO_*` bits.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ZsfStatus zsf_search_run(size_t k,
                              size_t ell_max,
                              uint32_t flags,
                              size_t workers,
                              struct ZsfSearch **out);

/**
 * Number of almost-examples, 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t zsf_search_count(const struct ZsfSearch *s);

/**
 * Class count of almost-example `i`.
 *
 * # Safety
 * `s` must be a live handle and `ell_out` valid.
 */
enum ZsfStatus zsf_search_ell(const struct ZsfSearch *s, size_t i, size_t *ell_out);

/**
 * Class labels of almost-example `i`, one per nonempty subset in mask
 * order; `buf` needs `2^k - 1` bytes.
 *
 * # Safety
 * `s` must be a live handle; `buf` valid for `len` writes.
 */
enum ZsfStatus zsf_search_labels(const struct ZsfSearch *s, size_t i, uint8_t *buf, size_t len);

/**
 * Releases a search handle; null is ignored.
 *
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void zsf_search_free(struct ZsfSearch *s);

/**
 * Searches, solves and builds the table for `k`, sweeping moduli up to
 * `sweep_limit`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ZsfStatus zsf_table_build(size_t k,
                               uint64_t sweep_limit,
                               size_t workers,
                               struct ZsfTable **out);

/**
 * Number of rows, 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t zsf_table_len(const struct ZsfTable *t);

/**
 * Row `i`; its example elements go to `elements` (room for `k` values)
 * unless it is null.
 *
 * # Safety
 * `t` must be a live handle, `row_out` valid, `elements` null or valid for
 * `elements_len` writes.
 */
enum ZsfStatus zsf_table_row(const struct ZsfTable *t,
                             size_t i,
                             struct ZsfTableRow *row_out,
                             uint64_t *elements,
                             size_t elements_len);

/**
 * Releases a table handle; null is ignored.
 *
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void zsf_table_free(struct ZsfTable *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZSFREE_H */
