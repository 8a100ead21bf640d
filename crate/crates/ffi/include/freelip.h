#ifndef FREELIP_H
#define FREELIP_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FREELIP_OK 0

#define FREELIP_ERR_INVALID 2

#define FREELIP_ERR_SOLVER 3

#define FREELIP_ERR_RESOURCE 4

#define FREELIP_ERR_NULL 5

#define FREELIP_ERR_UTF8 6

#define FREELIP_ERR_PANIC 7

#define FREELIP_FAMILY_DIAMOND 0

#define FREELIP_FAMILY_MULTIDIAMOND 1

#define FREELIP_FAMILY_LAAKSO 2

/**
 * Two-pole graph.
 */
typedef struct FreelipGraph FreelipGraph;

/**
 * Finite metric space.
 */
typedef struct FreelipSpace FreelipSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. Free it
 * with `freelip_string_free`.
 */
char *freelip_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed only once.
 */
void freelip_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t freelip_space_from_json(const char *json, struct FreelipSpace **out);

/**
 * # Safety
 * `s` must be NULL or a handle from `freelip_space_from_json`, freed only once.
 */
void freelip_space_free(struct FreelipSpace *s);

/**
 * Number of points, or 0 for NULL.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t freelip_space_len(const struct FreelipSpace *s);

/**
 * Transportation norm of the molecule `{"point": coeff, …}`. `exact`, if
 * not NULL, receives the rational value as text.
 *
 * # Safety
 * Pointers must be valid; `molecule_json` NUL-terminated.
 */
int32_t freelip_ae_norm(const struct FreelipSpace *s,
                        const char *molecule_json,
                        double *value,
                        char **exact);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t freelip_graph_from_json(const char *json, struct FreelipGraph **out);

/**
 * Builds level `level` of a family; `branch` is used by the multibranching family.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t freelip_graph_generate(uint32_t family,
                               size_t level,
                               size_t branch,
                               struct FreelipGraph **out);

/**
 * Closed-form edge, vertex and cycle-space counts without building the graph.
 *
 * # Safety
 * Output pointers must be valid.
 */
int32_t freelip_family_counts(uint32_t family,
                              size_t level,
                              size_t branch,
                              uint64_t *edges,
                              uint64_t *vertices,
                              uint64_t *cycle_dim);

/**
 * # Safety
 * `g` must be NULL or a graph handle, freed only once.
 */
void freelip_graph_free(struct FreelipGraph *g);

/**
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t freelip_graph_edge_count(const struct FreelipGraph *g);

/**
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t freelip_graph_vertex_count(const struct FreelipGraph *g);

/**
 * Graph as JSON text.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
int32_t freelip_graph_to_json(const struct FreelipGraph *g, char **out);

/**
 * Norm of the edge vector `{"edge-id": coeff, …}` modulo the cycle space.
 *
 * # Safety
 * Pointers must be valid; `vector_json` NUL-terminated.
 */
int32_t freelip_quotient_norm(const struct FreelipGraph *g,
                              const char *vector_json,
                              double *value,
                              char **exact);

/**
 * `‖Qf‖₁` for the Haar witness on `D_n`.
 *
 * # Safety
 * `value` must be valid; `exact` may be NULL.
 */
int32_t freelip_haar_witness(size_t n, double *value, char **exact);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREELIP_H */
