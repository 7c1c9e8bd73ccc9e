#ifndef ETALE_H
#define ETALE_H

/* Generated by cbindgen from etale-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by the C API.
 */
typedef enum EtaleStatus {
  ETALE_STATUS_OK = 0,
  ETALE_STATUS_NULL_POINTER = 1,
  ETALE_STATUS_UTF8_ERROR = 2,
  ETALE_STATUS_PARSE_ERROR = 3,
  ETALE_STATUS_DOMAIN_ERROR = 4,
  ETALE_STATUS_PANIC = 5,
} EtaleStatus;

/**
 * Opaque groupoid handle.
 */
typedef struct EtaleGroupoid EtaleGroupoid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library, as a static string (do not free).
 */
const char *etale_version(void);

/**
 * The last error message on this thread, as a newly allocated string, or
 * NULL if no error occurred yet. Free with [`etale_string_free`].
 */
char *etale_last_error(void);

/**
 * Frees a string allocated by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a function of this library and not freed
 * before.
 */
void etale_string_free(char *s);

/**
 * Parses a groupoid-denoting spec (groupoid-explicit, groupoid-action, or
 * group) into a handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to a handle slot.
 */
enum EtaleStatus etale_groupoid_parse(const char *text, struct EtaleGroupoid **out);

/**
 * Releases a groupoid handle. NULL is ignored.
 *
 * # Safety
 * `g` must come from [`etale_groupoid_parse`] and not be freed twice.
 */
void etale_groupoid_free(struct EtaleGroupoid *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
intptr_t etale_groupoid_object_count(const struct EtaleGroupoid *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
intptr_t etale_groupoid_arrow_count(const struct EtaleGroupoid *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
intptr_t etale_groupoid_orbit_count(const struct EtaleGroupoid *g);

/**
 * Number of violated groupoid axioms (0 means valid).
 *
 * # Safety
 * `g` must be a live handle.
 */
intptr_t etale_groupoid_violation_count(const struct EtaleGroupoid *g);

/**
 * Order of the isotropy group at the given object, or -1 on error.
 *
 * # Safety
 * `g` must be a live handle.
 */
intptr_t etale_groupoid_isotropy_order(const struct EtaleGroupoid *g, uintptr_t object);

/**
 * The validation report as newline-separated text (empty when valid).
 *
 * # Safety
 * `g` must be a live handle; `out` a valid string slot. Free the string
 * with [`etale_string_free`].
 */
enum EtaleStatus etale_groupoid_validate_report(const struct EtaleGroupoid *g, char **out);

/**
 * Number of pointed morphism classes from `source` to `target` over the
 * star object, computed with the given search cap. Returns -1 on error.
 *
 * # Safety
 * Both handles must be live.
 */
intptr_t etale_morphism_class_count(const struct EtaleGroupoid *source,
                                    const struct EtaleGroupoid *target,
                                    uintptr_t star,
                                    uintptr_t cap);

/**
 * Number of extension classes of the quotient by the abelian kernel with
 * the trivial action, from two group spec texts. Returns -1 on error.
 *
 * # Safety
 * Both texts must be valid NUL-terminated strings.
 */
intptr_t etale_extension_class_count(const char *quotient_spec,
                                     const char *kernel_spec,
                                     uintptr_t cap);

/**
 * Runs twisted-loop energy descent over an orbifold spec text and writes
 * the minimized length.
 *
 * # Safety
 * `orbifold_spec` and `twist_word` must be valid strings, `out_length` a
 * valid double slot.
 */
enum EtaleStatus etale_geodesic_min_length(const char *orbifold_spec,
                                           const char *twist_word,
                                           uintptr_t samples,
                                           uint64_t seed,
                                           double grad_tol,
                                           double *out_length);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ETALE_H */
