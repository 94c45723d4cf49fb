#ifndef UQCLONE_H
#define UQCLONE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define UQ_OK 0

#define UQ_ERR_NULL 1

#define UQ_ERR_UTF8 2

#define UQ_ERR_PARSE 3

#define UQ_ERR_BUDGET 4

#define UQ_ERR_PRECONDITION 5

#define UQ_ERR_UNKNOWN 6

#define UQ_ERR_PANIC 7

#define UQ_ERR_IO 8

/**
 * Arity or domain mismatch.
 */
#define UQ_ERR_MISMATCH 9

#define UQ_USAT_COMPLEMENT_CLOSED 0

#define UQ_USAT_BOTH_CONSTANTS 1

#define UQ_USAT_SCHAEFER 2

#define UQ_USAT_CONP_COMPLETE 3

#define UQ_USAT_US_COMPLETE 4

#define UQ_COVERED 0

#define UQ_NOT_COVERED 1

#define UQ_FROZEN_COLLAPSE 2

#define UQ_ZERO_MODELS 0

#define UQ_UNIQUE_MODEL 1

#define UQ_MANY_MODELS 2

#define UQ_UPP_VALID 0

#define UQ_UPP_WRONG_RELATION 1

#define UQ_UPP_NOT_UNIQUE 2

#define UQ_UPP_NOT_FROZEN 3

/**
 * Opaque CSP instance.
 */
typedef struct UqInstance UqInstance;

/**
 * Opaque constraint language.
 */
typedef struct UqLanguage UqLanguage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Free with
 * `uq_string_free`.
 */
char *uq_last_error_message(void);

/**
 * # Safety
 * `s` must be null or come from this library.
 */
void uq_string_free(char *s);

/**
 * Parses `relation` blocks.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out_lang` writable.
 */
int uq_language_parse(const char *src, UqLanguage **out_lang);

/**
 * # Safety
 * `lang` must be null or come from `uq_language_parse`.
 */
void uq_language_free(UqLanguage *lang);

/**
 * Complexity of unique satisfiability over a Boolean language, as a
 * `UQ_USAT_*` code.
 *
 * # Safety
 * `lang` must come from `uq_language_parse`; `out_class` must be writable.
 */
int uq_usat_class(const UqLanguage *lang, int *out_class);

/**
 * Bit i is set when the language is preserved by atom i of
 * (0, 1, not, and, or, majority, xor3).
 *
 * # Safety
 * `lang` must come from `uq_language_parse`; `out_bits` must be writable.
 */
int uq_atom_profile(const UqLanguage *lang, uint8_t *out_bits);

/**
 * `UQ_COVERED`, `UQ_NOT_COVERED` or `UQ_FROZEN_COLLAPSE` for a co-clone
 * name such as `IE0` or `IS11^3`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out_verdict` must be writable.
 */
int uq_covered_verdict(const char *name, int *out_verdict);

/**
 * Parses an instance. A `lang` line is resolved against `base_dir`
 * (the working directory when null).
 *
 * # Safety
 * `src` must be a NUL-terminated string, `base_dir` null or one, and
 * `out_inst` writable.
 */
int uq_instance_parse(const char *src, const char *base_dir, UqInstance **out_inst);

/**
 * # Safety
 * `inst` must be null or come from `uq_instance_parse`.
 */
void uq_instance_free(UqInstance *inst);

/**
 * # Safety
 * `inst` must come from `uq_instance_parse`; `out_n` must be writable.
 */
int uq_instance_var_count(const UqInstance *inst, size_t *out_n);

/**
 * Counts models, stopping at `cap` when it is non-zero. `out_capped` is
 * set to 1 when the cap was reached.
 *
 * # Safety
 * `inst` must come from `uq_instance_parse`; out-pointers must be writable.
 */
int uq_instance_count_models(const UqInstance *inst,
                             uint64_t cap,
                             uint64_t *out_count,
                             int *out_capped);

/**
 * Decides whether the instance has exactly one model. When `model` is
 * non-null it receives the unique model (or the first model when there
 * are several) and must hold `model_len >= var count` bytes.
 *
 * # Safety
 * `inst` must come from `uq_instance_parse`; `out_status` must be
 * writable; `model` must be null or valid for `model_len` bytes.
 */
int uq_instance_unique(const UqInstance *inst, int *out_status, uint8_t *model, size_t model_len);

/**
 * Checks definition `index` of a definition file against the relation in
 * `target_src` (one `relation` block). `over` paths are resolved against
 * `base_dir`.
 *
 * # Safety
 * String arguments must be NUL-terminated (`base_dir` may be null);
 * `out_verdict` must be writable.
 */
int uq_check_upp(const char *defs_src,
                 const char *base_dir,
                 size_t index,
                 const char *target_src,
                 int *out_verdict);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* UQCLONE_H */
