#ifndef CATFLOW_H
#define CATFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CatflowStatus {
  CATFLOW_STATUS_OK = 0,
  CATFLOW_STATUS_NULL_POINTER = 1,
  CATFLOW_STATUS_INVALID_UTF8 = 2,
  CATFLOW_STATUS_PARSE = 3,
  CATFLOW_STATUS_DOMAIN = 4,
  CATFLOW_STATUS_UNSUPPORTED = 5,
  CATFLOW_STATUS_PANIC = 6,
} CatflowStatus;

// Opaque handle to a loaded model.
typedef struct CatflowModel CatflowModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next catflow call on the same thread.
const char *catflow_last_error(void);

// Parses a JSON model file.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum CatflowStatus catflow_model_load_json(const char *json, struct CatflowModel **out);

// Releases a model. NULL is ignored.
//
// # Safety
// `model` must come from this library and not be used afterwards.
void catflow_model_free(struct CatflowModel *model);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void catflow_string_free(char *s);

// Counts structural and diagram-level violations; zero means valid.
//
// # Safety
// `model` must be a live handle and `violations` a valid pointer.
enum CatflowStatus catflow_model_validate(const struct CatflowModel *model, size_t *violations);

// Serializes a model back to its JSON file form.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum CatflowStatus catflow_model_to_json(const struct CatflowModel *model, char **out);

// Number of parts of `object` in the model's diagram.
//
// # Safety
// `model` must be a live handle, `object` NUL-terminated, `out` valid.
enum CatflowStatus catflow_model_nparts(const struct CatflowModel *model,
                                        const char *object,
                                        size_t *out);

// Translates an SFD to `"ssd"` or `"cld"`, or an SSD to `"cld"`.
//
// # Safety
// `model` must be a live handle, `target` NUL-terminated, `out` valid.
enum CatflowStatus catflow_model_translate(const struct CatflowModel *model,
                                           const char *target,
                                           struct CatflowModel **out);

// Integrates an SFD with fixed-step RK4 under a scenario given as JSON
// (a model file of kind `scenario`, or its bare body) and returns the
// trajectory CSV.
//
// # Safety
// `model` must be a live handle, `scenario_json` NUL-terminated, `csv_out` valid.
enum CatflowStatus catflow_simulate_rk4(const struct CatflowModel *model,
                                        const char *scenario_json,
                                        char **csv_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATFLOW_H */
