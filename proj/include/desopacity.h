/* C interface to the desopacity library. All strings are UTF-8 and
 * NUL-terminated; strings returned through `char**` are owned by the caller
 * and released with dop_string_free. Handles are opaque. On failure a call
 * returns a non-zero status and dop_last_error() describes it (per thread). */
#ifndef DESOPACITY_H
#define DESOPACITY_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define DOP_API __attribute__((visibility("default")))
#else
#define DOP_API
#endif

typedef enum dop_status {
  DOP_OK = 0,
  DOP_ERR_PARSE = 1,        /* malformed document; see dop_last_error_line */
  DOP_ERR_SEMANTIC = 2,     /* well-formed input violating a model invariant */
  DOP_ERR_PRECONDITION = 3, /* operation called outside its domain */
  DOP_ERR_RESOURCE = 4,     /* size guard exceeded */
  DOP_ERR_ARGUMENT = 5,     /* null handle or invalid enum value */
  DOP_ERR_INTERNAL = 6
} dop_status;

typedef enum dop_mode { DOP_MODE_OBSERVATION = 0, DOP_MODE_DECISION = 1 } dop_mode;

typedef enum dop_extraction {
  DOP_EXTRACT_FIRST_FEASIBLE = 0,
  DOP_EXTRACT_LOCALLY_MAXIMAL = 1,
  DOP_EXTRACT_ENUMERATE_ALL = 2
} dop_extraction;

typedef struct dop_model dop_model;
typedef struct dop_policy dop_policy;
typedef struct dop_synthesis dop_synthesis;

DOP_API const char* dop_version(void);
DOP_API const char* dop_last_error(void);
/* 1-based line of the last parse error, 0 when unknown. */
DOP_API size_t dop_last_error_line(void);
DOP_API void dop_string_free(char* s);

/* Models. */
DOP_API dop_status dop_model_parse(const char* text, size_t len, dop_model** out);
DOP_API dop_status dop_model_random(uint64_t seed, size_t max_states, size_t max_events, dop_model** out);
DOP_API void dop_model_free(dop_model* model);
DOP_API dop_status dop_model_serialize(const dop_model* model, char** out);
DOP_API dop_status dop_model_dot(const dop_model* model, char** out);
DOP_API size_t dop_model_num_states(const dop_model* model);
DOP_API size_t dop_model_num_transitions(const dop_model* model);

/* Open-loop current-state opacity. `witness` (may be NULL) receives the
 * shortest revealing intruder observation, or NULL when opaque. */
DOP_API dop_status dop_verify_open_loop(const dop_model* model, int* opaque, char** witness);

/* Supervisors: a table or a control structure document. */
DOP_API dop_status dop_policy_parse(const dop_model* model, const char* text, size_t len, dop_policy** out);
/* Random table policy over observations of length <= depth. */
DOP_API dop_status dop_policy_random(const dop_model* model, uint64_t seed, size_t depth, dop_policy** out);
DOP_API void dop_policy_free(dop_policy* policy);
DOP_API dop_status dop_policy_serialize(const dop_policy* policy, char** out);
/* DOT of a structure policy (tables have no structure: DOP_ERR_PRECONDITION). */
DOP_API dop_status dop_policy_structure_dot(const dop_policy* policy, char** out);
DOP_API dop_status dop_policy_estimator_dot(const dop_policy* policy, dop_mode mode, char** out);

typedef struct dop_verdict {
  int opaque;
  int exact;               /* 0 when only strings up to `bound` were checked */
  size_t bound;
  size_t explored_states;
  char* counterexample;    /* space-separated events, NULL when opaque */
  char* revealed_estimate; /* "{x,...}", NULL when opaque */
} dop_verdict;

/* depth_bound == 0 requests exact verification. */
DOP_API dop_status dop_verify_closed_loop(const dop_policy* policy, dop_mode mode, size_t depth_bound,
                                          dop_verdict* out);
DOP_API void dop_verdict_clear(dop_verdict* verdict);

/* Controlled state estimate from a flow trace. */
DOP_API dop_status dop_estimate_flow(const dop_model* model, const char* trace, size_t len, dop_mode mode,
                                     char** estimate);

typedef struct dop_synthesis_config {
  dop_mode mode;
  dop_extraction extraction;
  size_t size_guard;    /* 0 selects the default */
  size_t enumerate_cap; /* 0 selects the default */
  int diagnostics;      /* keep the raw arena and its unsafe targets for DOT */
} dop_synthesis_config;

DOP_API void dop_synthesis_config_init(dop_synthesis_config* cfg);
DOP_API dop_status dop_synthesize(const dop_model* model, const dop_synthesis_config* cfg, dop_synthesis** out);
DOP_API void dop_synthesis_free(dop_synthesis* synthesis);
DOP_API int dop_synthesis_solved(const dop_synthesis* synthesis);
DOP_API size_t dop_synthesis_structure_count(const dop_synthesis* synthesis);
DOP_API dop_status dop_synthesis_structure(const dop_synthesis* synthesis, size_t index, char** out);
DOP_API dop_status dop_synthesis_structure_dot(const dop_synthesis* synthesis, size_t index, char** out);
/* Raw arena with pruned states outlined. */
DOP_API dop_status dop_synthesis_arena_dot(const dop_synthesis* synthesis, char** out);
DOP_API dop_status dop_synthesis_report(const dop_synthesis* synthesis, int timing, char** out);

/* Lowercase hex SHA-256 of a byte buffer. */
DOP_API dop_status dop_sha256_hex(const void* data, size_t len, char** out);

#ifdef __cplusplus
}
#endif

#endif
