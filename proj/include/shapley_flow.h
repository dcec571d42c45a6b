/* C interface to the fictitious-play simulator and analysis library.
 *
 * Objects are opaque handles. Every call returns an sf_status; on failure
 * sf_last_error() gives a message for the calling thread. Requests and
 * reports are JSON text; doubles are written with 17 significant digits.
 * Strings returned through char** are owned by the caller and released with
 * sf_string_free. Output pointers that are NULL are skipped.
 */
#ifndef SHAPLEY_FLOW_H
#define SHAPLEY_FLOW_H

#include <stdint.h>

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
    SF_OK = 0,
    SF_E_DOMAIN = 1,
    SF_E_NO_EQUILIBRIUM = 2,
    SF_E_DEGENERATE = 3,
    SF_E_ABSORBED = 4,
    SF_E_INTEGRATION = 5,
    SF_E_PRECONDITION = 6,
    SF_E_NOT_FOUND = 7,
    SF_E_MODEL_VIOLATION = 8,
    SF_E_NON_CLOSURE = 9,
    SF_E_INVALID_ARGUMENT = 10,
    SF_E_INTERNAL = 100
} sf_status;

typedef struct sf_game sf_game;
typedef struct sf_jitter_model sf_jitter_model;

SF_API const char* sf_version(void);
SF_API const char* sf_status_name(sf_status s);
SF_API const char* sf_last_error(void);
SF_API void sf_string_free(char* s);

/* Games. JSON form: {"A": [[...],[...],[...]], "B": [[...],[...],[...]]}, or {"beta": b}. */
SF_API sf_status sf_game_family(double beta, sf_game** out);
SF_API sf_status sf_game_from_matrices(const double A[9], const double B[9], sf_game** out);
SF_API sf_status sf_game_from_json(const char* json, sf_game** out);
SF_API void sf_game_free(sf_game* g);
/* Matrices, equilibrium, landmark points. */
SF_API sf_status sf_game_describe(const sf_game* g, char** json_out);

/* Trajectory. Request keys: start ("random" | {"pA":[3],"pB":[3]}), seed, events,
 * max_time, stop_radius, constrained_J. */
SF_API sf_status sf_simulate(const sf_game* g, const char* request, char** json_out, char** csv_out);

/* Itinerary coding. Request: either "itinerary" ([[i,j],...], labels as 1..3 or
 * strings "1b".."3b") or a simulation request; plus variant ("all-I" | "literal"),
 * period, min_repeats. */
SF_API sf_status sf_code(const sf_game* g, const char* request, char** json_out);

/* Induced boundary flow. Request: what ("gamma" | "step" | "landmarks"),
 * point, steps, constrained. */
SF_API sf_status sf_induced(const sf_game* g, const char* request, char** json_out);

/* Poincare sections. Request: section ("S" | "V0xB31" | "A12xV1" | "V2xB12" |
 * "transversal"), start ("gamma" | "random" | {"pA","pB"}), count, seed, max_events. */
SF_API sf_status sf_section(const sf_game* g, const char* request, char** json_out, char** csv_out);

/* Game analyses. Request: kind ("corner-tables" | "ratios" | "stability" | "tau" |
 * "spiral" | "moebius-cone" | "winding" | "cone-lift" | "entry-maps") plus kind options. */
SF_API sf_status sf_analyze(const sf_game* g, const char* request, char** json_out, char** csv_out);

/* Jitter models. */
SF_API sf_status sf_jitter_model_game(double beta, sf_jitter_model** out);
SF_API sf_status sf_jitter_model_from_json(const char* json, sf_jitter_model** out);
SF_API void sf_jitter_model_free(sf_jitter_model* m);
SF_API sf_status sf_jitter_model_json(const sf_jitter_model* m, char** json_out);
/* Request: action ("fixed-points" | "periodic" | "realize" | "orbit" |
 * "sensitivity" | "divergence" | "scan-n0") plus action options. */
SF_API sf_status sf_jitter(const sf_jitter_model* m, const char* request, char** json_out, char** csv_out);

/* Acceptance suite. Request: only ([ids or names]), seed, timings.
 * *all_passed is set to 1 when every selected criterion passed. */
SF_API sf_status sf_verify(const char* request, char** json_out, int* all_passed);

/* Parameter sweep over the family. Request: beta_min, beta_max, points. */
SF_API sf_status sf_sweep(const char* request, char** json_out, char** csv_out);

/* Perturbed games. Request: beta, trials, norm, seed; or trial to describe one game. */
SF_API sf_status sf_perturb(const char* request, char** json_out);

#ifdef __cplusplus
}
#endif

#endif
