#ifndef EQPIDE_H
#define EQPIDE_H

/*
 * C interface to the eqpide library. All objects are opaque handles created
 * and released through this API. Functions return an eqpide_status; on
 * failure eqpide_last_error() describes the problem (per thread, valid until
 * the next call on that thread).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EQPIDE_API __declspec(dllexport)
#else
#define EQPIDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eqpide_status {
    EQPIDE_OK = 0,
    EQPIDE_ERR_INVALID_ARGUMENT = 1,
    EQPIDE_ERR_CONFIG = 2,
    EQPIDE_ERR_SOLVER = 3,
    EQPIDE_ERR_DOMAIN = 4,
    EQPIDE_VERIFY_FAILED = 5,
    EQPIDE_ERR_INTERNAL = 6
} eqpide_status;

typedef struct eqpide_config eqpide_config;
typedef struct eqpide_market eqpide_market;
typedef struct eqpide_closed_form eqpide_closed_form;
typedef struct eqpide_ode eqpide_ode;

typedef struct eqpide_functions {
    double N1, N2, M1, M2, M3, alpha;
} eqpide_functions;

typedef struct eqpide_mc_config {
    size_t n_paths;
    size_t n_steps;
    uint64_t seed;
    int antithetic;
} eqpide_mc_config;

typedef struct eqpide_estimate {
    double mean;
    double std_error;
    size_t n_effective;
} eqpide_estimate;

EQPIDE_API const char* eqpide_last_error(void);
EQPIDE_API const char* eqpide_version(void);

/* Worker count for parallel sections; 0 restores EQPIDE_THREADS / hardware default. */
EQPIDE_API void eqpide_set_threads(size_t n);

/* Configuration */
EQPIDE_API eqpide_status eqpide_config_load(const char* path, eqpide_config** out);
EQPIDE_API eqpide_status eqpide_config_parse(const char* text, eqpide_config** out);
/* "section.key=value"; re-validates the whole configuration. */
EQPIDE_API eqpide_status eqpide_config_set(eqpide_config* cfg, const char* assignment);
/* 16 hex digits plus terminator; buffer must hold at least 17 bytes. */
EQPIDE_API eqpide_status eqpide_config_hash(const eqpide_config* cfg, char* buffer, size_t size);
EQPIDE_API void eqpide_config_free(eqpide_config* cfg);

/* Commands. Progress goes to stderr. out_dir may be NULL to use the configured directory. */
EQPIDE_API eqpide_status eqpide_cmd_solve(const eqpide_config* cfg, const char* out_dir);
EQPIDE_API eqpide_status eqpide_cmd_verify(const eqpide_config* cfg, const char* out_dir);
EQPIDE_API eqpide_status eqpide_cmd_compare(const eqpide_config* cfg, const char* out_dir);

/* Market built from the [market] and [jumps] sections. */
EQPIDE_API eqpide_status eqpide_market_create(const eqpide_config* cfg, eqpide_market** out);
EQPIDE_API void eqpide_market_free(eqpide_market* market);
EQPIDE_API eqpide_status eqpide_market_excess_return(const eqpide_market* market, double s, double* out);
EQPIDE_API eqpide_status eqpide_market_kappa(const eqpide_market* market, double s, double* out);

/* Closed-form equilibrium. */
EQPIDE_API eqpide_status eqpide_closed_form_solve(const eqpide_market* market, size_t quad_steps,
                                                  eqpide_closed_form** out);
EQPIDE_API void eqpide_closed_form_free(eqpide_closed_form* cf);
EQPIDE_API eqpide_status eqpide_closed_form_eval(const eqpide_closed_form* cf, double s, eqpide_functions* out);
EQPIDE_API eqpide_status eqpide_closed_form_objective(const eqpide_closed_form* cf, const eqpide_market* market,
                                                      double t, double wealth, double* out);

/* Backward ODE solve. */
EQPIDE_API eqpide_status eqpide_ode_solve(const eqpide_market* market, size_t n_steps, eqpide_ode** out);
EQPIDE_API void eqpide_ode_free(eqpide_ode* ode);
EQPIDE_API size_t eqpide_ode_size(const eqpide_ode* ode);
EQPIDE_API eqpide_status eqpide_ode_node(const eqpide_ode* ode, size_t k, double* t, eqpide_functions* out);

/* Monte Carlo under the equilibrium strategy of cf, started from (s, x, z). */
EQPIDE_API eqpide_status eqpide_mc_theta(const eqpide_market* market, const eqpide_closed_form* cf, double s,
                                         double x, double z, const eqpide_mc_config* mc, eqpide_estimate* out);
EQPIDE_API eqpide_status eqpide_mc_g(const eqpide_market* market, const eqpide_closed_form* cf, double s, double x,
                                     double z, const eqpide_mc_config* mc, eqpide_estimate* out);
EQPIDE_API eqpide_status eqpide_mc_cost(const eqpide_market* market, const eqpide_closed_form* cf, double t,
                                        double y, const eqpide_mc_config* mc, eqpide_estimate* out);

#ifdef __cplusplus
}
#endif

#endif /* EQPIDE_H */
