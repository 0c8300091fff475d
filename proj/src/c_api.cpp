#include "eqpide/eqpide.h"

#include "eqpide/closed_form.hpp"
#include "eqpide/commands.hpp"
#include "eqpide/config.hpp"
#include "eqpide/monte_carlo.hpp"
#include "eqpide/ode_system.hpp"
#include "eqpide/parallel.hpp"
#include "eqpide/pide_solver.hpp"

#include <cstring>
#include <fstream>
#include <iostream>
#include <new>
#include <sstream>
#include <string>

struct eqpide_config {
    eqpide::IniDocument doc;
    eqpide::RunConfig cfg;
};

struct eqpide_market {
    eqpide::MarketParams params;
};

struct eqpide_closed_form {
    eqpide::ClosedFormSolution sol;
};

struct eqpide_ode {
    eqpide::OdeSolution sol;
};

namespace {

thread_local std::string g_last_error;

eqpide_status fail(eqpide_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

// Maps the exception in flight to a status code.
eqpide_status translate() {
    try {
        throw;
    } catch (const eqpide::ConfigError& e) {
        return fail(EQPIDE_ERR_CONFIG, e.what());
    } catch (const eqpide::InvalidMarket& e) {
        std::string msg = "invalid market:";
        for (const auto& v : e.violations()) msg += "\n  " + v;
        return fail(EQPIDE_ERR_SOLVER, msg);
    } catch (const eqpide::SingularityError& e) {
        return fail(EQPIDE_ERR_SOLVER, e.what());
    } catch (const eqpide::PideError& e) {
        return fail(EQPIDE_ERR_SOLVER, e.what());
    } catch (const eqpide::ConvexityError& e) {
        return fail(EQPIDE_ERR_SOLVER, e.what());
    } catch (const eqpide::NonConvergence& e) {
        return fail(EQPIDE_ERR_SOLVER, e.what());
    } catch (const eqpide::SimulationError& e) {
        return fail(EQPIDE_ERR_SOLVER, e.what());
    } catch (const std::domain_error& e) {
        return fail(EQPIDE_ERR_DOMAIN, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(EQPIDE_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(EQPIDE_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(EQPIDE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(EQPIDE_ERR_INTERNAL, "unknown error");
    }
}

template <class F>
eqpide_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (...) {
        return translate();
    }
}

eqpide_functions to_c(double N1, double N2, double M1, double M2, double M3, double alpha) {
    return {N1, N2, M1, M2, M3, alpha};
}

eqpide::SimConfig to_sim(const eqpide_mc_config* mc) {
    eqpide::SimConfig s;
    s.n_paths = mc->n_paths;
    s.n_steps = mc->n_steps;
    s.seed = mc->seed;
    s.antithetic = mc->antithetic != 0;
    return s;
}

template <class Command>
eqpide_status run_command(const eqpide_config* cfg, const char* out_dir, Command cmd) {
    if (!cfg) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null config");
    return guarded([&] {
        eqpide::RunConfig run = cfg->cfg;
        if (out_dir) run.output_dir = out_dir;
        const auto status = cmd(run, std::cerr);
        if (status == eqpide::CommandStatus::checks_failed)
            return fail(EQPIDE_VERIFY_FAILED, "one or more checks failed; see verify_report.csv");
        return EQPIDE_OK;
    });
}

}  // namespace

extern "C" {

const char* eqpide_last_error(void) { return g_last_error.c_str(); }

const char* eqpide_version(void) { return "1.0.0"; }

void eqpide_set_threads(size_t n) { eqpide::set_worker_count(n); }

eqpide_status eqpide_config_load(const char* path, eqpide_config** out) {
    if (!path || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw eqpide::ConfigError(path, 0, 0, "cannot open config file");
        std::ostringstream ss;
        ss << in.rdbuf();
        auto* c = new eqpide_config{eqpide::parse_ini(ss.str(), path), {}};
        try {
            c->cfg = eqpide::build_config(c->doc);
        } catch (...) {
            delete c;
            throw;
        }
        *out = c;
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_config_parse(const char* text, eqpide_config** out) {
    if (!text || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto* c = new eqpide_config{eqpide::parse_ini(text, "<string>"), {}};
        try {
            c->cfg = eqpide::build_config(c->doc);
        } catch (...) {
            delete c;
            throw;
        }
        *out = c;
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_config_set(eqpide_config* cfg, const char* assignment) {
    if (!cfg || !assignment) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        eqpide::IniDocument doc = cfg->doc;
        eqpide::apply_override(doc, assignment);
        eqpide::RunConfig rebuilt = eqpide::build_config(doc);
        cfg->doc = std::move(doc);
        cfg->cfg = std::move(rebuilt);
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_config_hash(const eqpide_config* cfg, char* buffer, size_t size) {
    if (!cfg || !buffer) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    const std::string& h = cfg->cfg.config_hash;
    if (size < h.size() + 1) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "buffer too small");
    std::memcpy(buffer, h.c_str(), h.size() + 1);
    return EQPIDE_OK;
}

void eqpide_config_free(eqpide_config* cfg) { delete cfg; }

eqpide_status eqpide_cmd_solve(const eqpide_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, eqpide::cmd_solve);
}

eqpide_status eqpide_cmd_verify(const eqpide_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, eqpide::cmd_verify);
}

eqpide_status eqpide_cmd_compare(const eqpide_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, eqpide::cmd_compare);
}

eqpide_status eqpide_market_create(const eqpide_config* cfg, eqpide_market** out) {
    if (!cfg || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new eqpide_market{eqpide::MarketParams(cfg->cfg.market)};
        return EQPIDE_OK;
    });
}

void eqpide_market_free(eqpide_market* market) { delete market; }

eqpide_status eqpide_market_excess_return(const eqpide_market* market, double s, double* out) {
    if (!market || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = market->params.excess_return(s);
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_market_kappa(const eqpide_market* market, double s, double* out) {
    if (!market || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = market->params.kappa(s);
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_closed_form_solve(const eqpide_market* market, size_t quad_steps, eqpide_closed_form** out) {
    if (!market || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new eqpide_closed_form{eqpide::solve_closed_form(market->params, quad_steps)};
        return EQPIDE_OK;
    });
}

void eqpide_closed_form_free(eqpide_closed_form* cf) { delete cf; }

eqpide_status eqpide_closed_form_eval(const eqpide_closed_form* cf, double s, eqpide_functions* out) {
    if (!cf || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        if (!(s >= 0.0 && s <= cf->sol.N1.horizon())) throw std::domain_error("time outside [0, T]");
        const auto v = eqpide::evaluate(cf->sol, s);
        *out = to_c(v.N1, v.N2, v.M1, v.M2, v.M3, v.alpha_star);
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_closed_form_objective(const eqpide_closed_form* cf, const eqpide_market* market, double t,
                                           double wealth, double* out) {
    if (!cf || !market || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = eqpide::equilibrium_objective(cf->sol, market->params, t, wealth);
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_ode_solve(const eqpide_market* market, size_t n_steps, eqpide_ode** out) {
    if (!market || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new eqpide_ode{eqpide::integrate_backward(market->params, n_steps)};
        return EQPIDE_OK;
    });
}

void eqpide_ode_free(eqpide_ode* ode) { delete ode; }

size_t eqpide_ode_size(const eqpide_ode* ode) { return ode ? ode->sol.size() : 0; }

eqpide_status eqpide_ode_node(const eqpide_ode* ode, size_t k, double* t, eqpide_functions* out) {
    if (!ode || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    if (k >= ode->sol.size()) return fail(EQPIDE_ERR_DOMAIN, "node index out of range");
    const auto& s = ode->sol;
    if (t) *t = s.grid[k];
    *out = to_c(s.N1[k], s.N2[k], s.M1[k], s.M2[k], s.M3[k], s.alpha[k]);
    return EQPIDE_OK;
}

eqpide_status eqpide_mc_theta(const eqpide_market* market, const eqpide_closed_form* cf, double s, double x,
                              double z, const eqpide_mc_config* mc, eqpide_estimate* out) {
    if (!market || !cf || !mc || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto e = eqpide::estimate_theta(market->params, cf->sol.strategy(), s, x, z, to_sim(mc));
        *out = {e.mean, e.std_error, e.n_effective};
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_mc_g(const eqpide_market* market, const eqpide_closed_form* cf, double s, double x, double z,
                          const eqpide_mc_config* mc, eqpide_estimate* out) {
    if (!market || !cf || !mc || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto e = eqpide::estimate_g(market->params, cf->sol.strategy(), s, x, z, to_sim(mc));
        *out = {e.mean, e.std_error, e.n_effective};
        return EQPIDE_OK;
    });
}

eqpide_status eqpide_mc_cost(const eqpide_market* market, const eqpide_closed_form* cf, double t, double y,
                             const eqpide_mc_config* mc, eqpide_estimate* out) {
    if (!market || !cf || !mc || !out) return fail(EQPIDE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto e = eqpide::evaluate_cost(market->params, cf->sol.strategy(), t, y, to_sim(mc));
        *out = {e.mean, e.std_error, e.n_effective};
        return EQPIDE_OK;
    });
}

}  // extern "C"
