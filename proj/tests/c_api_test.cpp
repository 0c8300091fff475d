// Exercises the shared library through its C header only.
#include "eqpide/eqpide.h"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

namespace {

const char* kE1 = R"([market]
horizon = 1
r0 = 0.02
r = 0.06
sigma = 0.2
mu = 1
x0 = 1
[jumps]
crash = 1, 2, -0.1
)";

}  // namespace

TEST_CASE("round trip through the C interface") {
    eqpide_config* cfg = nullptr;
    REQUIRE(eqpide_config_parse(kE1, &cfg) == EQPIDE_OK);
    char hash[17];
    CHECK(eqpide_config_hash(cfg, hash, sizeof hash) == EQPIDE_OK);
    CHECK(std::strlen(hash) == 16);
    char small[4];
    CHECK(eqpide_config_hash(cfg, small, sizeof small) == EQPIDE_ERR_INVALID_ARGUMENT);

    eqpide_market* m = nullptr;
    REQUIRE(eqpide_market_create(cfg, &m) == EQPIDE_OK);
    double kappa = 0.0;
    CHECK(eqpide_market_kappa(m, 0.5, &kappa) == EQPIDE_OK);
    CHECK(kappa == doctest::Approx(2.0 / 3.0));
    CHECK(eqpide_market_kappa(m, 2.0, &kappa) == EQPIDE_ERR_DOMAIN);

    eqpide_closed_form* cf = nullptr;
    REQUIRE(eqpide_closed_form_solve(m, 10000, &cf) == EQPIDE_OK);
    eqpide_functions f{};
    CHECK(eqpide_closed_form_eval(cf, 0.0, &f) == EQPIDE_OK);
    CHECK(f.alpha == doctest::Approx(0.6366569134904535).epsilon(1e-10));
    CHECK(eqpide_closed_form_eval(cf, -1.0, &f) == EQPIDE_ERR_DOMAIN);
    CHECK(std::string(eqpide_last_error()).find("outside") != std::string::npos);
    double J = 0.0;
    CHECK(eqpide_closed_form_objective(cf, m, 0.0, 1.0, &J) == EQPIDE_OK);
    CHECK(J == doctest::Approx(-1.03299314515084).epsilon(1e-10));

    eqpide_ode* ode = nullptr;
    REQUIRE(eqpide_ode_solve(m, 1000, &ode) == EQPIDE_OK);
    CHECK(eqpide_ode_size(ode) == 1001);
    double t = -1.0;
    eqpide_functions g{};
    CHECK(eqpide_ode_node(ode, 0, &t, &g) == EQPIDE_OK);
    CHECK(t == 0.0);
    CHECK(g.N1 == doctest::Approx(f.N1).epsilon(1e-10));
    CHECK(eqpide_ode_node(ode, 5000, &t, &g) == EQPIDE_ERR_DOMAIN);

    const eqpide_mc_config mc{20000, 100, 3, 1};
    eqpide_estimate est{};
    CHECK(eqpide_mc_g(m, cf, 0.0, 1.0, 1.0, &mc, &est) == EQPIDE_OK);
    CHECK(std::abs(est.mean - (f.N1 + f.N2)) < 4.0 * est.std_error);
    CHECK(est.n_effective == 10000);
    const eqpide_mc_config odd{11, 10, 1, 1};
    CHECK(eqpide_mc_theta(m, cf, 0.0, 1.0, 1.0, &odd, &est) == EQPIDE_ERR_INVALID_ARGUMENT);

    eqpide_ode_free(ode);
    eqpide_closed_form_free(cf);
    eqpide_market_free(m);
    eqpide_config_free(cfg);
}

TEST_CASE("configuration errors") {
    eqpide_config* cfg = nullptr;
    CHECK(eqpide_config_parse("[market]\nr0 = 0.02\n", &cfg) == EQPIDE_ERR_CONFIG);
    CHECK(cfg == nullptr);
    CHECK(std::string(eqpide_last_error()).find("horizon") != std::string::npos);
    CHECK(eqpide_config_load("/nonexistent/x.ini", &cfg) == EQPIDE_ERR_CONFIG);
    CHECK(eqpide_config_parse(nullptr, &cfg) == EQPIDE_ERR_INVALID_ARGUMENT);

    REQUIRE(eqpide_config_parse(kE1, &cfg) == EQPIDE_OK);
    char before[17], after[17];
    eqpide_config_hash(cfg, before, sizeof before);
    CHECK(eqpide_config_set(cfg, "grid.nx=zzz") == EQPIDE_ERR_CONFIG);
    eqpide_config_hash(cfg, after, sizeof after);
    CHECK(std::string(before) == after);
    CHECK(eqpide_config_set(cfg, "mc.seed=4") == EQPIDE_OK);
    eqpide_config_hash(cfg, after, sizeof after);
    CHECK(std::string(before) != after);
    eqpide_config_free(cfg);
}

TEST_CASE("degenerate market is a solver error") {
    eqpide_config* cfg = nullptr;
    REQUIRE(eqpide_config_parse("[market]\nhorizon = 1\nr0 = 0.02\nr = 0.06\nsigma = 0\nmu = 1\nx0 = 1\n", &cfg) ==
            EQPIDE_OK);
    eqpide_market* m = nullptr;
    CHECK(eqpide_market_create(cfg, &m) == EQPIDE_ERR_SOLVER);
    CHECK(std::string(eqpide_last_error()).find("ellipticity") != std::string::npos);
    CHECK(eqpide_cmd_solve(cfg, "/tmp/eqpide_c_api_singular") == EQPIDE_ERR_SOLVER);
    eqpide_config_free(cfg);
}

TEST_CASE("version and null handles") {
    CHECK(std::string(eqpide_version()).size() > 0);
    CHECK(eqpide_ode_size(nullptr) == 0);
    CHECK(eqpide_cmd_verify(nullptr, nullptr) == EQPIDE_ERR_INVALID_ARGUMENT);
    eqpide_config_free(nullptr);
}
