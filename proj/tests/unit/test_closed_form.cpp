#include "support.hpp"

#include "eqpide/closed_form.hpp"

#include <doctest.h>

using namespace eqpide;
using namespace eqpide::testing;

TEST_SUITE("closed_form") {

TEST_CASE("no-jump market matches the reference values") {
    const MarketParams e = e0();
    const auto sol = solve_closed_form(e, 10000);
    const auto v = evaluate(sol, 0.0);
    CHECK(rel_err(v.N1, ref_e0::N1) < 1e-12);
    CHECK(rel_err(v.N2, ref_e0::N2) < 1e-10);
    CHECK(rel_err(v.M1, ref_e0::M1) < 1e-12);
    CHECK(rel_err(v.M2, ref_e0::M2) < 1e-10);
    CHECK(rel_err(v.M3, ref_e0::M3) < 1e-10);
    CHECK(rel_err(v.alpha_star, ref_e0::alpha0) < 1e-10);
    // e^{r0} and e^{r0} kappa rho (1 - e^{-r0}) / r0
    CHECK(rel_err(v.N1, std::exp(0.02)) < 1e-13);
    CHECK(rel_err(v.N2, std::exp(0.02) * 0.04 * (1.0 - std::exp(-0.02)) / 0.02) < 1e-10);
    CHECK(rel_err(equilibrium_objective(sol, e, 0.0, 1.0), ref_e0::J01) < 1e-10);
}

TEST_CASE("coefficient at later times") {
    const MarketParams e0m = e0(), e1m = e1();
    const auto s0 = solve_closed_form(e0m, 10000);
    const auto s1 = solve_closed_form(e1m, 10000);
    const double ts[] = {0.0, 0.25, 0.5, 0.75};
    for (int i = 0; i < 4; ++i) {
        CHECK(rel_err(equilibrium_coefficient(s0, e0m, ts[i]), ref_e0::alpha[i]) < 1e-10);
        CHECK(rel_err(equilibrium_coefficient(s1, e1m, ts[i]), ref_e1::alpha[i]) < 1e-10);
    }
}

TEST_CASE("jump market matches the reference values") {
    const MarketParams e = e1();
    const auto v = evaluate(solve_closed_form(e, 10000), 0.0);
    CHECK(rel_err(v.N2, ref_e1::N2) < 1e-10);
    CHECK(rel_err(v.M2, ref_e1::M2) < 1e-10);
    CHECK(rel_err(v.M3, ref_e1::M3) < 1e-10);
    CHECK(rel_err(0.5 * v.M1 + 0.5 * v.M2 + v.M3, ref_e1::theta011) < 1e-10);
    CHECK(rel_err(v.N1 + v.N2, ref_e1::g011) < 1e-10);
}

TEST_CASE("both coefficient formulas agree") {
    for (const MarketParams& e : {e0(), e1()}) {
        const auto sol = solve_closed_form(e, 10000);
        for (double s : {0.0, 0.1, 0.37, 0.9, 1.0})
            CHECK(rel_err(equilibrium_coefficient(sol, e, s), equilibrium_coefficient_reduced(sol, e, s)) < 1e-12);
    }
}

TEST_CASE("identities M1 = N1^2 and M3 = N1 N2") {
    for (const MarketParams& e : {e0(), e1()}) {
        const auto dev = check_identities(solve_closed_form(e, 10000));
        CHECK(dev.m1_vs_n1sq <= 1e-8);
        CHECK(dev.m3_vs_n1n2 <= 1e-8);
    }
}

TEST_CASE("terminal values") {
    const auto v = evaluate(solve_closed_form(e1(), 1000), 1.0);
    CHECK(v.N1 == doctest::Approx(1.0));
    CHECK(v.M1 == doctest::Approx(1.0));
    CHECK(v.N2 == doctest::Approx(0.0));
    CHECK(v.M2 == doctest::Approx(0.0));
    CHECK(v.M3 == doctest::Approx(0.0));
    CHECK(v.alpha_star == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("classical no-jump form agrees with the tabulated solution") {
    const MarketParams e = e0();
    const auto sol = no_jump_reduction(e, 10000);
    for (double s : {0.0, 0.33, 0.8})
        CHECK(rel_err(no_jump_reference_coefficient(e, s), equilibrium_coefficient(sol, e, s)) < 1e-10);
    CHECK_THROWS_AS(no_jump_reduction(e1(), 100), std::invalid_argument);
}

TEST_CASE("mu = 0 gives no risky investment") {
    const MarketParams e = e0().with_mu(0.0);
    const auto v = evaluate(solve_closed_form(e, 1000), 0.0);
    CHECK(v.alpha_star == 0.0);
    CHECK(v.N2 == 0.0);
    CHECK(v.M2 == 0.0);
}

TEST_CASE("objective scales with wealth squared") {
    const MarketParams e = e1();
    const auto sol = solve_closed_form(e, 2000);
    const double j1 = equilibrium_objective(sol, e, 0.2, 1.0);
    CHECK(equilibrium_objective(sol, e, 0.2, 3.0) == doctest::Approx(9.0 * j1).epsilon(1e-13));
}

}
