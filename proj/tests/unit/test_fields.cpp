#include "support.hpp"

#include "eqpide/closed_form.hpp"
#include "eqpide/fields.hpp"
#include "eqpide/pide_solver.hpp"

#include <doctest.h>

using namespace eqpide;
using namespace eqpide::testing;

TEST_SUITE("fields") {

TEST_CASE("ansatz derivatives") {
    const auto cf = solve_closed_form(e1(), 2000);
    const AnsatzFields f(cf);
    const double s = 0.3, x = 0.7, z = -1.1;
    const auto v = evaluate(cf, s);
    const FieldSample smp = f.sample(s, x, z);
    CHECK(smp.theta == doctest::Approx(0.5 * v.M1 * x * x + 0.5 * v.M2 * z * z + v.M3 * x * z));
    CHECK(smp.theta_x == doctest::Approx(v.M1 * x + v.M3 * z));
    CHECK(smp.theta_z == doctest::Approx(v.M2 * z + v.M3 * x));
    CHECK(smp.theta_xx == doctest::Approx(v.M1));
    CHECK(smp.theta_zz == doctest::Approx(v.M2));
    CHECK(smp.theta_xz == doctest::Approx(v.M3));
    CHECK(smp.theta_xxx == 0.0);
    CHECK(smp.g == doctest::Approx(v.N1 * x + v.N2 * z));
    CHECK(smp.g_x == doctest::Approx(v.N1));
    CHECK(smp.g_z == doctest::Approx(v.N2));
    CHECK(smp.g_xx == 0.0);
    CHECK(f.theta(s, x, z) == doctest::Approx(smp.theta));
    CHECK_THROWS_AS(f.check_domain(1.5, 0.0, 0.0), std::domain_error);
}

TEST_CASE("grid fields match the ansatz off the nodes") {
    const MarketParams e = e0();
    const auto cf = solve_closed_form(e, 2000);
    const StateGrid2D grid(-2.0, 2.0, 41, 50, 1.0);
    const auto sol = policy_evaluation(e, cf.strategy(), grid);
    const GridFields gf(sol);
    const AnsatzFields af(cf);
    for (double s : {0.0, 0.013, 0.5}) {
        const double x = 0.33, z = -0.21;
        const FieldSample a = af.sample(s, x, z), b = gf.sample(s, x, z);
        CHECK(b.theta == doctest::Approx(a.theta).epsilon(1e-3));
        CHECK(b.g == doctest::Approx(a.g).epsilon(1e-3));
        CHECK(b.theta_x == doctest::Approx(a.theta_x).epsilon(1e-3));
        CHECK(b.theta_xx == doctest::Approx(a.theta_xx).epsilon(1e-3));
        CHECK(b.theta_xz == doctest::Approx(a.theta_xz).epsilon(1e-2));
        CHECK(b.g_x == doctest::Approx(a.g_x).epsilon(1e-3));
        CHECK(std::abs(b.theta_xxx) < 1e-3);
        CHECK(std::abs(b.g_xx) < 1e-3);
    }
    CHECK_NOTHROW(gf.check_domain(0.5, 2.0, -2.0));
    CHECK_THROWS_AS(gf.check_domain(0.5, 2.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(gf.check_domain(-0.1, 0.0, 0.0), std::domain_error);
}

}
