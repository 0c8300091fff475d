#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace eqpide;
using namespace eqpide::testing;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("core_model") {

TEST_CASE("valid constant market has no violations") {
    CHECK(validate(e0_spec()).empty());
    CHECK(validate(e1_spec()).empty());
}

TEST_CASE("validate lists every violation") {
    MarketSpec s = e0_spec();
    s.r = CoefficientFn::constant(0.01, 1.0);
    s.sigma = CoefficientFn::constant(0.0, 1.0);
    const auto v = validate(s);
    CHECK(v.size() == 2);
    CHECK(mentions(v, "r(s) > r0(s)"));
    CHECK(mentions(v, "ellipticity"));
    CHECK_THROWS_AS(MarketParams{s}, InvalidMarket);
}

TEST_CASE("jumps below -1 break limited liability") {
    MarketSpec s = e0_spec();
    s.jumps.push_back({1.0, 1.0, CoefficientFn::constant(-1.5, 1.0)});
    CHECK(mentions(validate(s), "limited liability"));
}

TEST_CASE("zero volatility without jumps breaks ellipticity") {
    MarketSpec s = e0_spec();
    s.sigma = CoefficientFn::constant(0.0, 1.0);
    CHECK(mentions(validate(s), "ellipticity"));
    s.jumps.push_back({1.0, 2.0, CoefficientFn::constant(-0.1, 1.0)});
    CHECK(validate(s).empty());
}

TEST_CASE("negative mu is rejected") {
    MarketSpec s = e0_spec();
    s.mu = -0.5;
    CHECK(mentions(validate(s), "mu"));
}

TEST_CASE("derived quantities") {
    const MarketParams e = e1();
    CHECK(e.excess_return(0.3) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(e.jump_variance(0.3) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(e.total_variance(0.3) == doctest::Approx(0.06).epsilon(1e-14));
    CHECK(e.kappa(0.3) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(e0().kappa(0.7) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("time outside the horizon is a domain error") {
    const MarketParams e = e0();
    CHECK_NOTHROW(e.check_time(0.0));
    CHECK_NOTHROW(e.check_time(1.0));
    CHECK_THROWS_AS(e.check_time(1.01), std::domain_error);
    CHECK_THROWS_AS(e.check_time(-0.01), std::domain_error);
}

TEST_CASE("tabulated coefficient interpolates linearly and clamps") {
    const CoefficientFn f({0.0, 1.0, 4.0}, 2.0);
    CHECK(f(0.5) == doctest::Approx(0.5));
    CHECK(f(1.5) == doctest::Approx(2.5));
    CHECK(f(-1.0) == 0.0);
    CHECK(f(3.0) == 4.0);
    CHECK(f.scaled(2.0)(1.5) == doctest::Approx(5.0));
    CHECK_THROWS_AS(CoefficientFn({1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("with_mu keeps the rest of the market") {
    const MarketParams e = e1().with_mu(0.0);
    CHECK(e.mu() == 0.0);
    CHECK(e.jumps().size() == 1);
}

TEST_CASE("uniform grid endpoints are exact") {
    const auto g = uniform_grid(0.0, 1.0, 3);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[1] == doctest::Approx(1.0 / 3.0));
}

}
