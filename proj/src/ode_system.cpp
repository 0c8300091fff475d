#include "eqpide/ode_system.hpp"

#include "eqpide/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eqpide {

namespace {

OdeState axpy(const OdeState& y, double h, const OdeState& k) {
    return {y.N1 + h * k.N1, y.N2 + h * k.N2, y.M1 + h * k.M1, y.M2 + h * k.M2, y.M3 + h * k.M3};
}

OdeState rk4_step(const MarketParams& params, double s, const OdeState& y, double h) {
    const OdeState k1 = ode_rhs(params, s, y);
    const OdeState k2 = ode_rhs(params, s + h / 2, axpy(y, h / 2, k1));
    const OdeState k3 = ode_rhs(params, s + h / 2, axpy(y, h / 2, k2));
    const OdeState k4 = ode_rhs(params, s + h, axpy(y, h, k3));
    auto comb = [h](double y0, double a, double b, double c, double d) { return y0 + h / 6.0 * (a + 2 * b + 2 * c + d); };
    return {comb(y.N1, k1.N1, k2.N1, k3.N1, k4.N1), comb(y.N2, k1.N2, k2.N2, k3.N2, k4.N2),
            comb(y.M1, k1.M1, k2.M1, k3.M1, k4.M1), comb(y.M2, k1.M2, k2.M2, k3.M2, k4.M2),
            comb(y.M3, k1.M3, k2.M3, k3.M3, k4.M3)};
}

std::string singular_message(double s, double d) {
    return "ODE singularity at s=" + std::to_string(s) + ": (M1+M3)*total_variance = " + std::to_string(d);
}

}  // namespace

SingularityError::SingularityError(double s, double denominator)
    : std::runtime_error(singular_message(s, denominator)), time_(s) {}

double unreduced_alpha(const MarketParams& params, double s, const OdeState& y) {
    const double tv = params.total_variance(s);
    const double den = (y.M1 + y.M3) * tv;
    if (!(std::abs(den) >= kOdeSingularityGuard)) throw SingularityError(s, den);
    const double num = y.M1 + y.M3 - y.N1 * params.mu() - y.N1 * y.N1 - y.N1 * y.N2;
    return -num / den * params.excess_return(s);
}

OdeState ode_rhs(const MarketParams& params, double s, const OdeState& y) {
    const double a = unreduced_alpha(params, s, y);
    const double r0 = params.r0(s);
    const double rho = params.excess_return(s);
    const double tv = params.total_variance(s);
    OdeState d;
    d.M1 = -2.0 * r0 * y.M1;
    d.M2 = -2.0 * r0 * y.M2 - 2.0 * (y.M2 + y.M3) * a * rho - (y.M1 + y.M2 + 2.0 * y.M3) * a * a * tv;
    d.M3 = -2.0 * r0 * y.M3 - (y.M3 + y.M1) * a * rho;
    d.N1 = -r0 * y.N1;
    d.N2 = -r0 * y.N2 - (y.N1 + y.N2) * a * rho;
    return d;
}

OdeSolution integrate_backward(const MarketParams& params, std::size_t n_steps) {
    if (n_steps < 10) throw std::invalid_argument("integrate_backward: n_steps must be >= 10");
    const double T = params.horizon();
    OdeSolution sol;
    sol.grid = uniform_grid(0.0, T, n_steps);
    const std::size_t n = n_steps + 1;
    sol.N1.resize(n);
    sol.N2.resize(n);
    sol.M1.resize(n);
    sol.M2.resize(n);
    sol.M3.resize(n);
    sol.alpha.resize(n);

    OdeState y{1.0, 0.0, 1.0, 0.0, 0.0};
    const double h = T / static_cast<double>(n_steps);
    auto store = [&](std::size_t k) {
        sol.N1[k] = y.N1;
        sol.N2[k] = y.N2;
        sol.M1[k] = y.M1;
        sol.M2[k] = y.M2;
        sol.M3[k] = y.M3;
        sol.alpha[k] = unreduced_alpha(params, sol.grid[k], y);
    };
    store(n_steps);
    for (std::size_t k = n_steps; k-- > 0;) {
        y = rk4_step(params, sol.grid[k + 1], y, -h);
        store(k);
    }
    return sol;
}

OdeState integrate_forward(const MarketParams& params, const OdeState& start, std::size_t n_steps) {
    const double T = params.horizon();
    const auto grid = uniform_grid(0.0, T, n_steps);
    const double h = T / static_cast<double>(n_steps);
    OdeState y = start;
    for (std::size_t k = 0; k < n_steps; ++k) y = rk4_step(params, grid[k], y, h);
    return y;
}

IdentityDeviation check_identities(const OdeSolution& sol) {
    IdentityDeviation d;
    for (std::size_t k = 0; k < sol.size(); ++k) {
        d.m1_vs_n1sq = std::max(d.m1_vs_n1sq, std::abs(sol.M1[k] - sol.N1[k] * sol.N1[k]));
        d.m3_vs_n1n2 = std::max(d.m3_vs_n1n2, std::abs(sol.M3[k] - sol.N1[k] * sol.N2[k]));
    }
    return d;
}

}  // namespace eqpide
