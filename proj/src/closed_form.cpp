#include "eqpide/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace eqpide {

namespace {

// Tail integrals C[i] = int_{g_i}^T f on the half-panel grid g_i = i * hh,
// i = 0..2m. Panel nodes (even i) use Simpson over the panel; midpoints add a
// fourth-order cubic rule on the remaining half panel.
std::vector<double> tail_integrals(const std::vector<double>& f, double hh) {
    const std::size_t n = f.size();  // 2m + 1
    std::vector<double> c(n, 0.0);
    for (std::size_t i = n - 1; i >= 2; i -= 2) {
        c[i - 2] = c[i] + (2.0 * hh) / 6.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        const std::size_t mid = i - 1;
        double half;
        if (mid + 2 < n)
            half = hh / 24.0 * (-f[mid - 1] + 13.0 * f[mid] + 13.0 * f[mid + 1] - f[mid + 2]);
        else
            half = hh / 24.0 * (f[mid - 2] - 5.0 * f[mid - 1] + 19.0 * f[mid] + 9.0 * f[mid + 1]);
        c[mid] = c[i] + half;
        if (i == 2) break;
    }
    return c;
}

std::vector<double> even_entries(const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(v.size() / 2 + 1);
    for (std::size_t i = 0; i < v.size(); i += 2) out.push_back(v[i]);
    return out;
}

}  // namespace

ClosedFormSolution solve_closed_form(const MarketParams& params, std::size_t quad_steps) {
    if (quad_steps < 2) throw std::invalid_argument("solve_closed_form: quad_steps must be >= 2");
    const double T = params.horizon();
    const double mu = params.mu();
    const std::size_t n = 2 * quad_steps + 1;
    const double hh = T / static_cast<double>(2 * quad_steps);

    std::vector<double> s(n), r0(n), kr(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::min(T, hh * static_cast<double>(i));
        r0[i] = params.r0(s[i]);
        kr[i] = params.kappa(s[i]) * params.excess_return(s[i]);
    }

    // R(tau) = int_tau^T r0
    const auto R = tail_integrals(r0, hh);
    // I(tau) = int_tau^T e^{-R} kappa rho
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::exp(-R[i]) * kr[i];
    const auto I = tail_integrals(a, hh);

    std::vector<double> N1(n), N2(n), M1(n), M3(n), L(n), alpha(n), chi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(R[i]);
        N1[i] = e;
        N2[i] = mu * e * I[i];
        M1[i] = e * e;
        M3[i] = mu * e * e * I[i];
        L[i] = 1.0 / (e * (1.0 + mu * I[i]));
        alpha[i] = mu * L[i] * params.kappa(s[i]);
        const double S = N1[i] + N2[i];
        const double ratio = (S + mu) / S;
        chi[i] = 2.0 * r0[i] + ratio * ratio * kr[i] - kr[i];
    }

    // M2(s) = mu e^{K(s)} int_s^T e^{-K(tau)} kappa rho B(tau) dtau, K = int chi
    const auto K = tail_integrals(chi, hh);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double S = N1[i] + N2[i];
        const double bracket = 2.0 * N1[i] * N2[i] / S + (N1[i] * N1[i] + 2.0 * N1[i] * N2[i]) / (S * S) * mu;
        b[i] = std::exp(-K[i]) * kr[i] * bracket;
    }
    const auto Q = tail_integrals(b, hh);
    std::vector<double> M2(n);
    for (std::size_t i = 0; i < n; ++i) M2[i] = mu * std::exp(K[i]) * Q[i];

    auto tab = [&](const std::vector<double>& v) { return CoefficientFn(even_entries(v), T); };
    return ClosedFormSolution{tab(N1), tab(N2), tab(M1), tab(M2), tab(M3), tab(L), tab(alpha)};
}

ClosedFormSolution no_jump_reduction(const MarketParams& params, std::size_t quad_steps) {
    if (!params.jumps().empty())
        throw std::invalid_argument("no_jump_reduction: market has " + std::to_string(params.jumps().size()) +
                                    " jump atom(s)");
    return solve_closed_form(params, quad_steps);
}

namespace {

template <class F>
double simpson(F&& f, double a, double b, std::size_t panels) {
    if (b <= a) return 0.0;
    const std::size_t n = 2 * panels;
    const double h = (b - a) / static_cast<double>(n);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return acc * h / 3.0;
}

}  // namespace

double no_jump_reference_coefficient(const MarketParams& params, double s, std::size_t n_panels) {
    params.check_time(s);
    if (!params.jumps().empty()) throw std::invalid_argument("reference coefficient needs a market without jumps");
    const double T = params.horizon();
    auto r0 = [&](double tau) { return params.r0(tau); };
    auto discount = [&](double tau) { return std::exp(-simpson(r0, tau, T, n_panels)); };
    auto ratio = [&](double tau) {
        const double sig = params.sigma(tau);
        const double rho = params.excess_return(tau);
        return rho * rho / (sig * sig);
    };
    const double inner = simpson([&](double tau) { return discount(tau) * ratio(tau); }, s, T, n_panels);
    const double sig = params.sigma(s);
    return params.mu() * discount(s) / (1.0 + params.mu() * inner) * params.excess_return(s) / (sig * sig);
}

ClosedFormValues evaluate(const ClosedFormSolution& sol, double s) {
    return {sol.N1(s), sol.N2(s), sol.M1(s), sol.M2(s), sol.M3(s), sol.alpha_star(s), sol.L(s)};
}

double equilibrium_coefficient(const ClosedFormSolution& sol, const MarketParams& params, double s) {
    params.check_time(s);
    return sol.alpha_star(s);
}

double equilibrium_coefficient_reduced(const ClosedFormSolution& sol, const MarketParams& params, double s) {
    params.check_time(s);
    return params.mu() * params.kappa(s) / (sol.N1(s) + sol.N2(s));
}

double equilibrium_objective(const ClosedFormSolution& sol, const MarketParams& params, double t, double wealth) {
    params.check_time(t);
    const double n1 = sol.N1(t), n2 = sol.N2(t), m2 = sol.M2(t);
    return (m2 - n2 * n2 - 2.0 * params.mu() * (n2 + n1)) * wealth * wealth / 2.0;
}

IdentityDeviation check_identities(const ClosedFormSolution& sol) {
    IdentityDeviation d;
    const auto n1 = sol.N1.samples(), n2 = sol.N2.samples(), m1 = sol.M1.samples(), m3 = sol.M3.samples();
    for (std::size_t k = 0; k < n1.size(); ++k) {
        d.m1_vs_n1sq = std::max(d.m1_vs_n1sq, std::abs(m1[k] - n1[k] * n1[k]));
        d.m3_vs_n1n2 = std::max(d.m3_vs_n1n2, std::abs(m3[k] - n1[k] * n2[k]));
    }
    return d;
}

}  // namespace eqpide
