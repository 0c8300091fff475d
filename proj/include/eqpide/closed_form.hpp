#pragma once

// Explicit mean-variance equilibrium: N1, N2, M1, M2, M3, the equilibrium
// coefficient and the equilibrium objective, tabulated by nested composite
// Simpson quadrature.

#include "eqpide/core_model.hpp"

#include <cstddef>

namespace eqpide {

struct ClosedFormSolution {
    CoefficientFn N1, N2, M1, M2, M3;
    /// L(s) = e^{-int_s^T r0} (1 + mu int_s^T e^{-int_tau^T r0} kappa rho dtau)^{-1}
    CoefficientFn L;
    /// Equilibrium coefficient via the explicit quadrature formula.
    CoefficientFn alpha_star;

    std::size_t nodes() const noexcept { return N1.size(); }
    LinearStrategy strategy() const { return {alpha_star}; }
};

/// Pointwise values at one time.
struct ClosedFormValues {
    double N1, N2, M1, M2, M3, alpha_star, L;
};

ClosedFormSolution solve_closed_form(const MarketParams& params, std::size_t quad_steps);

/// Same as solve_closed_form but requires a market without jump atoms.
ClosedFormSolution no_jump_reduction(const MarketParams& params, std::size_t quad_steps);

ClosedFormValues evaluate(const ClosedFormSolution& sol, double s);

/// alpha*(s) from the tabulated quadrature formula.
double equilibrium_coefficient(const ClosedFormSolution& sol, const MarketParams& params, double s);

/// The same coefficient through mu (N1 + N2)^{-1} kappa.
double equilibrium_coefficient_reduced(const ClosedFormSolution& sol, const MarketParams& params, double s);

/// J(t, w) = (M2 - N2^2 - 2 mu (N1 + N2)) w^2 / 2.
double equilibrium_objective(const ClosedFormSolution& sol, const MarketParams& params, double t, double wealth);

/// Coefficient of the jump-free economy in its classical form
/// mu e^{-int_s^T r0} (1 + mu int_s^T e^{-int_tau^T r0} rho^2/sigma^2 dtau)^{-1} rho/sigma^2,
/// by direct nested Simpson quadrature with 2 * n_panels subintervals,
/// independent of the tabulated solution.
double no_jump_reference_coefficient(const MarketParams& params, double s, std::size_t n_panels = 200);

/// Max over the tabulation nodes of |M1 - N1^2| and |M3 - N1 N2|.
IdentityDeviation check_identities(const ClosedFormSolution& sol);

}  // namespace eqpide
