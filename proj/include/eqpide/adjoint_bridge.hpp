#pragma once

// First- and second-order adjoint processes of the maximum principle,
// evaluated along simulated equilibrium paths from the derivatives of theta
// and g, and the simulation checks of their BSDEs and of the H-bar
// minimisation at the start point.

#include "eqpide/core_model.hpp"
#include "eqpide/monte_carlo.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace eqpide {

class FieldSource;

/// Path-major matrices on the bundle's time grid; r and Upsilon carry an
/// extra trailing atom index.
struct AdjointProcesses {
    double t = 0.0;
    double y = 0.0;
    /// E_t[X(T)] used in the terminal-value derivative.
    double expected_terminal = 0.0;
    /// G_xbar = -(E_t[X(T)] + mu y).
    double g_bar = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    std::size_t n_atoms = 0;
    std::vector<double> times;
    std::vector<double> p, q, P, Phi;
    std::vector<double> r, Upsilon;

    std::size_t at(std::size_t path, std::size_t k) const noexcept { return path * n_times + k; }
    std::size_t at(std::size_t path, std::size_t k, std::size_t atom) const noexcept {
        return (path * n_times + k) * n_atoms + atom;
    }
};

/// Builds (p, q, r, P, Phi, Upsilon) along the twin of a paired bundle
/// simulated under `strategy` from the diagonal start (t, y, y).
AdjointProcesses build_adjoints(const MarketParams& params, const FieldSource& fields, const LinearStrategy& strategy,
                                const PathBundle& bundle, double t, double expected_terminal);

struct BsdeResidual {
    std::string identity;
    double start = 0.0;
    double end = 0.0;
    McEstimate residual;
    /// Allowance for the O(dt) weak error of the Euler grid.
    double bias_budget = 0.0;
    bool pass = false;
};

/// Martingale and covariation identities of both adjoint equations over
/// `n_intervals` equal checkpoint intervals. A residual passes when
/// |mean| <= k_se * SE + bias_budget.
std::vector<BsdeResidual> bsde_residual(const MarketParams& params, const AdjointProcesses& adj,
                                        const PathBundle& bundle, std::size_t n_intervals = 4, double k_se = 3.0);

struct HbarReport {
    std::vector<double> u_grid;
    std::vector<double> values;
    double argmin = 0.0;
    double target = 0.0;  // alpha(t) * y
    double cell = 0.0;
    bool pass = false;
};

/// H-bar(t, t, y, u) over u_grid with the adjoints at the start point.
HbarReport hbar_min_check(const MarketParams& params, const AdjointProcesses& adj, const LinearStrategy& strategy,
                          const std::vector<double>& u_grid);

/// 401-point grid on [-2, 2] (spacing 0.01) by default.
std::vector<double> default_u_grid(double lower = -2.0, double upper = 2.0, std::size_t n = 401);

}  // namespace eqpide
