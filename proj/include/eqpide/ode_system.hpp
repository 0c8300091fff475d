#pragma once

// Backward RK4 integration of the coupled five-function ODE system with the
// unreduced equilibrium coefficient recomputed at every stage.

#include "eqpide/core_model.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace eqpide {

/// Stage denominator (M1 + M3) * total variance fell below the guard.
class SingularityError : public std::runtime_error {
public:
    SingularityError(double s, double denominator);
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// State ordering used by the integrator.
struct OdeState {
    double N1, N2, M1, M2, M3;
};

struct OdeSolution {
    std::vector<double> grid;
    std::vector<double> N1, N2, M1, M2, M3;
    std::vector<double> alpha;

    std::size_t size() const noexcept { return grid.size(); }
    OdeState state(std::size_t k) const { return {N1[k], N2[k], M1[k], M2[k], M3[k]}; }
    LinearStrategy strategy(double horizon) const { return {CoefficientFn(alpha, horizon)}; }
};

inline constexpr double kOdeSingularityGuard = 1e-12;

/// alpha = -(M1 + M3 - N1 mu - N1^2 - N1 N2) / ((M1 + M3) total_var) * rho.
double unreduced_alpha(const MarketParams& params, double s, const OdeState& y);

/// Right-hand side d/ds of the state at time s.
OdeState ode_rhs(const MarketParams& params, double s, const OdeState& y);

OdeSolution integrate_backward(const MarketParams& params, std::size_t n_steps);

/// RK4 forward from `start` at s = 0 to T with the same step count; used to
/// check the backward solve retraces to the terminal block.
OdeState integrate_forward(const MarketParams& params, const OdeState& start, std::size_t n_steps);

IdentityDeviation check_identities(const OdeSolution& sol);

}  // namespace eqpide
