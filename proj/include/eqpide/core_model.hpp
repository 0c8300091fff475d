#pragma once

// Market primitives for the jump-diffusion mean-variance economy: tabulated
// deterministic coefficients, a finite-atom jump measure and the validated
// parameter bundle every solver consumes.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqpide {

/// Raised when a market fails its standing assumptions. Carries the full
/// violation list produced by validate().
class InvalidMarket : public std::invalid_argument {
public:
    explicit InvalidMarket(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Real function of time sampled on a uniform grid over [0, T] with
/// piecewise-linear interpolation. Evaluation outside [0, T] clamps to the
/// endpoint values.
class CoefficientFn {
public:
    CoefficientFn() = default;
    CoefficientFn(std::vector<double> samples, double horizon);

    static CoefficientFn constant(double value, double horizon);

    double operator()(double s) const noexcept;

    double horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double spacing() const noexcept { return horizon_ / static_cast<double>(samples_.size() - 1); }
    double node(std::size_t k) const noexcept { return spacing() * static_cast<double>(k); }
    std::span<const double> samples() const noexcept { return samples_; }

    /// Same samples multiplied by a constant.
    CoefficientFn scaled(double factor) const;

private:
    std::vector<double> samples_;
    double horizon_ = 0.0;
};

/// One atom (e_i, nu_i) of the Levy measure with its jump coefficient phi(s, e_i).
struct JumpAtom {
    double size = 0.0;
    double intensity = 0.0;
    CoefficientFn coefficient;
};

/// Raw market description, not yet checked.
struct MarketSpec {
    CoefficientFn r0;
    CoefficientFn r;
    CoefficientFn sigma;
    std::vector<JumpAtom> jumps;
    double horizon = 1.0;
    double mu = 1.0;
    double x0 = 1.0;
    double ellipticity_eps = 1e-10;
};

/// Lists every violated standing assumption; empty means the spec is usable.
std::vector<std::string> validate(const MarketSpec& spec);

/// Validated, immutable market. Construction throws InvalidMarket when
/// validate() reports anything.
class MarketParams {
public:
    explicit MarketParams(MarketSpec spec);

    double horizon() const noexcept { return spec_.horizon; }
    double mu() const noexcept { return spec_.mu; }
    double x0() const noexcept { return spec_.x0; }
    const std::vector<JumpAtom>& jumps() const noexcept { return spec_.jumps; }
    const MarketSpec& spec() const noexcept { return spec_; }

    double r0(double s) const;
    double sigma(double s) const;
    double jump_coefficient(std::size_t atom, double s) const;

    /// rho(s) = r(s) - r0(s).
    double excess_return(double s) const;
    /// sum_i phi(s, e_i)^2 nu_i.
    double jump_variance(double s) const;
    /// sigma(s)^2 + sum_i phi(s, e_i)^2 nu_i.
    double total_variance(double s) const;
    /// rho(s) / total_variance(s).
    double kappa(double s) const;

    /// Throws std::domain_error unless 0 <= s <= T (up to rounding).
    void check_time(double s) const;

    /// Copy with a different risk-aversion weight.
    MarketParams with_mu(double mu) const;

private:
    MarketSpec spec_;
};

/// Feedback rule phi^s(z) = alpha(s) * z.
struct LinearStrategy {
    CoefficientFn alpha;

    double coefficient(double s) const noexcept { return alpha(s); }
    double operator()(double s, double z) const noexcept { return alpha(s) * z; }

    static LinearStrategy zero(double horizon) { return {CoefficientFn::constant(0.0, horizon)}; }
    static LinearStrategy constant(double value, double horizon) { return {CoefficientFn::constant(value, horizon)}; }
    LinearStrategy scaled(double factor) const { return {alpha.scaled(factor)}; }
};

/// Largest deviations from M1 = N1^2 and M3 = N1 N2 over a tabulation.
struct IdentityDeviation {
    double m1_vs_n1sq = 0.0;
    double m3_vs_n1n2 = 0.0;
};

/// Uniform grid of n_steps + 1 nodes on [t0, t1].
std::vector<double> uniform_grid(double t0, double t1, std::size_t n_steps);

}  // namespace eqpide
