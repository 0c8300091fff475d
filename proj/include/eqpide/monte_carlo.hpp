#pragma once

// Euler-Maruyama simulation of the controlled wealth under compound-Poisson
// jumps, with the Feynman-Kac, cost-functional and spike-variation estimators
// built on it. Paths use counter-based streams, so every estimate is
// bit-identical for a given seed whatever the worker count.

#include "eqpide/core_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace eqpide {

class FieldSource;

struct SimConfig {
    std::size_t n_paths = 100000;
    std::size_t n_steps = 500;
    std::uint64_t seed = 1;
    /// Paths 2m and 2m+1 share Poisson marks and use opposite Brownian
    /// increments; pairs are then the independent sampling units.
    bool antithetic = false;

    void validate() const;
    std::size_t units() const noexcept { return antithetic ? n_paths / 2 : n_paths; }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0;
};

class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t path);
    std::size_t path() const noexcept { return path_; }

private:
    std::size_t path_;
};

struct JumpEvent {
    std::size_t path;
    std::size_t step;
    std::size_t atom;
    unsigned count;
};

/// Stored paths on the Euler grid. `wealth` and `twin_wealth` are path-major
/// with n_times() entries per path.
struct PathBundle {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::vector<double> wealth;
    std::vector<double> twin_wealth;  // empty unless paired
    std::vector<JumpEvent> jump_log;
    std::uint64_t seed = 0;
    bool antithetic = false;
    double dt = 0.0;
    std::vector<double> jump_means;  // nu_i * dt per atom

    bool paired() const noexcept { return !twin_wealth.empty(); }
    std::size_t n_times() const noexcept { return times.size(); }
    std::size_t n_steps() const noexcept { return times.size() - 1; }
    double X(std::size_t p, std::size_t k) const noexcept { return wealth[p * times.size() + k]; }
    double Z(std::size_t p, std::size_t k) const noexcept { return twin_wealth[p * times.size() + k]; }

    /// Brownian increment over step k of path p, regenerated from the stream.
    double brownian_increment(std::size_t p, std::size_t k) const noexcept;
    /// Poisson count of atom a over step k of path p, regenerated from the stream.
    unsigned jump_count(std::size_t p, std::size_t k, std::size_t atom) const noexcept;
};

/// Euler-Maruyama from (t0, x_init) with control alpha(s_k) * Z_k, where Z is
/// the twin started at z_init (or X itself when unpaired).
PathBundle simulate(const MarketParams& params, const LinearStrategy& strategy, double t0, double x_init,
                    double z_init, const SimConfig& cfg, bool paired);

/// E[X(T)^2 / 2] for the pair started at (x, z) at time s.
McEstimate estimate_theta(const MarketParams& params, const LinearStrategy& strategy, double s, double x, double z,
                          const SimConfig& cfg);

/// E[X(T)] for the pair started at (x, z) at time s.
McEstimate estimate_g(const MarketParams& params, const LinearStrategy& strategy, double s, double x, double z,
                      const SimConfig& cfg);

/// Constant control v on [t, t + epsilon), then the equilibrium control
/// process alpha(s) * Z(s) of the unperturbed twin. epsilon is snapped to the
/// nearest positive multiple of the Euler step.
struct SpikeRule {
    double v = 0.0;
    double epsilon = 0.0;
};

/// J = Var[X(T)]/2 - mu y E[X(T)] from (t, y, y), with a delta-method SE.
McEstimate evaluate_cost(const MarketParams& params, const LinearStrategy& strategy, double t, double y,
                         const SimConfig& cfg, std::optional<SpikeRule> spike = std::nullopt);

struct SpikeQuotient {
    double epsilon_requested = 0.0;
    double epsilon = 0.0;  // effective, on the Euler grid
    double quotient = 0.0;
    double std_error = 0.0;
};

struct SpikeReport {
    double t = 0.0;
    double y = 0.0;
    double v = 0.0;
    double u_hat = 0.0;  // alpha(t) * y
    std::vector<SpikeQuotient> quotients;
    /// Least-squares fit quotient = limit + slope * epsilon.
    double limit = 0.0;
    double limit_se = 0.0;
    double slope = 0.0;
    /// H(t, y, t, y, y, v) - H(t, y, t, y, y, u_hat); NaN when no fields were given.
    double h_gap = 0.0;

    /// Every quotient >= -(k SE + |slope| epsilon).
    bool one_sided(double k) const noexcept;
    /// Smallest quotient / SE.
    double min_z_score() const noexcept;
};

/// Difference quotients (J^eps - J) / eps for every (v, eps) pair, all driven
/// by the same paths as the unperturbed run.
std::vector<SpikeReport> spike_variation_test(const MarketParams& params, const LinearStrategy& strategy, double t,
                                              double y, const std::vector<double>& vs,
                                              const std::vector<double>& epsilons, const SimConfig& cfg,
                                              const FieldSource* fields = nullptr);

SpikeReport spike_variation_test(const MarketParams& params, const LinearStrategy& strategy, double t, double y,
                                 double v, const std::vector<double>& epsilons, const SimConfig& cfg,
                                 const FieldSource* fields = nullptr);

/// Mean and standard error of independent unit values.
McEstimate summarize(const std::vector<double>& units);

}  // namespace eqpide
