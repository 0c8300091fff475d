#pragma once

// Backward IMEX finite differences for the coupled pair of integro-PDEs
// satisfied by theta(s, x, z) and g(s, x, z) under a linear feedback rule,
// plus the H-function and the policy-iteration loop built on top of them.

#include "eqpide/core_model.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqpide {

class FieldSource;

/// Square (x, z) grid with identical axes and a uniform time grid on [0, T].
struct StateGrid2D {
    double lower = -2.0;
    double upper = 2.0;
    std::size_t n_space = 81;
    std::size_t n_time = 200;  // time steps; n_time + 1 slices
    double horizon = 1.0;

    StateGrid2D() = default;
    StateGrid2D(double lower, double upper, std::size_t n_space, std::size_t n_time, double horizon);

    double h() const noexcept { return (upper - lower) / static_cast<double>(n_space - 1); }
    double dt() const noexcept { return horizon / static_cast<double>(n_time); }
    double node(std::size_t i) const noexcept { return lower + h() * static_cast<double>(i); }
    double time(std::size_t k) const noexcept { return k == n_time ? horizon : dt() * static_cast<double>(k); }
    std::size_t slice_size() const noexcept { return n_space * n_space; }
    bool contains(double y) const noexcept { return y >= lower - 1e-12 && y <= upper + 1e-12; }
};

/// Numerical failure inside the backward sweep; `time_index` is the slice
/// being computed when it happened.
class PideError : public std::runtime_error {
public:
    PideError(const std::string& what, std::size_t time_index);
    std::size_t time_index() const noexcept { return time_index_; }

private:
    std::size_t time_index_;
};

/// Quadratic coefficient of H in u is not positive on the diagonal.
class ConvexityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PideSolution {
public:
    PideSolution(StateGrid2D grid, LinearStrategy strategy);

    const StateGrid2D& grid() const noexcept { return grid_; }
    const LinearStrategy& strategy() const noexcept { return strategy_; }

    double theta(std::size_t k, std::size_t i, std::size_t j) const noexcept { return theta_[index(k, i, j)]; }
    double g(std::size_t k, std::size_t i, std::size_t j) const noexcept { return g_[index(k, i, j)]; }
    std::span<const double> theta_slice(std::size_t k) const noexcept;
    std::span<const double> g_slice(std::size_t k) const noexcept;
    std::span<double> theta_slice(std::size_t k) noexcept;
    std::span<double> g_slice(std::size_t k) noexcept;

    std::span<const double> theta_data() const noexcept { return theta_; }
    std::span<const double> g_data() const noexcept { return g_; }

private:
    std::size_t index(std::size_t k, std::size_t i, std::size_t j) const noexcept {
        return (k * grid_.n_space + i) * grid_.n_space + j;
    }

    StateGrid2D grid_;
    LinearStrategy strategy_;
    std::vector<double> theta_;
    std::vector<double> g_;
};

/// Solves both integro-PDEs backward from theta(T) = x^2/2, g(T) = x.
PideSolution policy_evaluation(const MarketParams& params, const LinearStrategy& strategy, const StateGrid2D& grid);

/// Mean-variance H(t, y, s, X, Z, u) with derivatives and jump values taken
/// from `fields`; the conditional expectation of g is g(s, X, Z) itself.
double h_function(const MarketParams& params, const FieldSource& fields, const LinearStrategy& strategy, double t,
                  double y, double s, double X, double Z, double u);

/// Minimiser of the diagonal H at slice k from node finite differences,
/// fitted as alpha * z over the interior diagonal nodes.
double policy_improvement(const MarketParams& params, const PideSolution& sol, std::size_t k);

/// Improved coefficient at every time slice.
LinearStrategy policy_improvement(const MarketParams& params, const PideSolution& sol);

struct PolicyIterationResult {
    LinearStrategy strategy;
    PideSolution solution;
    /// sup_s |alpha_{k+1}(s) - alpha_k(s)| per improvement step.
    std::vector<double> trace;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(std::vector<double> trace);
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

PolicyIterationResult policy_iteration(const MarketParams& params, const StateGrid2D& grid, std::size_t max_iters,
                                       double tol);
PolicyIterationResult policy_iteration(const MarketParams& params, const StateGrid2D& grid, std::size_t max_iters,
                                       double tol, const LinearStrategy& initial);

/// Max relative error of theta and g against the quadratic/linear ansatz
/// over the interior third of the grid, each normalised by the sup of the
/// exact field there.
struct AnsatzError {
    double theta = 0.0;
    double g = 0.0;
    double combined() const noexcept { return theta > g ? theta : g; }
};
AnsatzError ansatz_error(const PideSolution& sol, const FieldSource& exact);

}  // namespace eqpide
