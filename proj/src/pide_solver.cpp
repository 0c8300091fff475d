#include "eqpide/pide_solver.hpp"

#include "eqpide/fields.hpp"
#include "stencil.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eqpide {

using detail::Stencil;

StateGrid2D::StateGrid2D(double lower_, double upper_, std::size_t n_space_, std::size_t n_time_, double horizon_)
    : lower(lower_), upper(upper_), n_space(n_space_), n_time(n_time_), horizon(horizon_) {
    if (!(upper > lower)) throw std::invalid_argument("grid bounds must satisfy lower < upper");
    if (n_space < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
    if (n_time < 1) throw std::invalid_argument("grid needs at least one time step");
    if (!(horizon > 0.0)) throw std::invalid_argument("grid horizon must be positive");
}

PideError::PideError(const std::string& what, std::size_t time_index)
    : std::runtime_error(what + " (time index " + std::to_string(time_index) + ")"), time_index_(time_index) {}

NonConvergence::NonConvergence(std::vector<double> trace)
    : std::runtime_error("policy iteration did not converge after " + std::to_string(trace.size()) + " iterations"),
      trace_(std::move(trace)) {}

PideSolution::PideSolution(StateGrid2D grid, LinearStrategy strategy)
    : grid_(grid),
      strategy_(std::move(strategy)),
      theta_((grid.n_time + 1) * grid.slice_size()),
      g_((grid.n_time + 1) * grid.slice_size()) {}

std::span<const double> PideSolution::theta_slice(std::size_t k) const noexcept {
    return std::span<const double>(theta_).subspan(k * grid_.slice_size(), grid_.slice_size());
}
std::span<const double> PideSolution::g_slice(std::size_t k) const noexcept {
    return std::span<const double>(g_).subspan(k * grid_.slice_size(), grid_.slice_size());
}
std::span<double> PideSolution::theta_slice(std::size_t k) noexcept {
    return std::span<double>(theta_).subspan(k * grid_.slice_size(), grid_.slice_size());
}
std::span<double> PideSolution::g_slice(std::size_t k) noexcept {
    return std::span<double>(g_).subspan(k * grid_.slice_size(), grid_.slice_size());
}

namespace {

// Weights along one axis for evaluating a slice at an arbitrary coordinate:
// linear inside the grid, and outside it either quadratic extrapolation from
// the three edge nodes or linear from the two edge nodes.
struct AxisWeights {
    std::size_t first = 0;
    std::size_t len = 0;
    std::array<double, 3> w{};
};

AxisWeights axis_weights(double y, const StateGrid2D& grid, bool quadratic_outside) {
    const std::size_t n = grid.n_space;
    const double pos = (y - grid.lower) / grid.h();
    const double last = static_cast<double>(n - 1);
    if (pos >= 0.0 && pos <= last) {
        const auto k = std::min(static_cast<std::size_t>(pos), n - 2);
        const double t = pos - static_cast<double>(k);
        return {k, 2, {1.0 - t, t, 0.0}};
    }
    if (quadratic_outside) {
        const std::size_t first = pos < 0.0 ? 0 : n - 3;
        const double t = pos - static_cast<double>(first);
        return {first, 3, {0.5 * (t - 1.0) * (t - 2.0), -t * (t - 2.0), 0.5 * t * (t - 1.0)}};
    }
    const std::size_t first = pos < 0.0 ? 0 : n - 2;
    const double t = pos - static_cast<double>(first);
    return {first, 2, {1.0 - t, t, 0.0}};
}

double evaluate_slice(std::span<const double> f, const StateGrid2D& grid, double x, double z, bool quadratic_outside) {
    const auto wx = axis_weights(x, grid, quadratic_outside);
    const auto wz = axis_weights(z, grid, quadratic_outside);
    const std::size_t n = grid.n_space;
    double acc = 0.0;
    for (std::size_t a = 0; a < wx.len; ++a)
        for (std::size_t b = 0; b < wz.len; ++b) acc += wx.w[a] * wz.w[b] * f[(wx.first + a) * n + wz.first + b];
    return acc;
}

// Explicit part: sum_i nu_i [u(x + c phi_i, z + c phi_i) - u - c phi_i (u_x + u_z)]
// with c = alpha(s) z, at the previous (later) time level.
void jump_term(const MarketParams& params, double alpha, double s, const StateGrid2D& grid,
               std::span<const double> u, bool quadratic_outside, std::vector<double>& out) {
    const std::size_t n = grid.n_space;
    const double h = grid.h();
    std::fill(out.begin(), out.end(), 0.0);
    const auto& jumps = params.jumps();
    if (jumps.empty()) return;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(i);
        const Stencil dx = detail::first_derivative(i, n, h);
        for (std::size_t j = 0; j < n; ++j) {
            const double z = grid.node(j);
            const double c = alpha * z;
            const double ux = detail::apply_x(u, n, dx, j);
            const double uz = detail::apply_z(u, n, i, detail::first_derivative(j, n, h));
            const double here = u[i * n + j];
            double acc = 0.0;
            for (std::size_t a = 0; a < jumps.size(); ++a) {
                const double shift = c * params.jump_coefficient(a, s);
                const double shifted = evaluate_slice(u, grid, x + shift, z + shift, quadratic_outside);
                acc += jumps[a].intensity * (shifted - here - shift * (ux + uz));
            }
            out[i * n + j] = acc;
        }
    }
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

constexpr double kLinearTolerance = 1e-14;

// I - dt * (local operator at time s): drift, diffusion and the 9-point cross
// term, all at the new time level.
SparseMatrix implicit_matrix(const MarketParams& params, double alpha, double s, const StateGrid2D& grid) {
    const std::size_t n = grid.n_space;
    const double h = grid.h();
    const double dt = grid.dt();
    const double r0 = params.r0(s);
    const double rho = params.excess_return(s);
    const double sig = params.sigma(s);
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(n * n * 32);
    auto at = [n](std::size_t i, std::size_t j) { return static_cast<int>(i * n + j); };
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(i);
        const Stencil d1x = detail::first_derivative(i, n, h);
        const Stencil d2x = detail::second_derivative(i, n, h);
        for (std::size_t j = 0; j < n; ++j) {
            const double z = grid.node(j);
            const Stencil d1z = detail::first_derivative(j, n, h);
            const Stencil d2z = detail::second_derivative(j, n, h);
            const double c = alpha * z;
            const double bx = r0 * x + c * rho;
            const double bz = r0 * z + c * rho;
            const double diff = 0.5 * c * c * sig * sig;
            const int row = at(i, j);
            trip.emplace_back(row, row, 1.0);
            for (std::size_t m = 0; m < d1x.len; ++m) trip.emplace_back(row, at(d1x.first + m, j), -dt * bx * d1x.w[m]);
            for (std::size_t m = 0; m < d1z.len; ++m) trip.emplace_back(row, at(i, d1z.first + m), -dt * bz * d1z.w[m]);
            for (std::size_t m = 0; m < d2x.len; ++m)
                trip.emplace_back(row, at(d2x.first + m, j), -dt * diff * d2x.w[m]);
            for (std::size_t m = 0; m < d2z.len; ++m)
                trip.emplace_back(row, at(i, d2z.first + m), -dt * diff * d2z.w[m]);
            for (std::size_t a = 0; a < d1x.len; ++a)
                for (std::size_t b = 0; b < d1z.len; ++b)
                    trip.emplace_back(row, at(d1x.first + a, d1z.first + b), -dt * 2.0 * diff * d1x.w[a] * d1z.w[b]);
        }
    }
    SparseMatrix A(static_cast<int>(n * n), static_cast<int>(n * n));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

PideSolution policy_evaluation(const MarketParams& params, const LinearStrategy& strategy, const StateGrid2D& grid) {
    if (std::abs(grid.horizon - params.horizon()) > 1e-12 * std::max(1.0, params.horizon()))
        throw std::invalid_argument("grid horizon does not match the market horizon");
    PideSolution sol(grid, strategy);
    const std::size_t n = grid.n_space;
    const std::size_t nt = grid.n_time;
    const double dt = grid.dt();

    auto theta_T = sol.theta_slice(nt);
    auto g_T = sol.g_slice(nt);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(i);
        for (std::size_t j = 0; j < n; ++j) {
            theta_T[i * n + j] = 0.5 * x * x;
            g_T[i * n + j] = x;
        }
    }

    Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> solver;
    solver.setTolerance(kLinearTolerance);
    solver.setMaxIterations(500);
    Eigen::VectorXd guess(static_cast<Eigen::Index>(n * n));
    std::vector<double> jump(n * n);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n * n));

    for (std::size_t k = nt; k-- > 0;) {
        const double s_new = grid.time(k);
        const double s_old = grid.time(k + 1);
        const SparseMatrix A = implicit_matrix(params, strategy.coefficient(s_new), s_new, grid);
        solver.compute(A);
        if (solver.info() != Eigen::Success) throw PideError("preconditioner setup failed", k);

        const double alpha_old = strategy.coefficient(s_old);
        for (int field = 0; field < 2; ++field) {
            const bool is_theta = field == 0;
            const auto prev = is_theta ? sol.theta_slice(k + 1) : sol.g_slice(k + 1);
            auto next = is_theta ? sol.theta_slice(k) : sol.g_slice(k);
            jump_term(params, alpha_old, s_old, grid, std::span<const double>(prev.data(), prev.size()), is_theta,
                      jump);
            for (std::size_t p = 0; p < n * n; ++p) rhs[static_cast<Eigen::Index>(p)] = prev[p] + dt * jump[p];
            for (std::size_t p = 0; p < n * n; ++p) guess[static_cast<Eigen::Index>(p)] = prev[p];
            const Eigen::VectorXd u = solver.solveWithGuess(rhs, guess);
            if (solver.info() != Eigen::Success)
                throw PideError("linear solve did not converge (residual " + std::to_string(solver.error()) + ")", k);
            for (std::size_t p = 0; p < n * n; ++p) {
                const double v = u[static_cast<Eigen::Index>(p)];
                if (!std::isfinite(v)) throw PideError("non-finite value in the backward sweep", k);
                next[p] = v;
            }
            const double before = max_abs(std::span<const double>(prev.data(), prev.size()));
            const double after = max_abs(std::span<const double>(next.data(), next.size()));
            if (after > 10.0 * before && after > 1e-300)
                throw PideError(std::string("instability: ") + (is_theta ? "theta" : "g") +
                                    " grew more than tenfold in one step",
                                k);
        }
    }
    return sol;
}

double h_function(const MarketParams& params, const FieldSource& fields, const LinearStrategy& strategy, double t,
                  double y, double s, double X, double Z, double u) {
    params.check_time(t);
    params.check_time(s);
    fields.check_domain(s, X, Z);
    const FieldSample f = fields.sample(s, X, Z);
    const double G = params.mu() * y + f.g;
    const double sig = params.sigma(s);
    const double rho = params.excess_return(s);
    const double phi_hat = strategy(s, Z);
    double h = 0.5 * (f.theta_xx - G * f.g_xx) * (sig * u) * (sig * u) + (f.theta_x - G * f.g_x) * (params.r0(s) * X + u * rho) +
               (f.theta_xz - G * f.g_xz) * u * phi_hat * sig * sig;
    const auto& jumps = params.jumps();
    for (std::size_t a = 0; a < jumps.size(); ++a) {
        const double phi = params.jump_coefficient(a, s);
        const double nu = jumps[a].intensity;
        const double xs = X + u * phi;
        const double zs = Z + phi_hat * phi;
        h += nu * (fields.theta(s, xs, zs) - f.theta_x * u * phi);
        h -= G * nu * (fields.g(s, xs, zs) - f.g_x * u * phi);
    }
    return h;
}

double policy_improvement(const MarketParams& params, const PideSolution& sol, std::size_t k) {
    const StateGrid2D& grid = sol.grid();
    const std::size_t n = grid.n_space;
    const double h = grid.h();
    const double s = grid.time(k);
    const double alpha_k = sol.strategy().coefficient(s);
    const double total = params.total_variance(s);
    const double rho = params.excess_return(s);
    const double mu = params.mu();
    const auto th = sol.theta_slice(k);
    const auto gg = sol.g_slice(k);
    const double third = (grid.upper - grid.lower) / 3.0;
    const double lo = grid.lower + third - 1e-12;
    const double hi = grid.upper - third + 1e-12;

    double zu = 0.0;
    double zz = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double z = grid.node(j);
        if (z < lo || z > hi || std::abs(z) < 0.5 * h) continue;
        const Stencil d1 = detail::first_derivative(j, n, h);
        const Stencil d2 = detail::second_derivative(j, n, h);
        const double theta_x = detail::apply_x(th, n, d1, j);
        const double theta_xx = detail::apply_x(th, n, d2, j);
        const double theta_xz = detail::apply_xz(th, n, d1, d1);
        const double g_x = detail::apply_x(gg, n, d1, j);
        const double g_xx = detail::apply_x(gg, n, d2, j);
        const double g_xz = detail::apply_xz(gg, n, d1, d1);
        const double G = mu * z + gg[j * n + j];
        const double A = (theta_xx - G * g_xx) * total;
        if (!(A > 0.0))
            throw ConvexityError("non-positive quadratic coefficient of H on the diagonal at s = " +
                                 std::to_string(s) + ", z = " + std::to_string(z));
        const double B = (theta_x - G * g_x) * rho + (theta_xz - G * g_xz) * alpha_k * z * total;
        zu += z * (-B / A);
        zz += z * z;
    }
    if (zz == 0.0) throw std::invalid_argument("grid has no interior diagonal nodes away from zero");
    return zu / zz;
}

LinearStrategy policy_improvement(const MarketParams& params, const PideSolution& sol) {
    const std::size_t nt = sol.grid().n_time;
    std::vector<double> alpha(nt + 1);
    for (std::size_t k = 0; k <= nt; ++k) alpha[k] = policy_improvement(params, sol, k);
    return {CoefficientFn(std::move(alpha), sol.grid().horizon)};
}

PolicyIterationResult policy_iteration(const MarketParams& params, const StateGrid2D& grid, std::size_t max_iters,
                                       double tol) {
    return policy_iteration(params, grid, max_iters, tol, LinearStrategy::zero(grid.horizon));
}

PolicyIterationResult policy_iteration(const MarketParams& params, const StateGrid2D& grid, std::size_t max_iters,
                                       double tol, const LinearStrategy& initial) {
    if (max_iters == 0) throw std::invalid_argument("max_iters must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const std::size_t nt = grid.n_time;
    std::vector<double> current(nt + 1);
    for (std::size_t k = 0; k <= nt; ++k) current[k] = initial.coefficient(grid.time(k));
    std::vector<double> trace;
    for (std::size_t it = 0; it < max_iters; ++it) {
        LinearStrategy strategy{CoefficientFn(current, grid.horizon)};
        PideSolution sol = policy_evaluation(params, strategy, grid);
        const LinearStrategy improved = policy_improvement(params, sol);
        double dist = 0.0;
        for (std::size_t k = 0; k <= nt; ++k) dist = std::max(dist, std::abs(improved.alpha.samples()[k] - current[k]));
        trace.push_back(dist);
        if (dist <= tol) return {std::move(strategy), std::move(sol), std::move(trace)};
        current.assign(improved.alpha.samples().begin(), improved.alpha.samples().end());
    }
    throw NonConvergence(std::move(trace));
}

AnsatzError ansatz_error(const PideSolution& sol, const FieldSource& exact) {
    const StateGrid2D& grid = sol.grid();
    const std::size_t n = grid.n_space;
    const double third = (grid.upper - grid.lower) / 3.0;
    const double lo = grid.lower + third - 1e-12;
    const double hi = grid.upper - third + 1e-12;
    double err_t = 0.0, err_g = 0.0, ref_t = 0.0, ref_g = 0.0;
    for (std::size_t k = 0; k <= grid.n_time; ++k) {
        const double s = grid.time(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.node(i);
            if (x < lo || x > hi) continue;
            for (std::size_t j = 0; j < n; ++j) {
                const double z = grid.node(j);
                if (z < lo || z > hi) continue;
                const double et = exact.theta(s, x, z);
                const double eg = exact.g(s, x, z);
                err_t = std::max(err_t, std::abs(sol.theta(k, i, j) - et));
                err_g = std::max(err_g, std::abs(sol.g(k, i, j) - eg));
                ref_t = std::max(ref_t, std::abs(et));
                ref_g = std::max(ref_g, std::abs(eg));
            }
        }
    }
    return {ref_t > 0.0 ? err_t / ref_t : err_t, ref_g > 0.0 ? err_g / ref_g : err_g};
}

}  // namespace eqpide
