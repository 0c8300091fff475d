#include "eqpide/adjoint_bridge.hpp"

#include "eqpide/fields.hpp"
#include "eqpide/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace eqpide {

AdjointProcesses build_adjoints(const MarketParams& params, const FieldSource& fields, const LinearStrategy& strategy,
                                const PathBundle& bundle, double t, double expected_terminal) {
    if (!bundle.paired()) throw std::invalid_argument("adjoints need a paired bundle (equilibrium twin missing)");
    if (std::abs(bundle.times.front() - t) > 1e-12) throw std::invalid_argument("bundle does not start at t");
    AdjointProcesses adj;
    adj.t = t;
    adj.y = bundle.Z(0, 0);
    adj.expected_terminal = expected_terminal;
    adj.g_bar = -(expected_terminal + params.mu() * adj.y);
    adj.n_paths = bundle.n_paths;
    adj.n_times = bundle.n_times();
    adj.n_atoms = params.jumps().size();
    adj.times = bundle.times;
    const std::size_t cells = adj.n_paths * adj.n_times;
    adj.p.resize(cells);
    adj.q.resize(cells);
    adj.P.resize(cells);
    adj.Phi.resize(cells);
    adj.r.resize(cells * adj.n_atoms);
    adj.Upsilon.resize(cells * adj.n_atoms);

    const double G = adj.g_bar;
    std::vector<double> sig(adj.n_times), alpha(adj.n_times);
    std::vector<std::vector<double>> phi(adj.n_times, std::vector<double>(adj.n_atoms));
    for (std::size_t k = 0; k < adj.n_times; ++k) {
        const double s = adj.times[k];
        sig[k] = params.sigma(s);
        alpha[k] = strategy.coefficient(s);
        for (std::size_t a = 0; a < adj.n_atoms; ++a) phi[k][a] = params.jump_coefficient(a, s);
    }

    parallel_for(adj.n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            for (std::size_t k = 0; k < adj.n_times; ++k) {
                const double s = adj.times[k];
                const double x = bundle.Z(path, k);
                const FieldSample f = fields.sample(s, x, x);
                const double u = alpha[k] * x;
                const std::size_t c = adj.at(path, k);
                adj.p[c] = f.theta_x + G * f.g_x;
                adj.q[c] = u * sig[k] * ((f.theta_xx + G * f.g_xx) + (f.theta_xz + G * f.g_xz));
                adj.P[c] = f.theta_xx + G * f.g_xx;
                adj.Phi[c] = u * sig[k] * ((f.theta_xxx + G * f.g_xxx) + (f.theta_xxz + G * f.g_xxz));
                for (std::size_t a = 0; a < adj.n_atoms; ++a) {
                    const double shift = u * phi[k][a];
                    const FieldSample fs = fields.sample(s, x + shift, x + shift);
                    adj.r[adj.at(path, k, a)] = (fs.theta_x - f.theta_x) + G * (fs.g_x - f.g_x);
                    adj.Upsilon[adj.at(path, k, a)] = (fs.theta_xx - f.theta_xx) + G * (fs.g_xx - f.g_xx);
                }
            }
        }
    });
    return adj;
}

namespace {

struct Identity {
    std::string name;
    // Per-path contribution over steps [ka, kb).
    std::function<double(std::size_t path, std::size_t ka, std::size_t kb)> unit;
    // Integrand whose mean sizes the Euler bias allowance.
    std::function<double(std::size_t path, std::size_t k)> integrand;
};

}  // namespace

std::vector<BsdeResidual> bsde_residual(const MarketParams& params, const AdjointProcesses& adj,
                                        const PathBundle& bundle, std::size_t n_intervals, double k_se) {
    if (adj.n_paths != bundle.n_paths || adj.n_times != bundle.n_times())
        throw std::invalid_argument("adjoints were not built on this bundle");
    if (n_intervals < 1 || n_intervals > bundle.n_steps()) throw std::invalid_argument("bad checkpoint count");
    const std::size_t nt = adj.n_times;
    const double dt = bundle.dt;
    std::vector<double> r0(nt);
    for (std::size_t k = 0; k < nt; ++k) r0[k] = params.r0(adj.times[k]);
    std::vector<double> nu;
    for (const auto& j : params.jumps()) nu.push_back(j.intensity);

    auto covariation = [&](const std::vector<double>& Y, double rate_mult, std::size_t path, std::size_t k) {
        const std::size_t c = adj.at(path, k);
        return Y[c + 1] - Y[c] + rate_mult * r0[k] * Y[c] * dt;
    };

    std::vector<Identity> ids;
    auto add_block = [&](const std::string& label, const std::vector<double>* Y, double rate_mult,
                         const std::vector<double>* Z, const std::vector<double>* R) {
        ids.push_back({label + " drift",
                       [&, Y, rate_mult](std::size_t path, std::size_t ka, std::size_t kb) {
                           double acc = (*Y)[adj.at(path, kb)] - (*Y)[adj.at(path, ka)];
                           for (std::size_t k = ka; k < kb; ++k)
                               acc += 0.5 * rate_mult * dt *
                                      (r0[k] * (*Y)[adj.at(path, k)] + r0[k + 1] * (*Y)[adj.at(path, k + 1)]);
                           return acc;
                       },
                       [&, Y, rate_mult](std::size_t path, std::size_t k) {
                           return rate_mult * r0[k] * (*Y)[adj.at(path, k)];
                       }});
        ids.push_back({label + " x dW",
                       [&, Y, Z, rate_mult](std::size_t path, std::size_t ka, std::size_t kb) {
                           double acc = 0.0;
                           for (std::size_t k = ka; k < kb; ++k)
                               acc += covariation(*Y, rate_mult, path, k) * bundle.brownian_increment(path, k) -
                                      (*Z)[adj.at(path, k)] * dt;
                           return acc;
                       },
                       [&, Z](std::size_t path, std::size_t k) { return (*Z)[adj.at(path, k)]; }});
        for (std::size_t a = 0; a < adj.n_atoms; ++a) {
            ids.push_back({label + " x dN[" + std::to_string(a) + "]",
                           [&, Y, R, rate_mult, a](std::size_t path, std::size_t ka, std::size_t kb) {
                               double acc = 0.0;
                               for (std::size_t k = ka; k < kb; ++k) {
                                   const double dn = static_cast<double>(bundle.jump_count(path, k, a)) - nu[a] * dt;
                                   acc += covariation(*Y, rate_mult, path, k) * dn -
                                          (*R)[adj.at(path, k, a)] * nu[a] * dt;
                               }
                               return acc;
                           },
                           [&, R, a](std::size_t path, std::size_t k) { return (*R)[adj.at(path, k, a)] * nu[a]; }});
        }
    };
    add_block("p", &adj.p, 1.0, &adj.q, &adj.r);
    add_block("P", &adj.P, 2.0, &adj.Phi, &adj.Upsilon);

    const std::size_t per_unit = bundle.antithetic ? 2 : 1;
    const std::size_t units = bundle.n_paths / per_unit;
    std::vector<BsdeResidual> out;
    for (const auto& id : ids) {
        std::vector<double> mean_integrand(nt, 0.0);
        for (std::size_t path = 0; path < adj.n_paths; ++path)
            for (std::size_t k = 0; k < nt; ++k) mean_integrand[k] += id.integrand(path, k);
        for (auto& m : mean_integrand) m /= static_cast<double>(adj.n_paths);

        for (std::size_t iv = 0; iv < n_intervals; ++iv) {
            const std::size_t ka = iv * (nt - 1) / n_intervals;
            const std::size_t kb = (iv + 1) * (nt - 1) / n_intervals;
            std::vector<double> values(units, 0.0);
            parallel_for(units, [&](std::size_t begin, std::size_t end) {
                for (std::size_t u = begin; u < end; ++u)
                    for (std::size_t m = 0; m < per_unit; ++m)
                        values[u] += id.unit(u * per_unit + m, ka, kb) / static_cast<double>(per_unit);
            });
            BsdeResidual res;
            res.identity = id.name;
            res.start = adj.times[ka];
            res.end = adj.times[kb];
            res.residual = summarize(values);
            double peak = 0.0;
            for (std::size_t k = ka; k <= kb; ++k) peak = std::max(peak, std::abs(mean_integrand[k]));
            res.bias_budget = dt * (res.end - res.start) * peak;
            res.pass = std::abs(res.residual.mean) <= k_se * res.residual.std_error + res.bias_budget;
            out.push_back(std::move(res));
        }
    }
    return out;
}

std::vector<double> default_u_grid(double lower, double upper, std::size_t n) {
    if (n < 2 || !(upper > lower)) throw std::invalid_argument("u grid needs n >= 2 and lower < upper");
    return uniform_grid(lower, upper, n - 1);
}

HbarReport hbar_min_check(const MarketParams& params, const AdjointProcesses& adj, const LinearStrategy& strategy,
                          const std::vector<double>& u_grid) {
    if (u_grid.size() < 2) throw std::invalid_argument("u grid needs at least two points");
    const double t = adj.t;
    const double y = adj.y;
    const double u_hat = strategy(t, y);
    const double sig = params.sigma(t);
    const double rho = params.excess_return(t);
    // Every path starts at (t, y, y), so the start-point adjoints are deterministic.
    const std::size_t c = adj.at(0, 0);
    const double p = adj.p[c], q = adj.q[c], P = adj.P[c];

    HbarReport rep;
    rep.u_grid = u_grid;
    rep.target = u_hat;
    rep.cell = (u_grid.back() - u_grid.front()) / static_cast<double>(u_grid.size() - 1);
    std::size_t best = 0;
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const double u = u_grid[i];
        const double d = u - u_hat;
        double h = (params.r0(t) * y + u * rho) * p + u * sig * q + 0.5 * P * sig * sig * d * d;
        for (std::size_t a = 0; a < adj.n_atoms; ++a) {
            const double phi = params.jump_coefficient(a, t);
            const double nu = params.jumps()[a].intensity;
            h += u * phi * adj.r[adj.at(0, 0, a)] * nu;
            h += 0.5 * (adj.Upsilon[adj.at(0, 0, a)] + P) * phi * phi * nu * d * d;
        }
        rep.values.push_back(h);
        if (h < rep.values[best]) best = i;
    }
    rep.argmin = u_grid[best];
    rep.pass = std::abs(rep.argmin - rep.target) <= rep.cell * (1.0 + 1e-9);
    return rep;
}

}  // namespace eqpide
