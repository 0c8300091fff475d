#include "eqpide/monte_carlo.hpp"

#include "eqpide/parallel.hpp"
#include "eqpide/pide_solver.hpp"
#include "eqpide/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace eqpide {

void SimConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be at least 1");
    if (antithetic && n_paths % 2 != 0) throw std::invalid_argument("antithetic sampling needs an even n_paths");
}

SimulationError::SimulationError(const std::string& what, std::size_t path)
    : std::runtime_error(what + " (path " + std::to_string(path) + ")"), path_(path) {}

McEstimate summarize(const std::vector<double>& units) {
    McEstimate e;
    e.n_effective = units.size();
    if (units.empty()) return e;
    double sum = 0.0;
    for (double v : units) sum += v;
    e.mean = sum / static_cast<double>(units.size());
    if (units.size() > 1) {
        double ss = 0.0;
        for (double v : units) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(units.size() - 1) / static_cast<double>(units.size()));
    }
    return e;
}

namespace {

// Coefficients frozen at the left end of every Euler step.
struct StepTable {
    double dt = 0.0;
    std::size_t n = 0;
    std::size_t atoms = 0;
    std::vector<double> s, r0, rho, sigma, alpha;
    std::vector<double> phi;  // n x atoms
    std::vector<double> nu_dt;

    StepTable(const MarketParams& params, const LinearStrategy& strategy, double t0, std::size_t n_steps)
        : dt((params.horizon() - t0) / static_cast<double>(n_steps)), n(n_steps), atoms(params.jumps().size()) {
        s.resize(n);
        r0.resize(n);
        rho.resize(n);
        sigma.resize(n);
        alpha.resize(n);
        phi.resize(n * atoms);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = t0 + dt * static_cast<double>(k);
            r0[k] = params.r0(s[k]);
            rho[k] = params.excess_return(s[k]);
            sigma[k] = params.sigma(s[k]);
            alpha[k] = strategy.coefficient(s[k]);
            for (std::size_t a = 0; a < atoms; ++a) phi[k * atoms + a] = params.jump_coefficient(a, s[k]);
        }
        for (const auto& j : params.jumps()) nu_dt.push_back(j.intensity * dt);
    }

    std::vector<double> times(double t0, double horizon) const {
        std::vector<double> t(n + 1);
        for (std::size_t k = 0; k < n; ++k) t[k] = s[k];
        t[n] = horizon;
        (void)t0;
        return t;
    }
};

struct PathNoise {
    PathStream stream;
    double sign;

    PathNoise(const SimConfig& cfg, std::size_t path)
        : stream(cfg.seed, cfg.antithetic ? path / 2 : path), sign(cfg.antithetic && path % 2 == 1 ? -1.0 : 1.0) {}

    double dW(const StepTable& tab, std::size_t k) const {
        return sign * std::sqrt(tab.dt) * stream.normal(static_cast<std::uint32_t>(k));
    }

    /// sigma dW + sum_i phi_i (dN_i - nu_i dt); optionally records counts.
    template <class OnJump>
    double eta(const StepTable& tab, std::size_t k, OnJump&& on_jump) const {
        double e = tab.sigma[k] * dW(tab, k);
        for (std::size_t a = 0; a < tab.atoms; ++a) {
            const unsigned c = stream.poisson(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(a), tab.nu_dt[a]);
            if (c > 0) on_jump(a, c);
            e += tab.phi[k * tab.atoms + a] * (static_cast<double>(c) - tab.nu_dt[a]);
        }
        return e;
    }
    double eta(const StepTable& tab, std::size_t k) const {
        return eta(tab, k, [](std::size_t, unsigned) {});
    }
};

inline double euler(const StepTable& tab, std::size_t k, double x, double u, double eta) {
    return x + tab.r0[k] * x * tab.dt + u * (tab.rho[k] * tab.dt + eta);
}

std::size_t snap_epsilon(double epsilon, double dt, std::size_t n_steps) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("spike length must be positive");
    const auto m = static_cast<std::size_t>(std::llround(epsilon / dt));
    if (m > n_steps || epsilon > dt * static_cast<double>(n_steps) * (1.0 + 1e-12))
        throw std::invalid_argument("spike length exceeds the remaining horizon");
    return std::max<std::size_t>(m, 1);
}

// Per-unit sums of X(T) and X(T)^2 for the twin and for each spiked primary.
struct SpikeMoments {
    std::vector<double> z1, z2;
    std::vector<std::vector<double>> x1, x2;
};

SpikeMoments run_spikes(const MarketParams& params, const LinearStrategy& strategy, double t, double y,
                        const std::vector<double>& vs, const std::vector<std::size_t>& steps, const SimConfig& cfg) {
    const StepTable tab(params, strategy, t, cfg.n_steps);
    const std::size_t K = vs.size();
    const std::size_t units = cfg.units();
    const std::size_t per_unit = cfg.antithetic ? 2 : 1;
    SpikeMoments out;
    out.z1.assign(units, 0.0);
    out.z2.assign(units, 0.0);
    out.x1.assign(K, std::vector<double>(units, 0.0));
    out.x2.assign(K, std::vector<double>(units, 0.0));
    parallel_for(units, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(K);
        for (std::size_t u = begin; u < end; ++u) {
            for (std::size_t m = 0; m < per_unit; ++m) {
                const std::size_t path = u * per_unit + m;
                const PathNoise noise(cfg, path);
                double z = y;
                std::fill(x.begin(), x.end(), y);
                for (std::size_t k = 0; k < tab.n; ++k) {
                    const double eta = noise.eta(tab, k);
                    const double uz = tab.alpha[k] * z;
                    for (std::size_t j = 0; j < K; ++j) x[j] = euler(tab, k, x[j], k < steps[j] ? vs[j] : uz, eta);
                    z = euler(tab, k, z, uz, eta);
                }
                if (!std::isfinite(z)) throw SimulationError("non-finite wealth", path);
                const double w = 1.0 / static_cast<double>(per_unit);
                out.z1[u] += w * z;
                out.z2[u] += w * z * z;
                for (std::size_t j = 0; j < K; ++j) {
                    if (!std::isfinite(x[j])) throw SimulationError("non-finite wealth", path);
                    out.x1[j][u] += w * x[j];
                    out.x2[j][u] += w * x[j] * x[j];
                }
            }
        }
    });
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Plug-in cost and its per-unit influence values.
double cost_and_influence(const std::vector<double>& m1, const std::vector<double>& m2, double mu_y,
                          std::vector<double>& influence) {
    const double a = mean_of(m1);
    const double b = mean_of(m2);
    influence.resize(m1.size());
    for (std::size_t u = 0; u < m1.size(); ++u) influence[u] = 0.5 * m2[u] - (a + mu_y) * m1[u];
    return 0.5 * (b - a * a) - mu_y * a;
}

template <class Payoff>
McEstimate terminal_estimate(const MarketParams& params, const LinearStrategy& strategy, double s, double x,
                             double z, const SimConfig& cfg, Payoff payoff) {
    cfg.validate();
    params.check_time(s);
    const std::size_t units = cfg.units();
    if (s >= params.horizon() - 1e-14) return {payoff(x), 0.0, units};
    const StepTable tab(params, strategy, s, cfg.n_steps);
    const std::size_t per_unit = cfg.antithetic ? 2 : 1;
    std::vector<double> values(units, 0.0);
    parallel_for(units, [&](std::size_t begin, std::size_t end) {
        for (std::size_t u = begin; u < end; ++u) {
            for (std::size_t m = 0; m < per_unit; ++m) {
                const std::size_t path = u * per_unit + m;
                const PathNoise noise(cfg, path);
                double X = x, Z = z;
                for (std::size_t k = 0; k < tab.n; ++k) {
                    const double eta = noise.eta(tab, k);
                    const double uz = tab.alpha[k] * Z;
                    X = euler(tab, k, X, uz, eta);
                    Z = euler(tab, k, Z, uz, eta);
                }
                if (!std::isfinite(X) || !std::isfinite(Z)) throw SimulationError("non-finite wealth", path);
                values[u] += payoff(X) / static_cast<double>(per_unit);
            }
        }
    });
    return summarize(values);
}

}  // namespace

double PathBundle::brownian_increment(std::size_t p, std::size_t k) const noexcept {
    const PathStream stream(seed, antithetic ? p / 2 : p);
    const double sign = antithetic && p % 2 == 1 ? -1.0 : 1.0;
    return sign * std::sqrt(dt) * stream.normal(static_cast<std::uint32_t>(k));
}

unsigned PathBundle::jump_count(std::size_t p, std::size_t k, std::size_t atom) const noexcept {
    const PathStream stream(seed, antithetic ? p / 2 : p);
    return stream.poisson(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(atom), jump_means[atom]);
}

PathBundle simulate(const MarketParams& params, const LinearStrategy& strategy, double t0, double x_init,
                    double z_init, const SimConfig& cfg, bool paired) {
    cfg.validate();
    params.check_time(t0);
    if (!(t0 < params.horizon())) throw std::invalid_argument("simulation start must precede the horizon");
    const StepTable tab(params, strategy, t0, cfg.n_steps);
    PathBundle b;
    b.times = tab.times(t0, params.horizon());
    b.n_paths = cfg.n_paths;
    b.seed = cfg.seed;
    b.antithetic = cfg.antithetic;
    b.dt = tab.dt;
    b.jump_means = tab.nu_dt;
    const std::size_t nt = b.times.size();
    b.wealth.resize(cfg.n_paths * nt);
    if (paired) b.twin_wealth.resize(cfg.n_paths * nt);
    std::vector<std::vector<JumpEvent>> logs(cfg.n_paths);
    parallel_for(cfg.n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const PathNoise noise(cfg, p);
            double* X = &b.wealth[p * nt];
            double* Z = paired ? &b.twin_wealth[p * nt] : X;
            X[0] = x_init;
            Z[0] = paired ? z_init : x_init;
            for (std::size_t k = 0; k < tab.n; ++k) {
                const double eta = noise.eta(tab, k, [&](std::size_t a, unsigned c) { logs[p].push_back({p, k, a, c}); });
                const double uz = tab.alpha[k] * Z[k];
                if (paired) Z[k + 1] = euler(tab, k, Z[k], uz, eta);
                X[k + 1] = euler(tab, k, X[k], uz, eta);
            }
            if (!std::isfinite(X[tab.n]) || !std::isfinite(Z[tab.n])) throw SimulationError("non-finite wealth", p);
        }
    });
    for (auto& l : logs) b.jump_log.insert(b.jump_log.end(), l.begin(), l.end());
    return b;
}

McEstimate estimate_theta(const MarketParams& params, const LinearStrategy& strategy, double s, double x, double z,
                          const SimConfig& cfg) {
    return terminal_estimate(params, strategy, s, x, z, cfg, [](double X) { return 0.5 * X * X; });
}

McEstimate estimate_g(const MarketParams& params, const LinearStrategy& strategy, double s, double x, double z,
                      const SimConfig& cfg) {
    return terminal_estimate(params, strategy, s, x, z, cfg, [](double X) { return X; });
}

McEstimate evaluate_cost(const MarketParams& params, const LinearStrategy& strategy, double t, double y,
                         const SimConfig& cfg, std::optional<SpikeRule> spike) {
    cfg.validate();
    params.check_time(t);
    if (!(t < params.horizon())) throw std::invalid_argument("cost evaluation needs t < T");
    std::vector<double> vs;
    std::vector<std::size_t> steps;
    if (spike) {
        const double dt = (params.horizon() - t) / static_cast<double>(cfg.n_steps);
        vs.push_back(spike->v);
        steps.push_back(snap_epsilon(spike->epsilon, dt, cfg.n_steps));
    }
    const SpikeMoments mom = run_spikes(params, strategy, t, y, vs, steps, cfg);
    std::vector<double> influence;
    const double mu_y = params.mu() * y;
    const double J = spike ? cost_and_influence(mom.x1[0], mom.x2[0], mu_y, influence)
                           : cost_and_influence(mom.z1, mom.z2, mu_y, influence);
    McEstimate e = summarize(influence);
    e.mean = J;
    return e;
}

bool SpikeReport::one_sided(double k) const noexcept {
    for (const auto& q : quotients)
        if (q.quotient < -(k * q.std_error + std::abs(slope) * q.epsilon)) return false;
    return true;
}

double SpikeReport::min_z_score() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& q : quotients)
        if (q.std_error > 0.0) m = std::min(m, q.quotient / q.std_error);
    return m;
}

std::vector<SpikeReport> spike_variation_test(const MarketParams& params, const LinearStrategy& strategy, double t,
                                              double y, const std::vector<double>& vs,
                                              const std::vector<double>& epsilons, const SimConfig& cfg,
                                              const FieldSource* fields) {
    cfg.validate();
    params.check_time(t);
    if (!(t < params.horizon())) throw std::invalid_argument("spike test needs t < T");
    if (epsilons.empty()) throw std::invalid_argument("spike test needs at least one epsilon");
    const double dt = (params.horizon() - t) / static_cast<double>(cfg.n_steps);
    std::vector<std::size_t> eps_steps;
    for (double e : epsilons) {
        if (!(e > 0.0 && e < params.horizon() - t)) throw std::invalid_argument("epsilon must lie in (0, T - t)");
        eps_steps.push_back(snap_epsilon(e, dt, cfg.n_steps));
    }

    std::vector<double> all_v;
    std::vector<std::size_t> all_steps;
    for (double v : vs)
        for (std::size_t m : eps_steps) {
            all_v.push_back(v);
            all_steps.push_back(m);
        }
    const SpikeMoments mom = run_spikes(params, strategy, t, y, all_v, all_steps, cfg);

    const double mu_y = params.mu() * y;
    std::vector<double> infl_z, infl_x;
    const double J0 = cost_and_influence(mom.z1, mom.z2, mu_y, infl_z);
    const std::size_t units = mom.z1.size();
    const double u_hat = strategy(t, y);
    const std::size_t ne = epsilons.size();

    std::vector<SpikeReport> reports;
    for (std::size_t iv = 0; iv < vs.size(); ++iv) {
        SpikeReport r;
        r.t = t;
        r.y = y;
        r.v = vs[iv];
        r.u_hat = u_hat;
        std::vector<std::vector<double>> unit_q(ne, std::vector<double>(units));
        for (std::size_t ie = 0; ie < ne; ++ie) {
            const std::size_t j = iv * ne + ie;
            const double Jx = cost_and_influence(mom.x1[j], mom.x2[j], mu_y, infl_x);
            const double eps = dt * static_cast<double>(eps_steps[ie]);
            for (std::size_t u = 0; u < units; ++u) unit_q[ie][u] = (infl_x[u] - infl_z[u]) / eps;
            SpikeQuotient q;
            q.epsilon_requested = epsilons[ie];
            q.epsilon = eps;
            q.quotient = (Jx - J0) / eps;
            q.std_error = summarize(unit_q[ie]).std_error;
            r.quotients.push_back(q);
        }
        if (ne == 1) {
            r.limit = r.quotients[0].quotient;
            r.limit_se = r.quotients[0].std_error;
        } else {
            double ebar = 0.0;
            for (const auto& q : r.quotients) ebar += q.epsilon;
            ebar /= static_cast<double>(ne);
            double sxx = 0.0, sxy = 0.0;
            for (const auto& q : r.quotients) {
                sxx += (q.epsilon - ebar) * (q.epsilon - ebar);
                sxy += (q.epsilon - ebar) * q.quotient;
            }
            if (sxx > 0.0) {
                r.slope = sxy / sxx;
                std::vector<double> w(ne);
                for (std::size_t ie = 0; ie < ne; ++ie)
                    w[ie] = 1.0 / static_cast<double>(ne) - ebar * (r.quotients[ie].epsilon - ebar) / sxx;
                std::vector<double> unit_l(units, 0.0);
                for (std::size_t ie = 0; ie < ne; ++ie) {
                    r.limit += w[ie] * r.quotients[ie].quotient;
                    for (std::size_t u = 0; u < units; ++u) unit_l[u] += w[ie] * unit_q[ie][u];
                }
                r.limit_se = summarize(unit_l).std_error;
            } else {
                r.limit = r.quotients[0].quotient;
                r.limit_se = r.quotients[0].std_error;
            }
        }
        r.h_gap = fields ? h_function(params, *fields, strategy, t, y, t, y, y, r.v) -
                               h_function(params, *fields, strategy, t, y, t, y, y, u_hat)
                         : std::numeric_limits<double>::quiet_NaN();
        reports.push_back(std::move(r));
    }
    return reports;
}

SpikeReport spike_variation_test(const MarketParams& params, const LinearStrategy& strategy, double t, double y,
                                 double v, const std::vector<double>& epsilons, const SimConfig& cfg,
                                 const FieldSource* fields) {
    return spike_variation_test(params, strategy, t, y, std::vector<double>{v}, epsilons, cfg, fields).front();
}

}  // namespace eqpide
