#include "eqpide/commands.hpp"

#include "eqpide/adjoint_bridge.hpp"
#include "eqpide/closed_form.hpp"
#include "eqpide/fields.hpp"
#include "eqpide/io.hpp"
#include "eqpide/monte_carlo.hpp"
#include "eqpide/ode_system.hpp"
#include "eqpide/pide_solver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

namespace eqpide {

namespace fs = std::filesystem;

namespace {

fs::path prepare_output(const RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

bool on_stride(std::size_t k, std::size_t last, std::size_t stride) { return k % stride == 0 || k == last; }

const std::vector<std::string> kFunctionColumns{"t", "N1", "N2", "M1", "M2", "M3", "alpha"};

void write_pide_csv(const fs::path& path, const RunConfig& cfg, const PideSolution& sol, bool theta) {
    const StateGrid2D& g = sol.grid();
    CsvWriter csv(path, cfg.config_hash, {"t", "x", "z", theta ? "theta" : "g"});
    for (std::size_t k = 0; k <= g.n_time; ++k) {
        if (!on_stride(k, g.n_time, cfg.csv_time_stride)) continue;
        for (std::size_t i = 0; i < g.n_space; ++i)
            for (std::size_t j = 0; j < g.n_space; ++j) {
                csv << g.time(k) << g.node(i) << g.node(j) << (theta ? sol.theta(k, i, j) : sol.g(k, i, j));
                csv.end_row();
            }
    }
}

struct Check {
    std::string group;
    std::string identity;
    double tolerance;
    double measured;
    bool pass;
};

std::string label(const char* prefix, double v) {
    std::ostringstream ss;
    ss << prefix << format_number(v);
    return ss.str();
}

double sup_norm(const CoefficientFn& f) {
    double m = 0.0;
    for (double v : f.samples()) m = std::max(m, std::abs(v));
    return m;
}

LinearStrategy candidate_strategy(const RunConfig& cfg, const ClosedFormSolution& cf) {
    if (!cfg.verify.strategy_file.empty()) return load_strategy_csv(cfg.verify.strategy_file, cfg.market.horizon);
    return cf.strategy().scaled(cfg.verify.strategy_scale);
}

}  // namespace

CommandStatus cmd_solve(const RunConfig& cfg, std::ostream& log) {
    const MarketParams params(cfg.market);
    const fs::path dir = prepare_output(cfg);

    const ClosedFormSolution cf = solve_closed_form(params, cfg.quad_steps);
    {
        CsvWriter csv(dir / "closed_form.csv", cfg.config_hash, kFunctionColumns);
        const std::size_t last = cf.nodes() - 1;
        for (std::size_t k = 0; k <= last; ++k) {
            if (!on_stride(k, last, cfg.csv_time_stride)) continue;
            csv << cf.N1.node(k) << cf.N1.samples()[k] << cf.N2.samples()[k] << cf.M1.samples()[k]
                << cf.M2.samples()[k] << cf.M3.samples()[k] << cf.alpha_star.samples()[k];
            csv.end_row();
        }
    }
    log << "closed form: alpha*(0) = " << format_number(cf.alpha_star(0.0)) << "\n";

    const OdeSolution ode = integrate_backward(params, cfg.ode_steps);
    {
        CsvWriter csv(dir / "ode.csv", cfg.config_hash, kFunctionColumns);
        const std::size_t last = ode.size() - 1;
        for (std::size_t k = 0; k <= last; ++k) {
            if (!on_stride(k, last, cfg.csv_time_stride)) continue;
            csv << ode.grid[k] << ode.N1[k] << ode.N2[k] << ode.M1[k] << ode.M2[k] << ode.M3[k] << ode.alpha[k];
            csv.end_row();
        }
    }
    log << "ode: alpha(0) = " << format_number(ode.alpha.front()) << "\n";

    std::vector<double> trace;
    std::optional<PolicyIterationResult> pi;
    try {
        pi.emplace(policy_iteration(params, cfg.grid, cfg.max_iters, cfg.policy_tol));
        trace = pi->trace;
    } catch (const NonConvergence& e) {
        CsvWriter csv(dir / "policy_trace.csv", cfg.config_hash, {"iteration", "sup_distance"});
        for (std::size_t i = 0; i < e.trace().size(); ++i) {
            csv << i + 1 << e.trace()[i];
            csv.end_row();
        }
        throw;
    }
    {
        CsvWriter csv(dir / "policy_trace.csv", cfg.config_hash, {"iteration", "sup_distance"});
        for (std::size_t i = 0; i < trace.size(); ++i) {
            csv << i + 1 << trace[i];
            csv.end_row();
        }
    }
    {
        CsvWriter csv(dir / "policy_alpha.csv", cfg.config_hash, {"t", "alpha_policy_iteration", "alpha_closed_form"});
        for (std::size_t k = 0; k <= cfg.grid.n_time; ++k) {
            const double s = cfg.grid.time(k);
            csv << s << pi->strategy.coefficient(s) << cf.alpha_star(s);
            csv.end_row();
        }
    }
    write_pide_csv(dir / "pide_theta.csv", cfg, pi->solution, true);
    write_pide_csv(dir / "pide_g.csv", cfg, pi->solution, false);
    write_field_binary(dir / "pide_theta.bin", pi->solution, true);
    write_field_binary(dir / "pide_g.bin", pi->solution, false);
    log << "policy iteration: " << trace.size() << " iteration(s), alpha(0) = "
        << format_number(pi->strategy.coefficient(0.0)) << "\n";
    return CommandStatus::ok;
}

CommandStatus cmd_verify(const RunConfig& cfg, std::ostream& log) {
    const MarketParams params(cfg.market);
    const fs::path dir = prepare_output(cfg);
    const VerifySettings& v = cfg.verify;
    std::vector<Check> checks;
    auto add = [&](std::string group, std::string identity, double tol, double measured, bool pass) {
        log << (pass ? "pass " : "FAIL ") << group << " " << identity << " measured=" << format_number(measured)
            << " tolerance=" << format_number(tol) << "\n";
        checks.push_back({std::move(group), std::move(identity), tol, measured, pass});
    };

    const ClosedFormSolution cf = solve_closed_form(params, cfg.quad_steps);
    const AnsatzFields ansatz(cf);
    const LinearStrategy eq = cf.strategy();

    const IdentityDeviation dev = check_identities(cf);
    add("closed_form", "max|M1-N1^2|", v.identity_tol, dev.m1_vs_n1sq, dev.m1_vs_n1sq <= v.identity_tol);
    add("closed_form", "max|M3-N1*N2|", v.identity_tol, dev.m3_vs_n1n2, dev.m3_vs_n1n2 <= v.identity_tol);

    const OdeSolution ode = integrate_backward(params, cfg.ode_steps);
    {
        const std::vector<std::pair<const char*, std::pair<const std::vector<double>*, const CoefficientFn*>>> fns{
            {"N1", {&ode.N1, &cf.N1}}, {"N2", {&ode.N2, &cf.N2}}, {"M1", {&ode.M1, &cf.M1}},
            {"M2", {&ode.M2, &cf.M2}}, {"M3", {&ode.M3, &cf.M3}}};
        for (const auto& [name, pair] : fns) {
            const double scale = sup_norm(*pair.second);
            double err = 0.0;
            for (std::size_t k = 0; k < ode.size(); ++k)
                err = std::max(err, std::abs((*pair.first)[k] - (*pair.second)(ode.grid[k])));
            const double rel = scale > 0.0 ? err / scale : err;
            add("ode_vs_closed_form", std::string("relative sup error ") + name, v.ode_tol, rel, rel <= v.ode_tol);
        }
    }

    {
        const PideSolution sol = policy_evaluation(params, eq, cfg.grid);
        const AnsatzError e = ansatz_error(sol, ansatz);
        add("pide_ansatz", "relative error theta (interior third)", v.pide_tol, e.theta, e.theta <= v.pide_tol);
        add("pide_ansatz", "relative error g (interior third)", v.pide_tol, e.g, e.g <= v.pide_tol);
    }

    {
        const PolicyIterationResult pi = policy_iteration(params, cfg.grid, cfg.max_iters, cfg.policy_tol);
        double dist = 0.0;
        for (std::size_t k = 0; k <= cfg.grid.n_time; ++k) {
            const double s = cfg.grid.time(k);
            dist = std::max(dist, std::abs(pi.strategy.coefficient(s) - cf.alpha_star(s)));
        }
        add("policy_iteration", "iterations", static_cast<double>(cfg.max_iters), static_cast<double>(pi.trace.size()),
            pi.trace.size() <= cfg.max_iters);
        add("policy_iteration", "sup_s|alpha-alpha*|", v.policy_tol, dist, dist <= v.policy_tol);
    }

    {
        const double x = params.x0();
        const ClosedFormValues c0 = evaluate(cf, 0.0);
        const double theta_exact = (0.5 * c0.M1 + 0.5 * c0.M2 + c0.M3) * x * x;
        const double g_exact = (c0.N1 + c0.N2) * x;
        const McEstimate th = estimate_theta(params, eq, 0.0, x, x, cfg.mc);
        const McEstimate gg = estimate_g(params, eq, 0.0, x, x, cfg.mc);
        auto zscore = [](double diff, double se) { return se > 0.0 ? std::abs(diff) / se : (diff == 0.0 ? 0.0 : INFINITY); };
        const double zt = zscore(th.mean - theta_exact, th.std_error);
        const double zg = zscore(gg.mean - g_exact, gg.std_error);
        add("feynman_kac", "|theta_mc - theta|/SE at (0,x0,x0)", v.k_se, zt, zt <= v.k_se);
        add("feynman_kac", "|g_mc - g|/SE at (0,x0,x0)", v.k_se, zg, zg <= v.k_se);
    }

    {
        const LinearStrategy cand = candidate_strategy(cfg, cf);
        SimConfig sc{v.spike_paths, v.spike_steps, cfg.mc.seed, true};
        for (double t : v.times) {
            std::vector<double> vs;
            const double u_hat = cand(t, v.y);
            for (double off : v.offsets) vs.push_back(u_hat + off);
            const auto reports = spike_variation_test(params, cand, t, v.y, vs, v.epsilons, sc, &ansatz);
            for (std::size_t i = 0; i < reports.size(); ++i) {
                const SpikeReport& r = reports[i];
                double margin = INFINITY;
                for (const auto& q : r.quotients)
                    margin = std::min(margin, q.quotient + v.k_se * q.std_error + std::abs(r.slope) * q.epsilon);
                const std::string where = label("t=", t) + label(" v-u=", v.offsets[i]);
                add("spike_variation", "min quotient margin " + where, 0.0, margin, margin >= 0.0);
                const double z = r.limit_se > 0.0 ? std::abs(r.limit - r.h_gap) / r.limit_se : 0.0;
                add("spike_variation", "|limit-H_gap|/SE " + where, v.k_se, z, z <= v.k_se);
            }
        }
    }

    {
        const double y = v.y;
        const SimConfig big{v.terminal_paths, v.adjoint_steps, cfg.mc.seed + 1, false};
        const McEstimate eT = estimate_g(params, eq, 0.0, y, y, big);
        const SimConfig sc{v.adjoint_paths, v.adjoint_steps, cfg.mc.seed + 2, true};
        const PathBundle bundle = simulate(params, eq, 0.0, y, y, sc, true);
        const AdjointProcesses adj = build_adjoints(params, ansatz, eq, bundle, 0.0, eT.mean);
        for (const auto& r : bsde_residual(params, adj, bundle, v.adjoint_intervals, v.k_se)) {
            const double allowance = v.k_se * r.residual.std_error + r.bias_budget;
            add("adjoint_bsde", r.identity + label(" [", r.start) + label("..", r.end) + "]", allowance,
                std::abs(r.residual.mean), r.pass);
        }
        const HbarReport h = hbar_min_check(params, adj, eq, default_u_grid(v.u_lower, v.u_upper, v.u_points));
        add("adjoint_hbar", "|argmin H-bar - alpha*(0) y|", h.cell, std::abs(h.argmin - h.target), h.pass);
    }

    if (params.jumps().empty()) {
        double worst = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            const double s = params.horizon() * static_cast<double>(i) / 20.0;
            const double ref = no_jump_reference_coefficient(params, s);
            const double got = equilibrium_coefficient(cf, params, s);
            const double rel = ref != 0.0 ? std::abs(got - ref) / std::abs(ref) : std::abs(got);
            worst = std::max(worst, rel);
        }
        add("no_jump_reduction", "max relative error at 20 times", v.identity_tol, worst, worst <= v.identity_tol);
    }

    bool all = true;
    {
        CsvWriter csv(dir / "verify_report.csv", cfg.config_hash, {"check", "identity", "tolerance", "measured", "pass"});
        for (const auto& c : checks) {
            csv << c.group << c.identity << c.tolerance << c.measured << c.pass;
            csv.end_row();
            all = all && c.pass;
        }
    }
    return all ? CommandStatus::ok : CommandStatus::checks_failed;
}

CommandStatus cmd_compare(const RunConfig& cfg, std::ostream& log) {
    const MarketParams params(cfg.market);
    const fs::path dir = prepare_output(cfg);
    const ClosedFormSolution cf = solve_closed_form(params, cfg.quad_steps);
    const double T = params.horizon();
    const double x0 = params.x0();
    const std::vector<std::pair<std::string, LinearStrategy>> rules{
        {"equilibrium", cf.strategy()},
        {"zero", LinearStrategy::zero(T)},
        {"constant_alpha*(0)", LinearStrategy::constant(cf.alpha_star(0.0), T)},
        {"constant_0.5", LinearStrategy::constant(0.5, T)},
        {"constant_1", LinearStrategy::constant(1.0, T)},
        {"equilibrium_x0.5", cf.strategy().scaled(0.5)},
        {"equilibrium_x1.5", cf.strategy().scaled(1.5)},
    };
    CsvWriter csv(dir / "compare.csv", cfg.config_hash, {"strategy", "J", "std_error", "n_paths", "seed"},
                  {kCompareCaveat});
    csv << "equilibrium_closed_form" << equilibrium_objective(cf, params, 0.0, x0) << 0.0 << std::size_t{0}
        << std::size_t{0};
    csv.end_row();
    for (const auto& [name, rule] : rules) {
        const McEstimate e = evaluate_cost(params, rule, 0.0, x0, cfg.mc);
        csv << name << e.mean << e.std_error << cfg.mc.n_paths << static_cast<std::size_t>(cfg.mc.seed);
        csv.end_row();
        log << name << ": J = " << format_number(e.mean) << " +- " << format_number(e.std_error) << "\n";
    }
    return CommandStatus::ok;
}

}  // namespace eqpide
