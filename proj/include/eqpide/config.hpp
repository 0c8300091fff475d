#pragma once

// Run configuration: a flat INI file with [market], [jumps], [grid], [ode],
// [closed_form], [mc], [verify] and [output] sections, plus command-line
// overrides of the form section.key=value.

#include "eqpide/core_model.hpp"
#include "eqpide/monte_carlo.hpp"
#include "eqpide/pide_solver.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eqpide {

/// Parse or validation failure. line/column are 1-based; 0 means the
/// problem is not tied to a position (a missing key, a bad override).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, std::size_t line, std::size_t column, const std::string& message);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct IniEntry {
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0;  // column of the value
    std::size_t key_column = 0;
};

struct IniDocument {
    std::string source;
    std::map<std::string, std::map<std::string, IniEntry>> sections;
    std::map<std::string, std::size_t> section_lines;
};

IniDocument parse_ini(std::string_view text, const std::string& source);

/// Applies "section.key=value"; creates the section or key if absent.
void apply_override(IniDocument& doc, std::string_view assignment);

struct VerifySettings {
    std::vector<double> times{0.0, 0.25, 0.5, 0.75};
    std::vector<double> offsets{-1.0, -0.5, 0.5, 1.0};
    std::vector<double> epsilons{0.04, 0.02, 0.01};
    double y = 1.0;
    /// Candidate strategy for the spike test: alpha* scaled, or read from a
    /// CSV of (t, alpha) rows when strategy_file is set.
    double strategy_scale = 1.0;
    std::string strategy_file;
    double k_se = 3.0;
    double identity_tol = 1e-8;
    double ode_tol = 1e-8;
    double pide_tol = 5e-3;
    double policy_tol = 5e-3;
    std::size_t spike_paths = 100000;
    std::size_t spike_steps = 500;
    std::size_t adjoint_paths = 100000;
    std::size_t adjoint_steps = 100;
    std::size_t adjoint_intervals = 4;
    std::size_t terminal_paths = 1000000;
    double u_lower = -2.0;
    double u_upper = 2.0;
    std::size_t u_points = 401;
};

struct RunConfig {
    MarketSpec market;
    StateGrid2D grid;
    std::size_t max_iters = 20;
    double policy_tol = 1e-3;
    std::size_t ode_steps = 10000;
    std::size_t quad_steps = 10000;
    SimConfig mc;
    VerifySettings verify;
    std::string output_dir = "out";
    std::size_t csv_time_stride = 10;
    /// FNV-1a 64 of the effective settings, excluding the output directory.
    std::string config_hash;
};

RunConfig build_config(const IniDocument& doc);
RunConfig parse_config(std::string_view text, const std::string& source,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

/// Reads (t, alpha) rows; '#' lines and a non-numeric header are skipped.
LinearStrategy load_strategy_csv(const std::string& path, double horizon);

}  // namespace eqpide
