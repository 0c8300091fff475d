#pragma once

// Batch commands behind the CLI. Each writes its CSV outputs into
// cfg.output_dir and returns whether every check passed; infrastructure and
// solver failures propagate as exceptions.

#include "eqpide/config.hpp"

#include <ostream>
#include <string>

namespace eqpide {

enum class CommandStatus { ok, checks_failed };

/// closed_form.csv, ode.csv, pide_theta.csv/.bin, pide_g.csv/.bin,
/// policy_trace.csv, policy_alpha.csv.
CommandStatus cmd_solve(const RunConfig& cfg, std::ostream& log);

/// verify_report.csv with one row per check.
CommandStatus cmd_verify(const RunConfig& cfg, std::ostream& log);

/// compare.csv: cost of the equilibrium and of alternative rules at (0, x0).
CommandStatus cmd_compare(const RunConfig& cfg, std::ostream& log);

/// Printed in compare.csv's header.
inline constexpr const char* kCompareCaveat =
    "The equilibrium strategy is time-consistent, not a pre-commitment optimum: "
    "other rules may show a lower cost at time 0.";

}  // namespace eqpide
