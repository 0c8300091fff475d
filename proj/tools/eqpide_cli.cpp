#include "eqpide/eqpide.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

int exit_code(eqpide_status s) {
    switch (s) {
        case EQPIDE_OK: return 0;
        case EQPIDE_VERIFY_FAILED: return 1;
        case EQPIDE_ERR_CONFIG: return 2;
        default: return 3;
    }
}

int report(eqpide_status s) {
    if (s != EQPIDE_OK) std::cerr << "eqpide: " << eqpide_last_error() << "\n";
    return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium strategies for mean-variance control under jump-diffusions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(eqpide_version()));

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;

    for (const char* name : {"solve", "verify", "compare"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--set", overrides, "Override one key, section.key=value (repeatable)");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--seed", seed, "Monte Carlo seed");
    }
    app.get_subcommand("solve")->description("Closed form, ODE, PIDE fields and policy iteration");
    app.get_subcommand("verify")->description("Run every check and write verify_report.csv");
    app.get_subcommand("compare")->description("Cost of the equilibrium against alternative rules");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    eqpide_config* cfg = nullptr;
    if (auto s = eqpide_config_load(config_path.c_str(), &cfg); s != EQPIDE_OK) return report(s);

    auto apply = [&](const std::string& assignment) {
        const eqpide_status s = eqpide_config_set(cfg, assignment.c_str());
        if (s != EQPIDE_OK) {
            report(s);
            eqpide_config_free(cfg);
            std::exit(exit_code(s));
        }
    };
    for (const auto& o : overrides) apply(o);
    if (seed) apply("mc.seed=" + std::to_string(*seed));
    if (out_dir) apply("output.dir=" + *out_dir);

    const std::string cmd = app.get_subcommands().front()->get_name();
    eqpide_status s = EQPIDE_OK;
    if (cmd == "solve")
        s = eqpide_cmd_solve(cfg, nullptr);
    else if (cmd == "verify")
        s = eqpide_cmd_verify(cfg, nullptr);
    else
        s = eqpide_cmd_compare(cfg, nullptr);
    eqpide_config_free(cfg);
    return report(s);
}
