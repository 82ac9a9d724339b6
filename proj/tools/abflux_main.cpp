#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abflux/errors.hpp"
#include "abflux/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"abflux: broken rays, gauge holonomy and Schrodinger boundary data"};
    app.require_subcommand(1);

    std::string config_arg, out_dir = "abflux-out";
    std::vector<std::string> overrides;
    bool no_timings = false;

    CLI::App* run = app.add_subcommand("run", "Run a scenario (file path or built-in name)");
    run->add_option("config", config_arg, "Config file or built-in scenario name")->required();
    run->add_option("--set", overrides, "Override a config key, e.g. --set params.tolerance=1e-6");
    run->add_option("--out", out_dir, "Output directory for report.json and CSV tables");
    run->add_flag("--no-timings", no_timings, "Omit wall-clock timings from the report");

    std::string validate_arg;
    CLI::App* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", validate_arg, "Config file or built-in scenario name")
        ->required();

    CLI::App* list = app.add_subcommand("list-scenarios", "List built-in scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& [name, cfg] : abflux::builtin_scenarios())
                std::printf("%-26s %s\n", name.c_str(),
                            cfg.at("task").get<std::string>().c_str());
            return 0;
        }
        if (validate->parsed()) {
            const abflux::Json cfg = abflux::resolve_scenario(validate_arg);
            const auto diags = abflux::validate_config(cfg);
            bool any_error = false;
            for (const auto& d : diags) {
                const bool err = d.level == abflux::Diagnostic::Level::Error;
                any_error = any_error || err;
                std::printf("%s  %s: %s\n", err ? "ERROR" : "WARN ", d.path.c_str(),
                            d.message.c_str());
            }
            if (diags.empty()) std::printf("OK  %s\n", validate_arg.c_str());
            return any_error ? 1 : 0;
        }
        abflux::Json cfg = abflux::resolve_scenario(config_arg);
        for (const std::string& kv : overrides) abflux::apply_override(cfg, kv);
        return abflux::run_scenario(cfg, out_dir, !no_timings).exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
