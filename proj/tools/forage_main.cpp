#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forage/config.hpp"
#include "forage/errors.hpp"
#include "forage/pipeline.hpp"
#include "forage/version.hpp"

namespace {

struct Cli {
    std::string config_path;
    // Raw override values; only the ones the user passed are applied, so the
    // config file keeps authority over untouched fields.
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_override_flags(CLI::App* cmd, Cli& cli) {
    cmd->add_option("--config", cli.config_path, "Run configuration file")->required();
    static const std::vector<std::pair<const char*, const char*>> flags = {
        {"--temperature", "Softmax temperature T"},
        {"--steps", "Steps per walk"},
        {"--walks", "Number of walks"},
        {"--seed", "Master seed"},
        {"--sampler", "random_walk | metropolis_hastings"},
        {"--proposal", "uniform | softmax"},
        {"--lambda", "Profitability decay in (0, 1]"},
        {"--window", "Switch-profile radius R"},
    };
    for (const auto& [flag, help] : flags) {
        const std::string key = std::string(flag).substr(2);
        cmd->add_option_function<std::string>(
            flag, [&cli, key](const std::string& value) { cli.overrides.emplace_back(key, value); },
            help);
    }
}

forage::RunConfig make_config(const Cli& cli) {
    forage::RunConfig cfg = forage::load_run_config(cli.config_path);
    for (const auto& [key, value] : cli.overrides) {
        forage::apply_config_entry(cfg, key, value);
    }
    forage::validate_run_config(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic-fluency foraging simulation toolkit"};
    app.set_version_flag("--version", forage::kVersion);
    app.require_subcommand(1);

    Cli cli;
    const std::vector<std::pair<const char*, std::function<void(const forage::RunConfig&)>>>
        commands = {
            {"embed", forage::cmd_embed},     {"simulate", forage::cmd_simulate},
            {"analyze", forage::cmd_analyze}, {"project", forage::cmd_project},
            {"report", forage::cmd_report},
        };
    for (const auto& [name, fn] : commands) {
        auto* cmd = app.add_subcommand(name, std::string("Run the ") + name + " stage");
        add_override_flags(cmd, cli);
        cmd->callback([&cli, fn = fn]() { fn(make_config(cli)); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints usage or help text
        return code == 0 ? 0 : 1;      // bad usage is a validation failure
    } catch (const forage::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
