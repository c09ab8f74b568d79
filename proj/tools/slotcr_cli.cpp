#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slotcr/cli/commands.hpp"
#include "slotcr/cli/scenario.hpp"
#include "slotcr/error.hpp"

int main(int argc, char** argv) {
    using namespace slotcr::cli;

    CLI::App app{"Slotted cognitive-radio link analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_path;
    std::vector<std::string> overrides;
    std::string seed, slots, mode, workers;
    app.add_option("--config", config_path, "YAML scenario file");
    app.add_option("--output", output_path, "CSV destination (stdout when omitted)");
    app.add_option("--seed", seed, "simulation seed");
    app.add_option("--slots", slots, "measured simulation slots");
    app.add_option("--mode", mode, "discretized|exact")->check(CLI::IsMember({"discretized", "exact"}));
    app.add_option("--workers", workers, "concurrent sweep points");
    app.add_option("--set", overrides, "override one parameter, section.key=value")->take_all();
    app.fallthrough();

    for (const auto& name : command_names()) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kSuccess : kConfigError;
    }

    try {
        FlatConfig config = config_path.empty() ? FlatConfig{} : load_config_file(config_path);
        for (const auto& o : overrides) apply_override(config, o);
        if (!seed.empty()) config["sim.seed"] = seed;
        if (!slots.empty()) config["sim.slots"] = slots;
        if (!mode.empty()) config["sim.mode"] = mode;
        if (!workers.empty()) config["sim.workers"] = workers;
        const Scenario scenario = Scenario::from_config(config);
        return run_to_path(app.get_subcommands().front()->get_name(), scenario, output_path, std::cerr);
    } catch (const slotcr::Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return kConfigError;
    }
}
