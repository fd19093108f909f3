#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dampwave/commands.hpp"
#include "dampwave/errors.hpp"

int main(int argc, char** argv)
{
    using namespace dampwave;

    CLI::App app{"Traveling waves of damped wave equations: simulation, freezing and spectra"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file (defaults apply when omitted)");
        sub->add_option("--out", out_dir, "output directory, overrides output.dir");
        sub->add_option("--override", overrides, "section.key=value, repeatable")->allow_extra_args(false);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        for (const auto& o : overrides) apply_override(cfg, o);
        if (!out_dir.empty()) cfg.output.dir = out_dir;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return run_command(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
