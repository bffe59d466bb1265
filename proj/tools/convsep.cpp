#include "convsep/config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Weight sharing versus fully connected optimization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    for (const char* name : {"experiment", "verify", "estimate", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--out", out_dir, "Override the output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : convsep::kExitValidation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    std::optional<std::filesystem::path> out;
    if (out_dir) out = *out_dir;
    return convsep::run(config_path, convsep::command_from_string(command), seed, out, std::cout, std::cerr);
}
