#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "smm/errors.hpp"
#include "smm/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stable multi-matching on one-dimensional Poisson points"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    for (const char* name : {"simulate", "oracle-check", "event", "chain", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (key = value lines)")->required();
        sub->add_option("--seed", seed, "overrides the seed key");
        sub->add_option("--out", out, "overrides the output.path key");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? smm::exit_ok : smm::exit_config;
    }
    const auto command = smm::parse_command(app.get_subcommands().front()->get_name());

    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "config error: cannot read " << config_path << '\n';
        return smm::exit_config;
    }
    const std::string text{std::istreambuf_iterator<char>(in), {}};

    smm::RawConfig overrides;
    if (seed) overrides["seed"] = {std::to_string(*seed), 0};
    if (out) overrides["output.path"] = {*out, 0};
    try {
        const auto config = smm::parse_config(text, *command, overrides);
        return smm::run(config, std::cout, std::cerr);
    } catch (const smm::ConfigError& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
        return smm::exit_config;
    }
}
