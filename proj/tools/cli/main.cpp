#include "commands.hpp"

#include "modalforge/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace modalforge;

struct Invocation {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate-assisted design of single-degree-of-freedom oscillators", "modal-forge"};
    app.set_version_flag("--version", std::string(cli::kToolVersion));
    app.require_subcommand(1);

    Invocation inv;
    using Command = void (*)(const cli::RunConfig&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Command>> commands{
        {"simulate", "Integrate one system and write its time history", cli::cmd_simulate},
        {"sweep", "Sample the parameter space and write the peak-displacement dataset", cli::cmd_sweep},
        {"train", "Fit the graph surrogate to the dataset", cli::cmd_train},
        {"evaluate", "Report surrogate metrics on both dataset splits", cli::cmd_evaluate},
        {"optimize", "Run the genetic algorithm and write the best parameters", cli::cmd_optimize},
        {"validate", "Check the optimum against the Newmark solver",
         [](const cli::RunConfig& c, std::ostream& o) { (void)cli::cmd_validate(c, o); }},
    };
    std::vector<std::pair<CLI::App*, Command>> subs;
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", inv.config, "TOML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", inv.seed, "Override every seed in the configuration");
        sub->add_option("--out", inv.out, "Override the output directory");
        subs.emplace_back(sub, fn);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        cli::Overrides overrides;
        overrides.seed = inv.seed;
        if (inv.out) overrides.output_dir = *inv.out;
        const auto config = cli::load_run_config(inv.config, overrides);
        for (const auto& [sub, fn] : subs) {
            if (sub->parsed()) fn(config, std::cout);
        }
    } catch (const Error& e) {
        std::cerr << "modal-forge: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return cli::exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "modal-forge: data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "modal-forge: error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
