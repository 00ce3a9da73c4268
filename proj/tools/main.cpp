#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Eulerian bounded-confidence opinion dynamics toolkit"};
    app.require_subcommand(1);

    std::string config;
    std::string out = ".";
    unsigned jobs = 1;
    bool verbose = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (OPINIONDRIFT_OUT overrides)");
        sub->add_flag("--verbose", verbose, "chatty progress output");
    };

    CLI::App* sim = app.add_subcommand("simulate", "run one trajectory");
    add_common(sim);
    CLI::App* attr =
        app.add_subcommand("attraction-range", "estimate the basin of a constant input");
    add_common(attr);
    CLI::App* sweep =
        app.add_subcommand("sweep", "attraction-range sweep over (sigma, r) with a linear fit");
    add_common(sweep);
    sweep->add_option("--jobs", jobs, "concurrent sweep workers")->check(CLI::PositiveNumber);
    CLI::App* compare =
        app.add_subcommand("compare", "score direct vs distracting input strategies");
    add_common(compare);
    CLI::App* oracle =
        app.add_subcommand("oracle-check", "cross-check against the agent-based engine");
    add_common(oracle);

    CLI11_PARSE(app, argc, argv);

    const std::string out_dir = opiniondrift::cli::resolve_out_dir(out);
    if (sim->parsed()) return opiniondrift::cli::cmd_simulate(config, out_dir, verbose);
    if (attr->parsed()) {
        return opiniondrift::cli::cmd_attraction_range(config, out_dir, verbose);
    }
    if (sweep->parsed()) {
        return opiniondrift::cli::cmd_sweep(config, out_dir, jobs, verbose);
    }
    if (compare->parsed()) return opiniondrift::cli::cmd_compare(config, out_dir, verbose);
    if (oracle->parsed()) {
        return opiniondrift::cli::cmd_oracle_check(config, out_dir, verbose);
    }
    return 1;
}
