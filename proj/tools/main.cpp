#include <CLI11.hpp>

#include "crossdiff/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"finite-volume simulator for a two-population cross-diffusion system"};

    crossdiff::CliOptions opts;
    app.add_option("--config", opts.config_path, "JSON config file");
    app.add_option("--out", opts.out_override, "output directory override");
    app.add_option("--study", opts.study_override,
                   "study selector override (none|pme|epsilon|segregation|asymmetric)");
    app.add_option("--workers", opts.workers, "study fan-out bound")->check(CLI::PositiveNumber);
    app.add_flag("--verbose", opts.verbose, "progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return crossdiff::kExitUsage;
    }

    return crossdiff::run_cli(opts);
}
