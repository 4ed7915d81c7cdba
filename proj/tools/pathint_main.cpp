#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pathint/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pathint - pathwise stochastic integration experiment runner"};
    app.require_subcommand(1);

    pathint::RunOptions opts;
    std::string output_dir;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "run the experiment described by a JSON config");
    run->add_option("config", opts.config_path, "experiment config file")->required();
    run->add_option("--output-dir", output_dir, "write reports here instead of the configured directory");
    run->add_option("--threads", threads, "worker threads (results do not depend on this)");
    run->add_flag("--check", opts.check, "exit nonzero if the config's thresholds are violated");

    CLI11_PARSE(app, argc, argv);

    if (run->count("--output-dir") > 0) opts.output_dir = output_dir;
    if (run->count("--threads") > 0) opts.threads = threads;
    return pathint::run_experiment(opts, std::cout, std::cerr);
}
