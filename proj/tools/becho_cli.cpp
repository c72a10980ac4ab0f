#include <CLI11.hpp>

#include <iostream>

#include "becho/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Boltzmann-echo simulator for coupled kicked rotators on the torus"};
    app.require_subcommand(1);

    becho::experiments::RunOverrides overrides;
    app.add_option("--workers", overrides.workers, "number of worker threads (0 = from config)");
    app.add_option("--output", overrides.output_dir, "output directory (overrides config)");
    app.add_flag("--full", overrides.full, "full-scale run (fig1_repro at N = 1024)");

    std::string run_config, estimate_config;
    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", run_config, "config file")->required();
    CLI::App* estimate = app.add_subcommand("estimate", "predict cost without running");
    estimate->add_option("config", estimate_config, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return becho::experiments::run_config_file(run_config, overrides, false, std::cout);
    return becho::experiments::run_config_file(estimate_config, overrides, true, std::cout);
}
