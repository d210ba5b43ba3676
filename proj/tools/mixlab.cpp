#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mixlab/mixlab.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mixlab: mixing and enhanced-dissipation experiments for 2D Hamiltonian flows"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    int workers = 0;

    auto* run = app.add_subcommand("run", "run the experiment named in a config file");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--output-dir", output_dir, "override the config's output_dir");
    run->add_option("--workers", workers, "worker pool size (fallback: MIXLAB_WORKERS)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "validate a config file and exit");
    validate->add_option("config", validate_path, "experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            mixlab::ExperimentConfig cfg = mixlab::parse_config(validate_path);
            mixlab::validate_config(cfg);
            std::cout << "ok: " << cfg.get_str("experiment") << "\n";
            return 0;
        }
        mixlab::ExperimentConfig cfg = mixlab::parse_config(config_path);
        if (workers <= 0) {
            if (const char* env = std::getenv("MIXLAB_WORKERS")) workers = std::atoi(env);
        }
        if (workers <= 0) workers = (int)cfg.get_int("workers", 1);
        std::string dir = !output_dir.empty()
                              ? output_dir
                              : cfg.get_str("output_dir", "out-" + cfg.get_str("experiment"));
        int status = mixlab::run_experiment(cfg, dir, workers);
        if (status == 0)
            std::cout << "wrote artifacts to " << dir << "\n";
        else
            std::cerr << "failed (status " << status << "); see " << dir << "/error.json\n";
        return status;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
