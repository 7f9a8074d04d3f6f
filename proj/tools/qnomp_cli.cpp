#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnomp/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo benchmark runner for the 2-D multipath super-resolution estimators"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "Execute the experiment described by a JSON config");
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    int trials = 0;
    std::string estimators_csv;
    run->add_option("config", config_path, "Path to the experiment config")->required();
    run->add_option("--out", out_path, "Override the configured output CSV path");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the configured RNG seed");
    CLI::Option* trials_opt = run->add_option("--trials", trials, "Override the configured trial count");
    run->add_option("--estimators", estimators_csv,
                    "Override the configured estimators (comma-separated names)");

    CLI11_PARSE(app, argc, argv);

    try {
        qnomp::ExperimentConfig cfg = qnomp::load_config(config_path);
        if (!out_path.empty()) cfg.output_path = out_path;
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (trials_opt->count() > 0) cfg.trials = trials;
        if (!estimators_csv.empty()) {
            cfg.estimators.clear();
            std::stringstream ss(estimators_csv);
            std::string name;
            while (std::getline(ss, name, ','))
                if (!name.empty()) cfg.estimators.push_back(qnomp::estimator_from_name(name));
        }
        cfg.validate();

        const std::vector<qnomp::ResultRow> rows = qnomp::run_experiment(cfg);
        qnomp::emit_csv(rows, cfg.output_path);
        std::cout << "wrote " << rows.size() << " rows to " << cfg.output_path << '\n';
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
