#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "predkit/config.hpp"
#include "predkit/errors.hpp"
#include "predkit/runner.hpp"
#include "predkit/version.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitComputation = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"predictability analysis of nonlinear dynamical systems"};
    app.set_version_flag("--version", PREDKIT_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::optional<std::string> output_dir;

    auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
    run_cmd->add_option("--config", config_path, "experiment config file")->required();
    run_cmd->add_option("--seed", seed, "override both config seeds");
    run_cmd->add_option("--workers", workers, "worker threads for ensemble analyses")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--output", output_dir, "override the output directory");

    auto* validate_cmd =
        app.add_subcommand("validate", "validate a config file without running it");
    validate_cmd->add_option("--config", config_path, "experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = predkit::parse_config_file(config_path);
        if (validate_cmd->parsed()) {
            std::cout << "config ok: analysis '" << config.analysis << "' on model '"
                      << config.model_name << "'\n";
            return 0;
        }
        predkit::RunOptions options;
        options.seed = seed;
        options.workers = workers;
        options.output_dir = output_dir;
        const auto manifest = predkit::run_config(config, options);
        std::cout << "wrote " << manifest.artifacts.size() << " artifact"
                  << (manifest.artifacts.size() == 1 ? "" : "s") << " + manifest.json in "
                  << output_dir.value_or(config.output_dir) << " ("
                  << manifest.wall_seconds << " s)\n";
        for (const auto& a : manifest.artifacts) {
            std::cout << "  " << a.name << "  " << a.bytes << " bytes  sha256:" << a.sha256
                      << "\n";
        }
        return 0;
    } catch (const predkit::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    }
}
