#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "predkit/state.hpp"

namespace predkit {

/// Declarative experiment description, parsed from an INI-style file with
/// [model] / [integrator] / [sampling] / [perturbation] / [analysis] /
/// [output] sections. Every key is validated against the schema before any
/// computation; unknown keys are a hard error listing all offenders.
struct ExperimentConfig {
    // [model]
    std::string model_name;
    std::map<std::string, double> model_params;

    // [integrator]
    double step = 0.01;

    // [sampling]
    double spinup = 100.0;
    long long count = 400;
    double interval = 0.5;
    std::uint64_t sampling_seed = 0;

    // [perturbation]
    double epsilon = 1e-5;
    int directions_per_point = 25;
    std::uint64_t perturbation_seed = 0;

    // [analysis]
    std::string analysis;                // gle | lle | nlle | spectrum | localmap |
                                         // fixed-points | pes-scan | verify-toy
    std::vector<double> tau_grid;        // empty -> default grid for the model step
    std::optional<double> tau;           // lle / spectrum horizon
    double total_time = 2000.0;          // gle
    double renorm_interval = 0.5;        // gle / spectrum
    int m = 0;                           // 0 -> model dimension
    int window = 10;
    double slope_tol = 0.02;
    double theta = 0.05;
    std::vector<double> box;             // lo1,hi1,lo2,hi2,...
    int grid_per_axis = 11;
    double newton_tol = 1e-8;
    std::vector<double> lambda_grid;     // pes-scan
    std::string pes_parameter;           // pes-scan: scanned parameter name
    std::optional<State> pes_equilibrium;  // pes-scan: defaults to the origin
    long long n_basin = 1000;            // verify-toy
    double horizon = 100.0;              // verify-toy

    // [output]
    std::string output_dir = "out";
    bool write_csv = true;
    bool write_json = true;

    /// Normalized section.key = value echo (effective values, 17-digit
    /// doubles) for the manifest.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses and validates. Throws ValidationError naming every offending key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace predkit
