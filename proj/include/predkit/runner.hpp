#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "predkit/config.hpp"
#include "predkit/model.hpp"

namespace predkit {

struct RunOptions {
    std::optional<std::uint64_t> seed;        // overrides both config seeds
    int workers = 1;
    std::optional<std::string> output_dir;    // overrides [output] directory
};

struct ArtifactInfo {
    std::string name;
    std::string sha256;
    std::uint64_t bytes = 0;
};

struct RunManifest {
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::uint64_t sampling_seed = 0;
    std::uint64_t perturbation_seed = 0;
    std::vector<ArtifactInfo> artifacts;
    double wall_seconds = 0.0;
    std::string version;
};

/// Dispatches the configured analysis, writes its artifacts plus
/// manifest.json into the output directory, and returns the manifest.
/// Partial outputs are removed when the computation fails. Artifact bytes are
/// a pure function of (config, seeds, version) regardless of worker count.
RunManifest run_config(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace predkit
