#pragma once

#include "flarecast/catalog.hpp"
#include "flarecast/models.hpp"
#include "flarecast/preprocess.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace flarecast::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1, // also usage errors, unreadable inputs and failed writes
    kSchemaError = 2,
    kEmptyCatalog = 3,
    kTrainingAborted = 4,
    kInsufficientData = 5,
};

/// Declarative run description. Every default is the published setup, so an
/// empty JSON object reproduces it.
struct RunConfig {
    std::string catalog;
    catalog::ColumnSchema columns;
    bool smoothing = true;
    preprocess::SmoothingConfig smoothing_config;
    preprocess::RegularizeConfig regularize;
    int window = windows::kDefaultWindowLength;
    /// One experiment per value; 0, 12 and 20 are the published grid.
    std::vector<int> R{0};
    models::ExperimentConfig experiment; // experiment.R is overwritten per grid value
    bool cross_validation = false;
    int folds = 4;
    std::string out = "flarecast-out";

    /// Throws ConfigError before any data is read or any model trained.
    void validate() const;
    /// experiment with R set to the given grid value.
    models::ExperimentConfig experiment_for(int r) const;
};

/// Unknown keys and wrong types are ConfigErrors.
RunConfig parse_run_config(const nlohmann::json& j);
/// Canonical form with every field present; parse_run_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& cfg);
/// Reads a config file, or the "config" member of a run manifest.
RunConfig load_run_config(const std::filesystem::path& path);

/// Full command-line entry point; returns an ExitCode.
int run(int argc, const char* const* argv);

} // namespace flarecast::cli
