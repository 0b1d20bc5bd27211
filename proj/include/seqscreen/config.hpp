#pragma once

#include "seqscreen/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace seqscreen {

struct SignalConfig {
    std::string distribution = "uniform";  // uniform | mixture
    double lo = 1.0;
    double hi = 2.0;
    std::vector<SignalDistribution::Component> components;
};

struct ModelConfig {
    std::string family = "example1";  // example1 | multiplicative | tabulated
    SignalConfig signal;
    double shock_lo = 0.5;            // uniform shock, multiplicative family
    double shock_hi = 1.0;
    std::filesystem::path file;       // tabulated family, resolved against the config's directory
};

struct GridConfig {
    std::size_t theta_points = 51;
    std::size_t v_points = 101;
    std::size_t q_oracle_points = 10000;
};

struct RunConfig {
    ModelConfig model;
    Environment env;
    GridConfig grids;
    Tolerances tol;
    std::filesystem::path output_dir = "out";  // relative to the working directory
    bool write_csv = true;
    bool write_json = true;
};

/// Reads a JSON config. The name "example1" selects the built-in preset.
/// Throws ConfigError on a missing file, malformed JSON, unknown keys or bad values.
RunConfig load_config(const std::string& path_or_preset);

/// Parses JSON text; relative paths are resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// The built-in preset: alpha = 1/2, c = 1, theta ~ U[1,2], v = theta z with z ~ U[1/2,1].
RunConfig example1_config();

/// Throws ConfigError when grids or environment are invalid.
void validate(const RunConfig& config);

Model build_model(const RunConfig& config);

} // namespace seqscreen
