#pragma once

#include "seqscreen/config.hpp"
#include "seqscreen/verify.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace seqscreen {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_assumption = 3,
    exit_verification = 4,
    exit_unsupported = 5,
};

struct Overrides {
    std::optional<std::size_t> theta_points;
    std::optional<std::size_t> v_points;
    std::optional<double> tol_ic;
    std::optional<std::filesystem::path> out;
};

/// Applies command-line overrides and re-validates.
void apply(RunConfig& config, const Overrides& overrides);

/// Writes mechanism.csv, tariff.csv, committed.csv and, with a spot price,
/// spot.csv and spot.json. Returns the paths written.
std::vector<std::filesystem::path> cmd_solve(const RunConfig& config);

/// Runs every registered check. Throws AssumptionError when the model is refused.
VerificationReport cmd_verify(const RunConfig& config);

/// Sweep CSV for `parameter` (gamma | spot_price) over `values`.
std::string cmd_sweep(const RunConfig& config, const std::string& parameter, const std::vector<double>& values);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace seqscreen
