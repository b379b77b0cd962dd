#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace absorb {

enum class Engine { Abm, Pde, Master, Analytic };

std::vector<Engine> parse_engines(const std::string& list);
std::string to_string(Engine e);

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitIo = 2,
    kExitInvariant = 3,
};

struct ExperimentManifest {
    std::string experiment_id;
    std::filesystem::path config_path;
    std::vector<Engine> engines;
    std::filesystem::path output_dir;
    std::optional<std::vector<double>> output_times;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> realizations;
    std::optional<int> tau_refine;
    bool dump_grid = false;
    /// Scales every PDE kernel weight; values above 1 must trip the audit.
    double inject_weight_scale = 1.0;
};

struct ExecutionResult {
    int exit_code = kExitOk;
    std::string message;
    std::vector<std::filesystem::path> files;  ///< relative to output_dir
};

/// Runs the requested engines, writes CSV/JSON artifacts plus provenance and
/// an index file. The exit code is kExitInvariant when a PDE audit fails.
ExecutionResult execute(const ExperimentManifest& manifest);

int cli_main(int argc, char** argv);

}  // namespace absorb
