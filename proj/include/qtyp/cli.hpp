#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qtyp/scenario_io.hpp"
#include "qtyp/trajectory_graph.hpp"

namespace qtyp::cli {

enum ExitCode : int {
    kOk = 0,
    kInternalError = 1,
    kInputError = 2,
    kResourceLimit = 3,
    kAuditFailure = 4,
};

// Relative output paths are resolved against this directory when it is set.
inline constexpr const char* kOutputDirVariable = "QTYP_OUTPUT_DIR";

struct Thresholds {
    double epsilon_exclude = kDefaultExclusionEpsilon;
    double tau_link = kDefaultLinkThreshold;
    double typicality = kDefaultTypicalityThreshold;
};

enum class Format { Json, Csv };

struct RunConfig {
    std::string command;
    // scenario: unruh | fig1 | nonadditivity
    std::string target;
    // File path or builtin:NAME
    std::optional<std::string> scenario_path;
    Thresholds thresholds;
    std::optional<Format> format;
    // Empty or "-" writes to stdout.
    std::string output;
    std::uint64_t seed = 1;

    bool detector_d2 = false;
    std::optional<std::string> obstacle;
    std::string export_path;

    std::string s1;
    std::string s2;
    bool all_pairs = false;

    std::size_t outcomes = 2;
    std::vector<double> probs;
    std::size_t repetitions = 16;
    double epsilon = 0.125;
    bool sweep = false;
    std::size_t draws = 20;

    bool separation_sweep = false;
    std::vector<double> separations{4.0, 6.0, 8.0, 10.0};
    std::string snapshots_path;
};

// Throws UsageError for unknown subcommands or malformed flags. Help requests
// yield a config whose command is "help" with the text in `target`.
RunConfig parse_args(const std::vector<std::string>& args);

// Threshold ranges and per-command requirements; throws ValidationError.
void validate(const RunConfig& config);

Json config_json(const RunConfig& config);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse_args + run with the error to exit code mapping. args[0] is the
// program name.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct LoadedScenario {
    QuantumStructure structure;
    PartitionSchedule partition;
    std::optional<StochasticProcessSpec> stochastic;
};

// builtin:unruh, builtin:unruh-detector-d2, builtin:unruh-obstacle-u1,
// builtin:unruh-obstacle-d1, builtin:fig1, builtin:identity-pair, or a path.
LoadedScenario load_source(const std::string& source);

}  // namespace qtyp::cli
