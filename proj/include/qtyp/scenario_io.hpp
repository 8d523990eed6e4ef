#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qtyp/stochastic_twin.hpp"
#include "qtyp/structure.hpp"
#include "qtyp/trajectory_graph.hpp"

namespace qtyp {

using Json = nlohmann::ordered_json;

// Contents of a scenario file. See docs in README.md for the schema:
//
//   {
//     "name": "unruh",
//     "dim": 2,
//     "cells": {"U": [0], "D": [1]},
//     "psi0": [[0, 0], [1, 0]],
//     "schedule": [ [[[re, im], ...], ...],                   dense step
//                   {"factor": {"radix": 2, "count": 4,
//                               "position": 0, "matrix": ...}} factor step ],
//     "partition": [{"time": 1, "regions": [["U"], ["D"]]}],   optional
//     "stochastic": {"states": [...], "initial": [...],
//                    "kernels": [[[...], ...], ...]}           optional
//   }
struct ScenarioFile {
    QuantumStructure structure;
    std::optional<PartitionSchedule> partition;
    std::optional<StochasticProcessSpec> stochastic;
};

// Throws SchemaError; JSON syntax errors carry line and column.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::filesystem::path& path);

Json scenario_to_json(const QuantumStructure& structure, const PartitionSchedule* partition = nullptr,
                      const StochasticProcessSpec* stochastic = nullptr);

// "3:U" or "3:D,CLICK"
SSet parse_sset(std::string_view text);

}  // namespace qtyp
