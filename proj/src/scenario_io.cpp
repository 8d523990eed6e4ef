#include "qtyp/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

namespace {

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw SchemaError(fmt::format("{}: {}", where, what));
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) schema_fail(where, fmt::format("missing '{}'", key));
    return obj.at(key);
}

std::size_t as_index(const Json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        schema_fail(where, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

double as_real(const Json& v, const std::string& where) {
    if (!v.is_number()) schema_fail(where, "expected a number");
    return v.get<double>();
}

Complex as_complex(const Json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2) schema_fail(where, "expected [re, im]");
    return {as_real(v[0], where + "[0]"), as_real(v[1], where + "[1]")};
}

Matrix as_matrix(const Json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) schema_fail(where, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    if (!v[0].is_array()) schema_fail(where, "expected rows of [re, im] pairs");
    const auto cols = static_cast<Eigen::Index>(v[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = v[static_cast<std::size_t>(r)];
        const std::string row_where = fmt::format("{}[{}]", where, r);
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            schema_fail(row_where, fmt::format("expected {} entries", cols));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = as_complex(row[static_cast<std::size_t>(c)], fmt::format("{}[{}]", row_where, c));
        }
    }
    return m;
}

Region as_region(const Json& v, const std::string& where) {
    if (!v.is_array()) schema_fail(where, "expected an array of cell labels");
    Region r;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) schema_fail(fmt::format("{}[{}]", where, i), "expected a string");
        r.insert(v[i].get<std::string>());
    }
    return r;
}

Json complex_json(Complex c) {
    return Json::array({c.real(), c.imag()});
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

QuantumStructure parse_structure(const Json& root) {
    const std::size_t dim = as_index(require(root, "dim", "scenario"), "dim");

    const Json& psi_json = require(root, "psi0", "scenario");
    if (!psi_json.is_array() || psi_json.size() != dim) {
        schema_fail("psi0", fmt::format("expected {} amplitudes", dim));
    }
    Vector psi0(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        psi0[static_cast<Eigen::Index>(i)] = as_complex(psi_json[i], fmt::format("psi0[{}]", i));
    }

    const Json& cells_json = require(root, "cells", "scenario");
    if (!cells_json.is_object()) schema_fail("cells", "expected an object of label -> basis indices");
    std::vector<Cell> cells;
    for (const auto& [label, indices] : cells_json.items()) {
        const std::string where = fmt::format("cells.{}", label);
        if (!indices.is_array()) schema_fail(where, "expected an array of basis indices");
        Cell cell{label, {}};
        for (std::size_t i = 0; i < indices.size(); ++i) {
            cell.basis.push_back(as_index(indices[i], fmt::format("{}[{}]", where, i)));
        }
        cells.push_back(std::move(cell));
    }

    const Json& schedule_json = require(root, "schedule", "scenario");
    if (!schedule_json.is_array()) schema_fail("schedule", "expected an array of steps");
    std::vector<StepOperator> schedule;
    for (std::size_t k = 0; k < schedule_json.size(); ++k) {
        const Json& step = schedule_json[k];
        const std::string where = fmt::format("schedule[{}]", k);
        if (step.is_array()) {
            schedule.push_back(StepOperator::dense(as_matrix(step, where)));
        } else if (step.is_object() && step.contains("factor")) {
            const Json& f = step.at("factor");
            schedule.push_back(StepOperator::on_factor(
                as_matrix(require(f, "matrix", where), where + ".factor.matrix"),
                as_index(require(f, "radix", where), where + ".factor.radix"),
                as_index(require(f, "count", where), where + ".factor.count"),
                as_index(require(f, "position", where), where + ".factor.position")));
        } else {
            schema_fail(where, "expected a dense matrix or a {\"factor\": ...} object");
        }
    }

    std::string name = root.contains("name") && root.at("name").is_string()
                           ? root.at("name").get<std::string>()
                           : std::string{};
    try {
        return QuantumStructure(std::move(psi0), std::move(schedule), std::move(cells), std::move(name));
    } catch (const ValidationError& e) {
        throw SchemaError(fmt::format("scenario: {}", e.what()));
    }
}

PartitionSchedule parse_partition(const Json& v) {
    if (!v.is_array()) schema_fail("partition", "expected an array of slices");
    PartitionSchedule schedule;
    for (std::size_t s = 0; s < v.size(); ++s) {
        const std::string where = fmt::format("partition[{}]", s);
        PartitionSlice slice;
        slice.time = as_index(require(v[s], "time", where), where + ".time");
        const Json& regions = require(v[s], "regions", where);
        if (!regions.is_array()) schema_fail(where + ".regions", "expected an array of regions");
        for (std::size_t r = 0; r < regions.size(); ++r) {
            slice.regions.push_back(as_region(regions[r], fmt::format("{}.regions[{}]", where, r)));
        }
        schedule.push_back(std::move(slice));
    }
    return schedule;
}

StochasticProcessSpec parse_stochastic(const Json& v) {
    StochasticProcessSpec spec;
    const Json& states = require(v, "states", "stochastic");
    if (!states.is_array()) schema_fail("stochastic.states", "expected an array of labels");
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!states[i].is_string()) schema_fail(fmt::format("stochastic.states[{}]", i), "expected a string");
        spec.states.push_back(states[i].get<std::string>());
    }
    const Json& initial = require(v, "initial", "stochastic");
    if (!initial.is_array()) schema_fail("stochastic.initial", "expected an array");
    for (std::size_t i = 0; i < initial.size(); ++i) {
        spec.initial.push_back(as_real(initial[i], fmt::format("stochastic.initial[{}]", i)));
    }
    const Json& kernels = require(v, "kernels", "stochastic");
    if (!kernels.is_array()) schema_fail("stochastic.kernels", "expected an array of matrices");
    for (std::size_t k = 0; k < kernels.size(); ++k) {
        const std::string where = fmt::format("stochastic.kernels[{}]", k);
        const Json& m = kernels[k];
        if (!m.is_array()) schema_fail(where, "expected rows");
        Eigen::MatrixXd kernel(static_cast<Eigen::Index>(m.size()),
                               static_cast<Eigen::Index>(m.empty() ? 0 : m[0].size()));
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (!m[r].is_array() || m[r].size() != static_cast<std::size_t>(kernel.cols())) {
                schema_fail(fmt::format("{}[{}]", where, r), "ragged kernel row");
            }
            for (std::size_t c = 0; c < m[r].size(); ++c) {
                kernel(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    as_real(m[r][c], fmt::format("{}[{}][{}]", where, r, c));
            }
        }
        spec.kernels.push_back(std::move(kernel));
    }
    try {
        validate(spec);
    } catch (const ValidationError& e) {
        throw SchemaError(fmt::format("stochastic: {}", e.what()));
    }
    return spec;
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
    Json root;
    try {
        root = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = line_and_column(text, e.byte);
        throw SchemaError(fmt::format("line {}, column {}: {}", line, column, e.what()));
    }
    if (!root.is_object()) schema_fail("scenario", "top level must be an object");
    ScenarioFile file{parse_structure(root), std::nullopt, std::nullopt};
    if (root.contains("partition")) {
        file.partition = parse_partition(root.at("partition"));
        try {
            validate(file.structure, *file.partition);
        } catch (const Error& e) {
            throw SchemaError(fmt::format("partition: {}", e.what()));
        }
    }
    if (root.contains("stochastic")) file.stochastic = parse_stochastic(root.at("stochastic"));
    return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(fmt::format("cannot open scenario file '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

Json scenario_to_json(const QuantumStructure& structure, const PartitionSchedule* partition,
                      const StochasticProcessSpec* stochastic) {
    Json root;
    if (!structure.name().empty()) root["name"] = structure.name();
    root["dim"] = structure.dim();
    Json cells = Json::object();
    for (const Cell& c : structure.cells()) cells[c.label] = c.basis;
    root["cells"] = std::move(cells);
    Json psi0 = Json::array();
    for (Eigen::Index i = 0; i < structure.psi0().size(); ++i) psi0.push_back(complex_json(structure.psi0()[i]));
    root["psi0"] = std::move(psi0);
    Json schedule = Json::array();
    for (const StepOperator& step : structure.schedule()) {
        if (step.is_dense()) {
            schedule.push_back(matrix_json(step.matrix()));
        } else {
            Json factor;
            factor["radix"] = step.radix();
            factor["count"] = step.count();
            factor["position"] = step.position();
            factor["matrix"] = matrix_json(step.matrix());
            schedule.push_back(Json{{"factor", std::move(factor)}});
        }
    }
    root["schedule"] = std::move(schedule);
    if (partition != nullptr) {
        Json slices = Json::array();
        for (const PartitionSlice& slice : *partition) {
            Json regions = Json::array();
            for (const Region& r : slice.regions) regions.push_back(Json(std::vector<std::string>(r.begin(), r.end())));
            slices.push_back(Json{{"time", slice.time}, {"regions", std::move(regions)}});
        }
        root["partition"] = std::move(slices);
    }
    if (stochastic != nullptr) {
        Json kernels = Json::array();
        for (const Eigen::MatrixXd& m : stochastic->kernels) {
            Json rows = Json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                Json row = Json::array();
                for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
                rows.push_back(std::move(row));
            }
            kernels.push_back(std::move(rows));
        }
        root["stochastic"] = Json{{"states", stochastic->states},
                                  {"initial", stochastic->initial},
                                  {"kernels", std::move(kernels)}};
    }
    return root;
}

SSet parse_sset(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) {
        throw ValidationError(fmt::format("s-set '{}' must look like TIME:LABEL[,LABEL...]", text));
    }
    SSet s;
    const std::string time_text(text.substr(0, colon));
    std::size_t used = 0;
    try {
        s.time = std::stoul(time_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != time_text.size()) throw ValidationError(fmt::format("bad time index '{}'", time_text));
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view label = rest.substr(0, comma);
        if (label.empty()) throw ValidationError(fmt::format("empty cell label in '{}'", text));
        s.region.emplace(label);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return s;
}

}  // namespace qtyp
