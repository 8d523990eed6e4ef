#include "qtyp/scenarios.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Basis positions of the optional cells in the interferometer model.
struct UnruhLayout {
    std::size_t dim = 2;
    std::optional<std::size_t> click;
    std::optional<std::size_t> absorbed;
};

UnruhLayout layout_for(const UnruhOptions& options) {
    UnruhLayout layout;
    if (options.detector_d2) layout.click = layout.dim++;
    if (options.obstacle) layout.absorbed = layout.dim++;
    return layout;
}

// Mirror (optional) followed by a half-silvered mirror on the photon modes,
// identity on the auxiliary cells.
Matrix splitter(const MirrorConvention& c, std::size_t dim, bool with_mirror) {
    Matrix m = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const Complex phase = with_mirror ? c.mirror : Complex{1.0, 0.0};
    m(0, 0) = phase * c.transmit;
    m(0, 1) = phase * c.reflect;
    m(1, 0) = phase * c.reflect;
    m(1, 1) = phase * c.transmit;
    return m;
}

Matrix swap(std::size_t dim, std::size_t a, std::size_t b) {
    Matrix m = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    m(ia, ia) = 0.0;
    m(ib, ib) = 0.0;
    m(ia, ib) = 1.0;
    m(ib, ia) = 1.0;
    return m;
}

}  // namespace

MirrorConvention default_convention() {
    return {Complex{kInvSqrt2, 0.0}, Complex{0.0, kInvSqrt2}, Complex{0.0, 1.0}, kLower};
}

std::string_view to_string(Arm arm) {
    return arm == Arm::U1 ? "U1" : "D1";
}

Arm parse_arm(std::string_view text) {
    if (text == "U1") return Arm::U1;
    if (text == "D1") return Arm::D1;
    throw ValidationError(fmt::format("unknown arm '{}', expected U1 or D1", text));
}

ProjectedVector UnruhModel::psi_upper() const {
    return chain_project(structure, {upper(1), upper(2), upper(3)});
}

ProjectedVector UnruhModel::psi_lower() const {
    return chain_project(structure, {upper(1), upper(2), lower(3)});
}

PartitionSchedule UnruhModel::partition() const {
    PartitionSchedule schedule;
    for (TimeIndex t = 1; t <= 3; ++t) {
        PartitionSlice slice{t, {{kUpper}, {kLower}}};
        if (options.detector_d2) slice.regions.push_back({kClick});
        if (options.obstacle) slice.regions.push_back({kAbsorbed});
        schedule.push_back(std::move(slice));
    }
    return schedule;
}

UnruhModel build_unruh(const UnruhOptions& options) {
    const MirrorConvention c = default_convention();
    const UnruhLayout layout = layout_for(options);
    const std::size_t dim = layout.dim;

    Vector psi0 = Vector::Zero(static_cast<Eigen::Index>(dim));
    psi0[1] = 1.0;

    Matrix first_pass = splitter(c, dim, false);
    Matrix second_pass = splitter(c, dim, true);
    Matrix third_pass = splitter(c, dim, true);
    if (options.obstacle) {
        const std::size_t arm = *options.obstacle == Arm::U1 ? 0 : 1;
        second_pass = second_pass * swap(dim, arm, *layout.absorbed);
    }
    if (options.detector_d2) third_pass = third_pass * swap(dim, 1, *layout.click);

    std::vector<Cell> cells{{kUpper, {0}}, {kLower, {1}}};
    if (layout.click) cells.push_back({kClick, {*layout.click}});
    if (layout.absorbed) cells.push_back({kAbsorbed, {*layout.absorbed}});

    std::string name = "unruh";
    if (options.detector_d2) name += "-detector-d2";
    if (options.obstacle) name += fmt::format("-obstacle-{}", to_string(*options.obstacle));

    QuantumStructure structure(std::move(psi0),
                               {StepOperator::dense(first_pass), StepOperator::dense(second_pass),
                                StepOperator::dense(third_pass)},
                               std::move(cells), std::move(name));
    return UnruhModel{std::move(structure), c, options};
}

UnruhModel build_unruh(bool with_detector_d2) {
    return build_unruh(UnruhOptions{with_detector_d2, std::nullopt});
}

UnruhModel obstacle_variant(Arm arm) {
    return build_unruh(UnruhOptions{false, arm});
}

std::vector<SignEntry> unruh_sign_table(const UnruhModel& model) {
    struct Row {
        bool up3;
        bool up2;
        bool up1;
        int sign;
    };
    static constexpr Row rows[] = {
        {true, true, true, +1},   {false, true, true, +1},  {true, true, false, +1},
        {false, true, false, +1}, {true, false, true, -1},  {false, false, true, +1},
        {true, false, false, +1}, {false, false, false, -1},
    };
    std::vector<SignEntry> out;
    for (const Row& r : rows) {
        SignEntry e;
        e.first = r.up1 ? model.upper(1) : model.lower(1);
        e.second = r.up2 ? model.upper(2) : model.lower(2);
        e.third = r.up3 ? model.upper(3) : model.lower(3);
        e.expected_sign = r.sign;
        e.upper_detector = r.up3;
        e.chain = fmt::format("{}3 {}2 {}1", r.up3 ? "U" : "D", r.up2 ? "U" : "D", r.up1 ? "U" : "D");
        out.push_back(std::move(e));
    }
    return out;
}

AdditivityWitness nonadditivity_demo() {
    const UnruhModel m = build_unruh(false);
    return chained_additivity(m.structure, m.upper(1), m.lower(1), m.upper(2));
}

QuantumStructure build_beamsplitter_fig1() {
    const MirrorConvention c = default_convention();
    Matrix split(2, 2);
    split << c.transmit, c.reflect, c.reflect, c.transmit;
    Vector psi0 = Vector::Zero(2);
    psi0[1] = 1.0;
    return QuantumStructure(std::move(psi0),
                            {StepOperator::dense(split), StepOperator::dense(Matrix::Identity(2, 2))},
                            {{"A", {0}}, {"B", {1}}}, "fig1-beamsplitter");
}

QuantumStructure build_identity_pair(double weight_a) {
    if (!(weight_a >= 0.0 && weight_a <= 1.0)) {
        throw ValidationError(fmt::format("weight {} outside [0, 1]", weight_a));
    }
    Vector psi0(2);
    psi0 << std::sqrt(weight_a), std::sqrt(1.0 - weight_a);
    const Matrix id = Matrix::Identity(2, 2);
    return QuantumStructure(std::move(psi0), {StepOperator::dense(id), StepOperator::dense(id)},
                            {{"a", {0}}, {"b", {1}}}, "identity-pair");
}

}  // namespace qtyp
