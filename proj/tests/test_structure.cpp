#include <gtest/gtest.h>

#include <cmath>

#include "qtyp/errors.hpp"
#include "qtyp/random_structure.hpp"
#include "qtyp/scenarios.hpp"
#include "qtyp/structure.hpp"

namespace {

using namespace qtyp;

const double kRt2 = 1.0 / std::sqrt(2.0);

Vector basis_vector(std::size_t dim, std::size_t k) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(k)] = 1.0;
    return v;
}

QuantumStructure two_level(Matrix step) {
    return QuantumStructure(basis_vector(2, 1), {StepOperator::dense(std::move(step))},
                            {{"U", {0}}, {"D", {1}}});
}

TEST(StepOperator, FactorMatchesKroneckerProduct) {
    Rng rng(7);
    const Matrix small = random_unitary(rng, 3);
    // dim 27, acting on the middle factor: I3 (x) small (x) I3.
    const StepOperator op = StepOperator::on_factor(small, 3, 3, 1);
    Matrix full = Matrix::Zero(27, 27);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 3; ++c) {
                for (int b2 = 0; b2 < 3; ++b2) full(a * 9 + b2 * 3 + c, a * 9 + b * 3 + c) = small(b2, b);
            }
        }
    }
    const Vector psi = random_state(rng, 27);
    Vector v = psi;
    op.apply(v);
    EXPECT_LT((v - full * psi).norm(), 1e-12);
    op.apply_adjoint(v);
    EXPECT_LT((v - psi).norm(), 1e-12);
}

TEST(StepOperator, MostSignificantFactorIsPositionZero) {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    Vector v = basis_vector(4, 0);
    StepOperator::on_factor(x, 2, 2, 0).apply(v);
    EXPECT_EQ(v, basis_vector(4, 2));
    v = basis_vector(4, 0);
    StepOperator::on_factor(x, 2, 2, 1).apply(v);
    EXPECT_EQ(v, basis_vector(4, 1));
}

TEST(StepOperator, RejectsBadShapes) {
    EXPECT_THROW(StepOperator::dense(Matrix::Identity(2, 3)), ValidationError);
    EXPECT_THROW(StepOperator::on_factor(Matrix::Identity(2, 2), 3, 2, 0), ValidationError);
    EXPECT_THROW(StepOperator::on_factor(Matrix::Identity(2, 2), 2, 2, 2), ValidationError);
}

TEST(QuantumStructure, ValidatesInvariants) {
    Matrix id = Matrix::Identity(2, 2);
    EXPECT_THROW(QuantumStructure(Vector::Ones(2), {StepOperator::dense(id)}, {{"U", {0}}, {"D", {1}}}),
                 ValidationError);
    Matrix not_unitary = id;
    not_unitary(0, 0) = 1.0 + 1e-8;
    EXPECT_THROW(two_level(not_unitary), ValidationError);
    // overlapping cells
    EXPECT_THROW(QuantumStructure(basis_vector(2, 0), {}, {{"U", {0}}, {"D", {0, 1}}}), ValidationError);
    // missing index
    EXPECT_THROW(QuantumStructure(basis_vector(2, 0), {}, {{"U", {0}}}), ValidationError);
    // duplicate label
    EXPECT_THROW(QuantumStructure(basis_vector(2, 0), {}, {{"U", {0}}, {"U", {1}}}), ValidationError);
    // dimension mismatch between state and step
    EXPECT_THROW(QuantumStructure(basis_vector(2, 0), {StepOperator::dense(Matrix::Identity(3, 3))},
                                  {{"U", {0}}, {"D", {1}}}),
                 ValidationError);
}

TEST(QuantumStructure, UnknownLabelsAndTimes) {
    const QuantumStructure q = two_level(Matrix::Identity(2, 2));
    EXPECT_THROW(q.basis_mask({"X"}), SchemaError);
    EXPECT_THROW(q.complement({"X"}), SchemaError);
    EXPECT_THROW(q.check_time(2), RangeError);
    EXPECT_THROW(project_initial(q, SSet{1, {"X"}}), SchemaError);
    EXPECT_THROW(project_initial(q, SSet{5, {"U"}}), RangeError);
    EXPECT_EQ(q.complement({"U"}), Region{"D"});
}

TEST(Evolve, ZeroStepIsIdentity) {
    const QuantumStructure q = build_unruh(false).structure;
    const ProjectedVector p = evolve(q, initial_vector(q), 0);
    EXPECT_EQ(p.amplitudes, q.psi0());
}

TEST(Evolve, UnruhFirstSplitter) {
    const QuantumStructure q = build_unruh(false).structure;
    const ProjectedVector p = evolve(q, initial_vector(q), 1);
    EXPECT_EQ(p.at_time, 1u);
    EXPECT_NEAR(std::abs(p.amplitudes[0] - Complex(0.0, kRt2)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p.amplitudes[1] - Complex(kRt2, 0.0)), 0.0, 1e-15);
}

TEST(Evolve, RangeErrors) {
    const QuantumStructure q = build_unruh(false).structure;
    EXPECT_THROW(evolve(q, initial_vector(q), 4), RangeError);
    ProjectedVector bad = initial_vector(q);
    bad.at_time = 9;
    EXPECT_THROW(evolve(q, bad, 0), RangeError);
}

TEST(Evolve, ForwardThenBackIsIdentity) {
    Rng rng(11);
    for (int draw = 0; draw < 20; ++draw) {
        const QuantumStructure q = random_structure(rng, 6, 3, 3);
        const ProjectedVector there = evolve(q, initial_vector(q), 3);
        EXPECT_NEAR(there.norm_sq(), 1.0, 1e-10);
        const ProjectedVector back = evolve(q, there, 0);
        EXPECT_LT((back.amplitudes - q.psi0()).norm(), 1e-10);
    }
}

TEST(HeisenbergProject, UnruhNorms) {
    const UnruhModel m = build_unruh(false);
    EXPECT_NEAR(project_initial(m.structure, m.upper(2)).norm_sq(), 1.0, 1e-12);
    EXPECT_NEAR(project_initial(m.structure, m.upper(1)).norm_sq(), 0.5, 1e-12);
    EXPECT_NEAR(project_initial(m.structure, m.lower(2)).norm_sq(), 0.0, 1e-12);
}

TEST(HeisenbergProject, FullRegionLeavesStateUnchanged) {
    Rng rng(3);
    const QuantumStructure q = random_structure(rng, 5, 2, 3);
    for (TimeIndex t = 0; t <= 2; ++t) {
        const ProjectedVector p = project_initial(q, SSet{t, q.all_cells()}, 0);
        EXPECT_LT((p.amplitudes - q.psi0()).norm(), 1e-12);
    }
}

TEST(HeisenbergProject, ReferenceTimeDoesNotChangeNorms) {
    Rng rng(5);
    const QuantumStructure q = random_structure(rng, 6, 4, 3);
    const SSet s = random_sset(rng, q);
    const double at_zero = project_initial(q, s, 0).norm_sq();
    for (TimeIndex ref = 1; ref <= 4; ++ref) EXPECT_NEAR(project_initial(q, s, ref).norm_sq(), at_zero, 1e-12);
}

TEST(HeisenbergProject, IdempotentAndCommutingAtEqualTime) {
    Rng rng(17);
    for (int draw = 0; draw < 50; ++draw) {
        const QuantumStructure q = random_structure(rng, 8, 3, 4);
        const SSet s = random_sset(rng, q);
        SSet other = random_sset(rng, q);
        other.time = s.time;
        const ProjectedVector once = project_initial(q, s, 0);
        const ProjectedVector twice = heisenberg_project(q, s, once);
        EXPECT_LT((once.amplitudes - twice.amplitudes).norm(), 1e-12);

        const ProjectedVector ab = heisenberg_project(q, other, once);
        const ProjectedVector ba = heisenberg_project(q, s, project_initial(q, other, 0));
        EXPECT_LT((ab.amplitudes - ba.amplitudes).norm(), 1e-12);
    }
}

TEST(HeisenbergProject, DisjointEqualTimeRegionsAreOrthogonal) {
    Rng rng(23);
    for (int draw = 0; draw < 30; ++draw) {
        const QuantumStructure q = random_structure(rng, 8, 3, 4);
        const SSet s = random_sset(rng, q);
        const Region rest = q.complement(s.region);
        if (rest.empty()) continue;
        const Vector a = project_initial(q, s, 0).amplitudes;
        const Vector b = project_initial(q, SSet{s.time, rest}, 0).amplitudes;
        EXPECT_LT(std::abs(a.dot(b)), 1e-12);
    }
}

TEST(Completeness, OccupationsSumToOne) {
    Rng rng(29);
    for (int draw = 0; draw < 30; ++draw) {
        const QuantumStructure q = random_structure(rng, 7, 4, 3);
        for (TimeIndex t = 0; t <= q.final_time(); ++t) {
            double total = 0.0;
            for (double o : cell_occupations(q, t)) total += o;
            EXPECT_NEAR(total, 1.0, 1e-10);
        }
    }
}

TEST(ChainProject, UnruhExamples) {
    const UnruhModel m = build_unruh(false);
    const QuantumStructure& q = m.structure;
    EXPECT_NEAR(chain_project(q, {m.upper(1), m.upper(2), m.upper(3)}).norm_sq(), 0.125, 1e-12);

    // given out of order, sorted internally
    const ProjectedVector p = chain_project(q, {m.upper(3), m.lower(2), m.upper(1)});
    const ProjectedVector psi_u = m.psi_upper();
    EXPECT_LT((p.amplitudes + psi_u.amplitudes).norm(), 1e-12);
}

TEST(ChainProject, EmptyChainIsInitialState) {
    const QuantumStructure q = build_unruh(false).structure;
    const ProjectedVector p = chain_project(q, {});
    EXPECT_EQ(p.amplitudes, q.psi0());
}

TEST(ChainProject, EqualTimeEntriesIntersect) {
    const UnruhModel m = build_unruh(false);
    const SSet both{1, {"U", "D"}};
    const ProjectedVector p = chain_project(m.structure, {both, m.upper(1)});
    EXPECT_NEAR(p.norm_sq(), 0.5, 1e-12);
    EXPECT_NEAR(chain_project(m.structure, {m.lower(1), m.upper(1)}).norm_sq(), 0.0, 1e-15);
}

TEST(ChainProject, NormNeverExceedsOne) {
    Rng rng(31);
    for (int draw = 0; draw < 50; ++draw) {
        const QuantumStructure q = random_structure(rng, 6, 3, 3);
        std::vector<SSet> chain;
        for (int k = 0; k < 4; ++k) chain.push_back(random_sset(rng, q));
        EXPECT_LE(chain_project(q, chain).norm_sq(), 1.0 + 1e-10);
    }
}

TEST(GlobalPhase, ProjectedNormsUnchanged) {
    Rng rng(37);
    const QuantumStructure q = random_structure(rng, 6, 3, 3);
    std::vector<StepOperator> scaled;
    for (const StepOperator& s : q.schedule()) scaled.push_back(s.scaled(std::polar(1.0, 0.7)));
    const QuantumStructure q2(q.psi0(), scaled, q.cells());
    for (int draw = 0; draw < 20; ++draw) {
        const SSet s = random_sset(rng, q);
        EXPECT_NEAR(project_initial(q, s).norm_sq(), project_initial(q2, s).norm_sq(), 1e-12);
    }
}

TEST(SSetFormatting, ToString) {
    EXPECT_EQ(to_string(SSet{3, {"D", "CLICK"}}), "(3, {CLICK,D})");
}

}  // namespace
