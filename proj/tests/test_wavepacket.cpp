#include <gtest/gtest.h>

#include <cmath>

#include "qtyp/errors.hpp"
#include "qtyp/wavepacket.hpp"

namespace {

using namespace qtyp;
using namespace qtyp::grid;

const Grid kGrid{4096, 200.0};

TEST(Grid, Validation) {
    EXPECT_THROW(validate(Grid{1000, 10.0}), ValidationError);
    EXPECT_THROW(validate(Grid{1024, 0.0}), ValidationError);
    EXPECT_NO_THROW(validate(kGrid));
    EXPECT_DOUBLE_EQ(kGrid.x(0), -100.0);
    EXPECT_DOUBLE_EQ(kGrid.k(1), 2.0 * M_PI / 200.0);
    EXPECT_DOUBLE_EQ(kGrid.k(4095), -2.0 * M_PI / 200.0);
}

TEST(GaussianPacket, NormalizedAndSymmetric) {
    for (double sigma : {0.5, 1.0, 3.0}) {
        const GridState s = gaussian_packet(kGrid, 10.0, sigma, 2.0);
        EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    }
    const GridState still = gaussian_packet(kGrid, 0.0, 1.0, 0.0);
    const std::size_t mid = kGrid.n_points / 2;  // x = 0
    for (std::size_t j = 1; j < 200; ++j) {
        EXPECT_NEAR(std::norm(still.amplitudes[mid + j]), std::norm(still.amplitudes[mid - j]), 1e-15);
    }
    EXPECT_NEAR(position_spread(still), 1.0, 1e-10);
}

TEST(GaussianPacket, Preconditions) {
    EXPECT_THROW(gaussian_packet(kGrid, 0.0, 0.1, 0.0), ValidationError);
    EXPECT_THROW(gaussian_packet(kGrid, 96.0, 1.0, 0.0), ValidationError);
}

TEST(GaussianPacket, OverlapMatchesFormula) {
    // |<phi1, phi2>| = exp(-d^2 / (8 sigma^2)) for equal widths and momenta.
    const double sigma = 1.0;
    for (double d : {1.0, 4.0, 10.0}) {
        const GridState a = gaussian_packet(kGrid, -d / 2, sigma, 0.0);
        const GridState b = gaussian_packet(kGrid, d / 2, sigma, 0.0);
        const double expected = std::exp(-d * d / (8.0 * sigma * sigma));
        EXPECT_NEAR(inner_product_magnitude(a, b), expected, 1e-12 + 1e-10 * expected) << "d=" << d;
    }
}

TEST(FreeEvolve, ZeroStepIsIdentity) {
    const GridState s = gaussian_packet(kGrid, 0.0, 1.0, 3.0);
    const GridState same = free_evolve(s, 0.0);
    for (std::size_t j = 0; j < s.amplitudes.size(); ++j) EXPECT_EQ(same.amplitudes[j], s.amplitudes[j]);
}

TEST(FreeEvolve, NormEnergyAndReversibility) {
    const GridState s = gaussian_packet(kGrid, -20.0, 1.0, 4.0);
    const GridState later = free_evolve(s, 5.0);
    EXPECT_NEAR(later.norm(), 1.0, 1e-10);
    EXPECT_NEAR(mean_square_momentum(later), mean_square_momentum(s), 1e-9);
    const GridState back = free_evolve(later, -5.0);
    double err = 0.0;
    for (std::size_t j = 0; j < s.amplitudes.size(); ++j) err = std::max(err, std::abs(back.amplitudes[j] - s.amplitudes[j]));
    EXPECT_LT(err, 1e-9);
}

TEST(FreeEvolve, DriftAndSpreading) {
    const double x0 = -20.0;
    const double k = 4.0;
    for (double sigma : {1.0, 2.0}) {
        const GridState s = gaussian_packet(kGrid, x0, sigma, k);
        for (double t : {1.0, 4.0, 8.0}) {
            const GridState later = free_evolve(s, t);
            const double drift = x0 + k * t;
            const double width = sigma * std::sqrt(1.0 + std::pow(t / (2.0 * sigma * sigma), 2));
            EXPECT_NEAR(mean_position(later), drift, 1e-6 * std::abs(drift));
            EXPECT_NEAR(position_spread(later), width, 1e-6 * width);
            EXPECT_NEAR(mean_momentum(later), k, 1e-6 * k);
        }
    }
}

TEST(FreeEvolve, SeamWarning) {
    const GridState s = gaussian_packet(kGrid, 80.0, 1.0, 10.0);
    EXPECT_FALSE(s.boundary_warning);
    EXPECT_TRUE(free_evolve(s, 2.0).boundary_warning);
}

TEST(SupportCondition, WholeLineGivesZero) {
    const GridState s = gaussian_packet(kGrid, 0.0, 1.0, 1.0);
    const Interval all{-100.0, 100.0};
    EXPECT_NEAR(support_condition_check(s, all, free_evolve(s, 3.0), all).m_big, 0.0, 1e-20);
}

TEST(SupportCondition, EqualTimeIsSymmetricDifferenceRatio) {
    const GridState s = gaussian_packet(kGrid, 0.0, 2.0, 1.0);
    const Interval r1{-3.0, 1.0};
    const Interval r2{-1.0, 4.0};
    const TypicalityReport r = support_condition_check(s, r1, s, r2);
    const double symm = mass_in(s, {-3.0, -1.0}) + mass_in(s, {1.0, 4.0});
    EXPECT_NEAR(r.difference, symm, 1e-12);
    EXPECT_NEAR(r.m_big, symm / std::max(mass_in(s, r1), mass_in(s, r2)), 1e-12);
}

TEST(SupportCondition, GridMismatch) {
    const GridState a = gaussian_packet(kGrid, 0.0, 1.0, 0.0);
    const GridState b = gaussian_packet(Grid{2048, 200.0}, 0.0, 1.0, 0.0);
    EXPECT_THROW(support_condition_check(a, {-1, 1}, b, {-1, 1}), ValidationError);
    EXPECT_THROW(inner_product_magnitude(a, b), ValidationError);
}

TEST(CounterPropagation, SmallAtLargeSeparationAndMonotone) {
    const CounterPropagation setup;
    double previous = 2.0;
    for (double sep : {4.0, 6.0, 8.0, 10.0}) {
        const SeparationPoint p = counter_propagation_point(setup, sep);
        EXPECT_LT(p.m_big, previous);
        EXPECT_FALSE(p.boundary_warning);
        if (sep >= 8.0) {
            EXPECT_LT(p.m_big, 0.01);
            EXPECT_GE(p.separation_t2_sigmas, 8.0);
        }
        previous = p.m_big;
    }
}

TEST(CounterPropagation, WrongBranchIsNotTypical) {
    const CounterPropagation setup;
    const double half_gap = 5.0;
    const GridState left = gaussian_packet(setup.grid, -half_gap, setup.sigma, -setup.momentum);
    const GridState right = gaussian_packet(setup.grid, half_gap, setup.sigma, setup.momentum);
    const GridState at_t1 = superpose(left, 1.0, right, 1.0);
    const GridState at_t2 = free_evolve(at_t1, setup.dt);
    const Interval right_support = support_interval(free_evolve(right, setup.dt));
    const TypicalityReport r = support_condition_check(at_t1, {-100.0, 0.0}, at_t2, right_support);
    EXPECT_GE(r.m_big, 1.0);
}

TEST(SupportInterval, HoldsRequestedMass) {
    const GridState s = gaussian_packet(kGrid, 5.0, 1.5, 0.0);
    const Interval i = support_interval(s, 1e-6);
    EXPECT_GE(mass_in(s, i), 1.0 - 1e-6);
    EXPECT_NEAR(0.5 * (i.lo + i.hi), 5.0, 2.0 * kGrid.dx());
    EXPECT_THROW(support_interval(s, 0.0), ValidationError);
}

}  // namespace
