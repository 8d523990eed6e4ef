#pragma once

#include <cstddef>
#include <vector>

#include "qtyp/structure.hpp"
#include "qtyp/typicality.hpp"

namespace qtyp::grid {

// Periodic 1-D grid on [-length/2, length/2), units with hbar = m = 1.
struct Grid {
    std::size_t n_points = 4096;
    double length = 200.0;

    double dx() const { return length / static_cast<double>(n_points); }
    double x(std::size_t j) const { return -0.5 * length + static_cast<double>(j) * dx(); }
    // Angular wave number of FFT bin j.
    double k(std::size_t j) const;

    friend bool operator==(const Grid&, const Grid&) = default;
};

void validate(const Grid& grid);

struct GridState {
    Grid grid;
    std::vector<Complex> amplitudes;
    double time = 0.0;
    // Set when probability within 3 dx of the periodic seam reaches 1e-6.
    bool boundary_warning = false;

    // sum |psi|^2 dx
    double norm() const;
};

// Closed half-open interval [lo, hi) on the grid axis.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x < hi; }
};

// psi(x) proportional to exp(-(x - center)^2 / (4 sigma^2) + i momentum x),
// so sigma is the standard deviation of |psi|^2.
GridState gaussian_packet(const Grid& grid, double center, double sigma, double momentum);

// Normalized a * lhs + b * rhs.
GridState superpose(const GridState& lhs, Complex a, const GridState& rhs, Complex b);

// Exact free evolution by phase multiplication in momentum space.
GridState free_evolve(const GridState& state, double dt);

bool near_seam(const GridState& state);

double inner_product_magnitude(const GridState& a, const GridState& b);
double mean_position(const GridState& state);
double position_spread(const GridState& state);
double mean_momentum(const GridState& state);
double mean_square_momentum(const GridState& state);

// ||E(interval) psi||^2
double mass_in(const GridState& state, const Interval& interval);

inline constexpr double kSupportMassCutoff = 1e-6;

// Smallest interval centred on the mean position holding 1 - cutoff of the mass.
Interval support_interval(const GridState& state, double cutoff = kSupportMassCutoff);

// M for (t1, region1) and (t2, region2): the masked t1 state evolved to t2
// against the masked t2 state.
TypicalityReport support_condition_check(const GridState& at_t1, const Interval& region1,
                                         const GridState& at_t2, const Interval& region2,
                                         double threshold = kDefaultTypicalityThreshold);

// Two packets leaving each other: the left one moves with -momentum, the
// right one with +momentum, starting `separation_sigmas` widths apart.
struct CounterPropagation {
    Grid grid{4096, 200.0};
    double sigma = 1.0;
    double momentum = 5.0;
    double dt = 4.0;
    double cutoff = kSupportMassCutoff;
};

struct SeparationPoint {
    double separation_sigmas = 0.0;
    double m_big = 0.0;
    double separation_t2_sigmas = 0.0;
    bool boundary_warning = false;
};

// Region 1 is the left half line at t1; region 2 the support of the
// left-moving packet at t2.
SeparationPoint counter_propagation_point(const CounterPropagation& setup, double separation_sigmas);

}  // namespace qtyp::grid
