#include "qtyp/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fftw3.h>
#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp::grid {

namespace {

constexpr double kSeamMass = 1e-6;
constexpr std::size_t kSeamPoints = 3;

// RAII wrapper around a one-shot FFTW plan over a complex buffer.
class FourierPlan {
public:
    FourierPlan(std::vector<Complex>& data, int sign)
        : plan_(fftw_plan_dft_1d(static_cast<int>(data.size()),
                                 reinterpret_cast<fftw_complex*>(data.data()),
                                 reinterpret_cast<fftw_complex*>(data.data()), sign, FFTW_ESTIMATE)) {
        if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
    }
    FourierPlan(const FourierPlan&) = delete;
    FourierPlan& operator=(const FourierPlan&) = delete;
    ~FourierPlan() { fftw_destroy_plan(plan_); }

    void execute() { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

// Unnormalized forward transform.
std::vector<Complex> to_momentum(const GridState& state) {
    std::vector<Complex> data = state.amplitudes;
    FourierPlan(data, FFTW_FORWARD).execute();
    return data;
}

void check_same_grid(const GridState& a, const GridState& b) {
    if (!(a.grid == b.grid)) {
        throw ValidationError(fmt::format("grid mismatch: {} points over {} vs {} points over {}",
                                          a.grid.n_points, a.grid.length, b.grid.n_points, b.grid.length));
    }
}

}  // namespace

double Grid::k(std::size_t j) const {
    const auto n = static_cast<std::ptrdiff_t>(n_points);
    auto m = static_cast<std::ptrdiff_t>(j);
    if (m >= n / 2) m -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(m) / length;
}

void validate(const Grid& grid) {
    if (grid.n_points < 2 || (grid.n_points & (grid.n_points - 1)) != 0) {
        throw ValidationError(fmt::format("grid size {} is not a power of two", grid.n_points));
    }
    if (!(grid.length > 0.0)) throw ValidationError("grid length must be positive");
}

double GridState::norm() const {
    double total = 0.0;
    for (const Complex& a : amplitudes) total += std::norm(a);
    return total * grid.dx();
}

bool near_seam(const GridState& state) {
    const std::size_t n = state.amplitudes.size();
    double mass = 0.0;
    for (std::size_t j = 0; j < std::min(kSeamPoints, n); ++j) {
        mass += std::norm(state.amplitudes[j]) + std::norm(state.amplitudes[n - 1 - j]);
    }
    return mass * state.grid.dx() >= kSeamMass;
}

GridState gaussian_packet(const Grid& grid, double center, double sigma, double momentum) {
    validate(grid);
    if (!(sigma >= 4.0 * grid.dx())) {
        throw ValidationError(fmt::format("width {} is below 4 dx = {}", sigma, 4.0 * grid.dx()));
    }
    const double half = 0.5 * grid.length;
    if (center - 6.0 * sigma < -half || center + 6.0 * sigma > half) {
        throw ValidationError(fmt::format("packet at {} with width {} is within 6 sigma of the boundary",
                                          center, sigma));
    }
    GridState s{grid, std::vector<Complex>(grid.n_points), 0.0, false};
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double u = grid.x(j) - center;
        s.amplitudes[j] = std::exp(Complex{-u * u / (4.0 * sigma * sigma), momentum * grid.x(j)});
    }
    const double scale = 1.0 / std::sqrt(s.norm());
    for (Complex& a : s.amplitudes) a *= scale;
    return s;
}

GridState superpose(const GridState& lhs, Complex a, const GridState& rhs, Complex b) {
    check_same_grid(lhs, rhs);
    GridState out{lhs.grid, std::vector<Complex>(lhs.amplitudes.size()), lhs.time, false};
    for (std::size_t j = 0; j < out.amplitudes.size(); ++j) {
        out.amplitudes[j] = a * lhs.amplitudes[j] + b * rhs.amplitudes[j];
    }
    const double norm = out.norm();
    if (!(norm > 0.0)) throw ValidationError("superposition vanishes");
    const double scale = 1.0 / std::sqrt(norm);
    for (Complex& c : out.amplitudes) c *= scale;
    out.boundary_warning = near_seam(out);
    return out;
}

GridState free_evolve(const GridState& state, double dt) {
    GridState out = state;
    out.time = state.time + dt;
    if (dt == 0.0) return out;
    const std::size_t n = state.grid.n_points;
    FourierPlan forward(out.amplitudes, FFTW_FORWARD);
    FourierPlan backward(out.amplitudes, FFTW_BACKWARD);
    forward.execute();
    for (std::size_t j = 0; j < n; ++j) {
        const double k = state.grid.k(j);
        out.amplitudes[j] *= std::exp(Complex{0.0, -0.5 * k * k * dt}) / static_cast<double>(n);
    }
    backward.execute();
    out.boundary_warning = state.boundary_warning || near_seam(out);
    return out;
}

double inner_product_magnitude(const GridState& a, const GridState& b) {
    check_same_grid(a, b);
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j < a.amplitudes.size(); ++j) acc += std::conj(a.amplitudes[j]) * b.amplitudes[j];
    return std::abs(acc) * a.grid.dx();
}

double mean_position(const GridState& state) {
    double first = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < state.amplitudes.size(); ++j) {
        const double w = std::norm(state.amplitudes[j]);
        first += w * state.grid.x(j);
        total += w;
    }
    return first / total;
}

double position_spread(const GridState& state) {
    const double mean = mean_position(state);
    double second = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < state.amplitudes.size(); ++j) {
        const double w = std::norm(state.amplitudes[j]);
        const double u = state.grid.x(j) - mean;
        second += w * u * u;
        total += w;
    }
    return std::sqrt(second / total);
}

double mean_momentum(const GridState& state) {
    const std::vector<Complex> phi = to_momentum(state);
    double first = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double w = std::norm(phi[j]);
        first += w * state.grid.k(j);
        total += w;
    }
    return first / total;
}

double mean_square_momentum(const GridState& state) {
    const std::vector<Complex> phi = to_momentum(state);
    double second = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double w = std::norm(phi[j]);
        const double k = state.grid.k(j);
        second += w * k * k;
        total += w;
    }
    return second / total;
}

double mass_in(const GridState& state, const Interval& interval) {
    double mass = 0.0;
    for (std::size_t j = 0; j < state.amplitudes.size(); ++j) {
        if (interval.contains(state.grid.x(j))) mass += std::norm(state.amplitudes[j]);
    }
    return mass * state.grid.dx();
}

Interval support_interval(const GridState& state, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw ValidationError("support cutoff must lie in (0, 1)");
    const double dx = state.grid.dx();
    const double center = mean_position(state);
    const double total = state.norm();
    const double target = (1.0 - cutoff) * total;
    const std::size_t n = state.amplitudes.size();
    // Index nearest to the centre; grow symmetrically one point at a time.
    const auto mid = static_cast<std::size_t>(
        std::clamp(std::lround((center - state.grid.x(0)) / dx), 0L, static_cast<long>(n - 1)));
    double mass = std::norm(state.amplitudes[mid]) * dx;
    std::size_t lo = mid;
    std::size_t hi = mid;
    while (mass < target && (lo > 0 || hi + 1 < n)) {
        if (lo > 0) mass += std::norm(state.amplitudes[--lo]) * dx;
        if (hi + 1 < n) mass += std::norm(state.amplitudes[++hi]) * dx;
    }
    return {state.grid.x(lo), state.grid.x(hi) + dx};
}

TypicalityReport support_condition_check(const GridState& at_t1, const Interval& region1,
                                         const GridState& at_t2, const Interval& region2,
                                         double threshold) {
    check_same_grid(at_t1, at_t2);
    GridState first = at_t1;
    for (std::size_t j = 0; j < first.amplitudes.size(); ++j) {
        if (!region1.contains(first.grid.x(j))) first.amplitudes[j] = 0.0;
    }
    first = free_evolve(first, at_t2.time - at_t1.time);
    GridState second = at_t2;
    for (std::size_t j = 0; j < second.amplitudes.size(); ++j) {
        if (!region2.contains(second.grid.x(j))) second.amplitudes[j] = 0.0;
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < first.amplitudes.size(); ++j) {
        diff += std::norm(first.amplitudes[j] - second.amplitudes[j]);
    }
    const double dx = at_t1.grid.dx();
    return typicality_from_masses(diff * dx, first.norm(), second.norm(), threshold);
}

SeparationPoint counter_propagation_point(const CounterPropagation& setup, double separation_sigmas) {
    const double half_gap = 0.5 * separation_sigmas * setup.sigma;
    const GridState left = gaussian_packet(setup.grid, -half_gap, setup.sigma, -setup.momentum);
    const GridState right = gaussian_packet(setup.grid, half_gap, setup.sigma, setup.momentum);
    const GridState at_t1 = superpose(left, 1.0, right, 1.0);
    const GridState at_t2 = free_evolve(at_t1, setup.dt);
    const GridState left_t2 = free_evolve(left, setup.dt);

    const Interval left_half{-0.5 * setup.grid.length, 0.0};
    const Interval left_support = support_interval(left_t2, setup.cutoff);
    const TypicalityReport r = support_condition_check(at_t1, left_half, at_t2, left_support);

    const GridState right_t2 = free_evolve(right, setup.dt);
    SeparationPoint p;
    p.separation_sigmas = separation_sigmas;
    p.m_big = r.m_big;
    p.separation_t2_sigmas =
        (mean_position(right_t2) - mean_position(left_t2)) / position_spread(left_t2);
    p.boundary_warning = at_t2.boundary_warning || left_t2.boundary_warning;
    return p;
}

}  // namespace qtyp::grid
