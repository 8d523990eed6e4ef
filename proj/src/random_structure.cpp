#include "qtyp/random_structure.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

namespace {

Complex gaussian(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

}  // namespace

Matrix random_unitary(Rng& rng, std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix z(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) z(r, c) = gaussian(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double mag = std::abs(r(k, k));
        if (mag > 0.0) q.col(k) *= r(k, k) / mag;
    }
    return q;
}

Vector random_state(Rng& rng, std::size_t dim) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gaussian(rng);
    return v / v.norm();
}

QuantumStructure random_structure(Rng& rng, std::size_t dim, std::size_t steps, std::size_t cell_count) {
    if (cell_count == 0 || cell_count > dim) {
        throw ValidationError(fmt::format("cannot split {} basis vectors into {} cells", dim, cell_count));
    }
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    // The first cell_count shuffled vectors seed one cell each; the rest land anywhere.
    std::vector<Cell> cells(cell_count);
    for (std::size_t c = 0; c < cell_count; ++c) {
        cells[c].label = fmt::format("c{}", c);
        cells[c].basis.push_back(order[c]);
    }
    std::uniform_int_distribution<std::size_t> pick(0, cell_count - 1);
    for (std::size_t i = cell_count; i < dim; ++i) cells[pick(rng)].basis.push_back(order[i]);
    for (Cell& c : cells) std::sort(c.basis.begin(), c.basis.end());

    std::vector<StepOperator> schedule;
    for (std::size_t k = 0; k < steps; ++k) schedule.push_back(StepOperator::dense(random_unitary(rng, dim)));
    return QuantumStructure(random_state(rng, dim), std::move(schedule), std::move(cells), "random");
}

SSet random_sset(Rng& rng, const QuantumStructure& structure) {
    std::uniform_int_distribution<TimeIndex> time(0, structure.final_time());
    std::bernoulli_distribution coin(0.5);
    SSet s{time(rng), {}};
    while (s.region.empty()) {
        for (const Cell& c : structure.cells()) {
            if (coin(rng)) s.region.insert(c.label);
        }
    }
    return s;
}

}  // namespace qtyp
