#include "qtyp/structure.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

namespace {

std::size_t checked_power(std::size_t radix, std::size_t count) {
    std::size_t dim = 1;
    for (std::size_t k = 0; k < count; ++k) {
        if (dim > (std::size_t{1} << 40) / radix) {
            throw ResourceError(fmt::format("register {}^{} is too large", radix, count));
        }
        dim *= radix;
    }
    return dim;
}

}  // namespace

StepOperator StepOperator::dense(Matrix unitary) {
    if (unitary.rows() == 0 || unitary.rows() != unitary.cols()) {
        throw ValidationError("step matrix must be square and non-empty");
    }
    StepOperator op;
    op.dim_ = static_cast<std::size_t>(unitary.rows());
    op.matrix_ = std::move(unitary);
    return op;
}

StepOperator StepOperator::on_factor(Matrix unitary, std::size_t radix, std::size_t count,
                                     std::size_t position) {
    if (radix < 1 || count < 1 || position >= count) {
        throw ValidationError(
            fmt::format("bad factor step: radix {}, count {}, position {}", radix, count, position));
    }
    if (unitary.rows() != static_cast<Eigen::Index>(radix) || unitary.cols() != unitary.rows()) {
        throw ValidationError(fmt::format("factor matrix must be {0}x{0}", radix));
    }
    StepOperator op;
    op.matrix_ = std::move(unitary);
    op.radix_ = radix;
    op.count_ = count;
    op.position_ = position;
    op.dim_ = checked_power(radix, count);
    return op;
}

void StepOperator::apply_factor(Vector& state, const Matrix& m) const {
    std::size_t stride = 1;
    for (std::size_t k = position_ + 1; k < count_; ++k) stride *= radix_;
    const std::size_t block = stride * radix_;
    std::vector<Complex> in(radix_);
    std::vector<Complex> rows(radix_ * radix_);
    for (std::size_t r = 0; r < radix_; ++r) {
        for (std::size_t j = 0; j < radix_; ++j) {
            rows[r * radix_ + j] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        }
    }
    Complex* data = state.data();
    for (std::size_t base = 0; base < dim_; base += block) {
        for (std::size_t inner = 0; inner < stride; ++inner) {
            const std::size_t offset = base + inner;
            for (std::size_t j = 0; j < radix_; ++j) in[j] = data[offset + j * stride];
            for (std::size_t r = 0; r < radix_; ++r) {
                // products written out so no NaN-recovery path runs per element
                double re = 0.0;
                double im = 0.0;
                for (std::size_t j = 0; j < radix_; ++j) {
                    const Complex a = rows[r * radix_ + j];
                    re += a.real() * in[j].real() - a.imag() * in[j].imag();
                    im += a.real() * in[j].imag() + a.imag() * in[j].real();
                }
                data[offset + r * stride] = Complex(re, im);
            }
        }
    }
}

void StepOperator::apply(Vector& state) const {
    if (is_dense()) {
        state = matrix_ * state;
    } else {
        apply_factor(state, matrix_);
    }
}

void StepOperator::apply_adjoint(Vector& state) const {
    if (is_dense()) {
        state = matrix_.adjoint() * state;
    } else {
        apply_factor(state, matrix_.adjoint());
    }
}

double StepOperator::unitarity_defect() const {
    const Matrix gram = matrix_.adjoint() * matrix_;
    const Matrix id = Matrix::Identity(matrix_.rows(), matrix_.cols());
    return (gram - id).cwiseAbs().maxCoeff();
}

StepOperator StepOperator::scaled(Complex phase) const {
    StepOperator copy = *this;
    copy.matrix_ *= phase;
    return copy;
}

QuantumStructure::QuantumStructure(Vector psi0, std::vector<StepOperator> schedule,
                                   std::vector<Cell> cells, std::string name)
    : name_(std::move(name)),
      psi0_(std::move(psi0)),
      schedule_(std::move(schedule)),
      cells_(std::move(cells)) {
    const std::size_t n = dim();
    if (n == 0) throw ValidationError("structure dimension must be positive");
    if (std::abs(psi0_.squaredNorm() - 1.0) > kInitialNormTolerance) {
        throw ValidationError(
            fmt::format("initial state is not normalized: ||psi0||^2 = {:.17g}", psi0_.squaredNorm()));
    }
    for (std::size_t k = 0; k < schedule_.size(); ++k) {
        const StepOperator& step = schedule_[k];
        if (step.dim() != n) {
            throw ValidationError(
                fmt::format("step {} acts on dimension {}, structure has {}", k, step.dim(), n));
        }
        const double defect = step.unitarity_defect();
        if (!(defect <= kUnitarityTolerance)) {
            throw ValidationError(fmt::format("step {} is not unitary (defect {:.3g})", k, defect));
        }
    }

    constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
    cell_of_basis_.assign(n, kUnassigned);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const Cell& cell = cells_[c];
        if (cell.label.empty()) throw ValidationError("cell labels must be non-empty");
        if (!cell_ids_.emplace(cell.label, c).second) {
            throw ValidationError(fmt::format("duplicate cell label '{}'", cell.label));
        }
        if (cell.basis.empty()) {
            throw ValidationError(fmt::format("cell '{}' has no basis indices", cell.label));
        }
        for (std::size_t i : cell.basis) {
            if (i >= n) {
                throw ValidationError(
                    fmt::format("cell '{}' references basis index {} >= {}", cell.label, i, n));
            }
            if (cell_of_basis_[i] != kUnassigned) {
                throw ValidationError(fmt::format("basis index {} belongs to cells '{}' and '{}'", i,
                                                  cells_[cell_of_basis_[i]].label, cell.label));
            }
            cell_of_basis_[i] = c;
        }
    }
    const auto missing = std::find(cell_of_basis_.begin(), cell_of_basis_.end(), kUnassigned);
    if (missing != cell_of_basis_.end()) {
        throw ValidationError(fmt::format("basis index {} is not covered by any cell",
                                          std::distance(cell_of_basis_.begin(), missing)));
    }
}

bool QuantumStructure::has_cell(const std::string& label) const {
    return cell_ids_.count(label) != 0;
}

std::size_t QuantumStructure::cell_id(const std::string& label) const {
    const auto it = cell_ids_.find(label);
    if (it == cell_ids_.end()) throw SchemaError(fmt::format("unknown cell label '{}'", label));
    return it->second;
}

const Cell& QuantumStructure::cell(const std::string& label) const {
    return cells_[cell_id(label)];
}

Region QuantumStructure::all_cells() const {
    Region all;
    for (const Cell& c : cells_) all.insert(c.label);
    return all;
}

Region QuantumStructure::complement(const Region& region) const {
    for (const std::string& label : region) cell_id(label);
    Region out;
    for (const Cell& c : cells_) {
        if (region.count(c.label) == 0) out.insert(c.label);
    }
    return out;
}

std::vector<char> QuantumStructure::basis_mask(const Region& region) const {
    std::vector<char> cell_flag(cells_.size(), 0);
    for (const std::string& label : region) cell_flag[cell_id(label)] = 1;
    std::vector<char> mask(dim(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = cell_flag[cell_of_basis_[i]];
    return mask;
}

void QuantumStructure::check_time(TimeIndex t) const {
    if (t > final_time()) {
        throw RangeError(fmt::format("time index {} outside schedule range [0, {}]", t, final_time()));
    }
}

Vector QuantumStructure::state_at(TimeIndex t) const {
    check_time(t);
    Vector state = psi0_;
    for (TimeIndex k = 0; k < t; ++k) schedule_[k].apply(state);
    return state;
}

std::string to_string(const SSet& s) {
    std::string labels;
    for (const std::string& label : s.region) {
        if (!labels.empty()) labels += ',';
        labels += label;
    }
    return fmt::format("({}, {{{}}})", s.time, labels);
}

void validate(const QuantumStructure& structure, const SSet& sset) {
    structure.check_time(sset.time);
    for (const std::string& label : sset.region) structure.cell_id(label);
}

ProjectedVector initial_vector(const QuantumStructure& structure) {
    return {structure.psi0(), 0};
}

ProjectedVector evolve(const QuantumStructure& structure, ProjectedVector state, TimeIndex to_time) {
    structure.check_time(to_time);
    structure.check_time(state.at_time);
    if (static_cast<std::size_t>(state.amplitudes.size()) != structure.dim()) {
        throw ValidationError("vector dimension does not match structure");
    }
    const auto& schedule = structure.schedule();
    while (state.at_time < to_time) {
        schedule[state.at_time].apply(state.amplitudes);
        ++state.at_time;
    }
    while (state.at_time > to_time) {
        --state.at_time;
        schedule[state.at_time].apply_adjoint(state.amplitudes);
    }
    return state;
}

namespace {

void apply_mask(Vector& v, const std::vector<char>& mask) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!mask[static_cast<std::size_t>(i)]) v[i] = Complex{0.0, 0.0};
    }
}

}  // namespace

ProjectedVector heisenberg_project(const QuantumStructure& structure, const SSet& sset,
                                   ProjectedVector state, std::optional<TimeIndex> reference) {
    validate(structure, sset);
    const TimeIndex target = reference.value_or(state.at_time);
    structure.check_time(target);
    state = evolve(structure, std::move(state), sset.time);
    apply_mask(state.amplitudes, structure.basis_mask(sset.region));
    return evolve(structure, std::move(state), target);
}

ProjectedVector project_initial(const QuantumStructure& structure, const SSet& sset,
                                std::optional<TimeIndex> reference) {
    validate(structure, sset);
    const TimeIndex target = reference.value_or(sset.time);
    structure.check_time(target);
    ProjectedVector v{structure.state_at(sset.time), sset.time};
    apply_mask(v.amplitudes, structure.basis_mask(sset.region));
    return evolve(structure, std::move(v), target);
}

ProjectedVector chain_project(const QuantumStructure& structure, std::vector<SSet> ssets) {
    for (const SSet& s : ssets) validate(structure, s);
    std::stable_sort(ssets.begin(), ssets.end(),
                     [](const SSet& a, const SSet& b) { return a.time < b.time; });
    ProjectedVector v = initial_vector(structure);
    for (const SSet& s : ssets) {
        v = evolve(structure, std::move(v), s.time);
        apply_mask(v.amplitudes, structure.basis_mask(s.region));
    }
    return v;
}

double occupation(const QuantumStructure& structure, TimeIndex t, const Region& region) {
    const Vector state = structure.state_at(t);
    const std::vector<char> mask = structure.basis_mask(region);
    double total = 0.0;
    for (Eigen::Index i = 0; i < state.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) total += std::norm(state[i]);
    }
    return total;
}

std::vector<double> cell_occupations(const QuantumStructure& structure, TimeIndex t) {
    const Vector state = structure.state_at(t);
    std::vector<double> occ(structure.cells().size(), 0.0);
    const auto& owner = structure.cell_of_basis();
    for (Eigen::Index i = 0; i < state.size(); ++i) {
        occ[owner[static_cast<std::size_t>(i)]] += std::norm(state[i]);
    }
    return occ;
}

double distance_sq(const QuantumStructure& structure, const ProjectedVector& a,
                   const ProjectedVector& b) {
    const TimeIndex t = std::max(a.at_time, b.at_time);
    const ProjectedVector ea = evolve(structure, a, t);
    const ProjectedVector eb = evolve(structure, b, t);
    return (ea.amplitudes - eb.amplitudes).squaredNorm();
}

}  // namespace qtyp
