#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qtyp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Integer step count; step k of a schedule evolves time k to time k + 1.
using TimeIndex = std::size_t;

// A set of cell labels of a structure's configuration partition.
using Region = std::set<std::string>;

inline constexpr double kUnitarityTolerance = 1e-10;
inline constexpr double kInitialNormTolerance = 1e-12;
inline constexpr double kIdempotenceTolerance = 1e-12;

// One evolution step of a schedule.
//
// Two representations are supported: a dense dim x dim matrix, and a small
// radix x radix matrix acting on a single factor of a register of `count`
// equal-radix factors (dim = radix^count). Factor 0 is the most significant
// digit of the basis index.
class StepOperator {
public:
    static StepOperator dense(Matrix unitary);
    static StepOperator on_factor(Matrix unitary, std::size_t radix, std::size_t count,
                                  std::size_t position);

    std::size_t dim() const { return dim_; }
    bool is_dense() const { return radix_ == 0; }
    const Matrix& matrix() const { return matrix_; }
    std::size_t radix() const { return radix_; }
    std::size_t count() const { return count_; }
    std::size_t position() const { return position_; }

    void apply(Vector& state) const;
    void apply_adjoint(Vector& state) const;

    // max |U^dagger U - I| over entries of the stored matrix.
    double unitarity_defect() const;

    // A copy multiplied by a global phase factor.
    StepOperator scaled(Complex phase) const;

private:
    StepOperator() = default;
    void apply_factor(Vector& state, const Matrix& m) const;

    Matrix matrix_;
    std::size_t dim_ = 0;
    std::size_t radix_ = 0;
    std::size_t count_ = 0;
    std::size_t position_ = 0;
};

struct Cell {
    std::string label;
    std::vector<std::size_t> basis;
};

// Hilbert space dimension, initial state, step unitaries and a labelled
// partition of the basis indices (the projection-valued measure).
class QuantumStructure {
public:
    QuantumStructure(Vector psi0, std::vector<StepOperator> schedule, std::vector<Cell> cells,
                     std::string name = {});

    const std::string& name() const { return name_; }
    std::size_t dim() const { return static_cast<std::size_t>(psi0_.size()); }
    const Vector& psi0() const { return psi0_; }
    const std::vector<StepOperator>& schedule() const { return schedule_; }
    TimeIndex final_time() const { return schedule_.size(); }
    const std::vector<Cell>& cells() const { return cells_; }

    bool has_cell(const std::string& label) const;
    const Cell& cell(const std::string& label) const;
    std::size_t cell_id(const std::string& label) const;
    // Cell id owning each basis index.
    const std::vector<std::size_t>& cell_of_basis() const { return cell_of_basis_; }

    Region all_cells() const;
    Region complement(const Region& region) const;

    // Per-basis-index membership flags; throws SchemaError on unknown labels.
    std::vector<char> basis_mask(const Region& region) const;

    void check_time(TimeIndex t) const;

    // Psi(t) = U(t) psi0.
    Vector state_at(TimeIndex t) const;

private:
    std::string name_;
    Vector psi0_;
    std::vector<StepOperator> schedule_;
    std::vector<Cell> cells_;
    std::vector<std::size_t> cell_of_basis_;
    std::unordered_map<std::string, std::size_t> cell_ids_;
};

// Single-time cylinder set: the trajectories that lie in `region` at `time`.
struct SSet {
    TimeIndex time = 0;
    Region region;

    friend bool operator==(const SSet&, const SSet&) = default;
};

std::string to_string(const SSet& s);

// A vector of the Hilbert space expressed at a definite time. Norms do not
// depend on the time of expression.
struct ProjectedVector {
    Vector amplitudes;
    TimeIndex at_time = 0;

    double norm_sq() const { return amplitudes.squaredNorm(); }
};

void validate(const QuantumStructure& structure, const SSet& sset);

ProjectedVector initial_vector(const QuantumStructure& structure);

// Moves the expression time of `state`: forward steps or adjoint steps.
ProjectedVector evolve(const QuantumStructure& structure, ProjectedVector state, TimeIndex to_time);

// Applies the Heisenberg projection U^dagger(t) E(region) U(t) to `state`.
// The result is expressed at `reference` (defaults to the state's time).
ProjectedVector heisenberg_project(const QuantumStructure& structure, const SSet& sset,
                                   ProjectedVector state,
                                   std::optional<TimeIndex> reference = std::nullopt);

// S_hat psi0, expressed at `reference` (defaults to the sset time).
ProjectedVector project_initial(const QuantumStructure& structure, const SSet& sset,
                                std::optional<TimeIndex> reference = std::nullopt);

// Time-ordered product T(S_1 ... S_n) psi0, expressed at the latest sset
// time (time 0 for an empty chain). Equal-time entries compose as an
// intersection.
ProjectedVector chain_project(const QuantumStructure& structure, std::vector<SSet> ssets);

// ||E(region) Psi(t)||^2
double occupation(const QuantumStructure& structure, TimeIndex t, const Region& region);

// ||E(cell) Psi(t)||^2 for every cell, in declaration order.
std::vector<double> cell_occupations(const QuantumStructure& structure, TimeIndex t);

// ||a - b||^2 after bringing both vectors to the later expression time.
double distance_sq(const QuantumStructure& structure, const ProjectedVector& a,
                   const ProjectedVector& b);

}  // namespace qtyp
