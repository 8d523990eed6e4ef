#pragma once

#include <cstddef>
#include <random>

#include "qtyp/structure.hpp"

namespace qtyp {

using Rng = std::mt19937_64;

// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
// of R's diagonal moved into Q.
Matrix random_unitary(Rng& rng, std::size_t dim);

// Unit vector with independent complex Gaussian entries.
Vector random_state(Rng& rng, std::size_t dim);

// Random unitary steps and a random partition of the basis into `cell_count`
// non-empty cells labelled c0, c1, ...
QuantumStructure random_structure(Rng& rng, std::size_t dim, std::size_t steps, std::size_t cell_count);

// Uniform time in [0, final_time] and a non-empty region chosen by coin flips.
SSet random_sset(Rng& rng, const QuantumStructure& structure);

}  // namespace qtyp
