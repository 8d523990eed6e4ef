#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qtyp/structure.hpp"

namespace qtyp {

// A statistical experiment repeated on `repetitions` independent systems.
struct ExperimentSpec {
    std::vector<double> probs;  // p_s, one per outcome
    std::size_t repetitions = 1;
    double epsilon = 0.1;

    std::size_t outcomes() const { return probs.size(); }
};

void validate(const ExperimentSpec& spec);

// Sequences with outcomes^repetitions above this are aggregated by count
// vector instead of enumerated one by one.
inline constexpr std::size_t kEnumerationLimit = std::size_t{1} << 20;
// Upper bound on the number of count vectors visited by the aggregation.
inline constexpr std::size_t kAggregationLimit = 20'000'000;

double frequency(std::size_t outcome, std::span<const std::size_t> sequence);

// Sum over outcomes of (f_s - p_s)^2.
double deviation(std::span<const std::size_t> sequence, std::span<const double> probs);
double deviation_from_counts(std::span<const std::size_t> counts, std::size_t total,
                             std::span<const double> probs);

enum class TailMethod { Enumeration, CountAggregation };

struct TailMassReport {
    double mass = 0.0;
    // 1 / (epsilon N)
    double bound = 0.0;
    // sum_s p_s (1 - p_s) / (epsilon N), the Markov inequality on E[delta]
    double variance_bound = 0.0;
    bool holds = false;
    TailMethod method = TailMethod::Enumeration;
};

// Total weight prod p_{s_i} of the sequences whose deviation is >= epsilon.
double typical_set_complement_mass(const ExperimentSpec& spec);
TailMassReport tail_mass_report(const ExperimentSpec& spec);

// outcomes^repetitions, or 0 when it overflows std::size_t.
std::size_t sequence_space(std::size_t outcomes, std::size_t repetitions);

// Outcome digits joined with '.', most significant repetition first.
std::string sequence_label(std::span<const std::size_t> sequence);
std::vector<std::size_t> sequence_of_index(std::size_t index, std::size_t outcomes,
                                           std::size_t repetitions);

// One system after another is measured: step k splits system k into the
// outcome cells with amplitudes sqrt(p_s). Each outcome sequence is its own
// cell; the final time equals the number of repetitions.
QuantumStructure build_measurement_chain(const ExperimentSpec& spec);

// Cells of outcome sequences with deviation < epsilon, and the rest.
Region typical_region(const ExperimentSpec& spec);
Region atypical_region(const ExperimentSpec& spec);

// N p_s per outcome.
std::vector<double> born_frequency_report(const ExperimentSpec& spec);

}  // namespace qtyp
