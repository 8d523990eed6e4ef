#include "qtyp/stat_typicality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

void validate(const ExperimentSpec& spec) {
    if (spec.probs.empty()) throw ValidationError("experiment needs at least one outcome");
    double total = 0.0;
    for (double p : spec.probs) {
        if (!(p >= 0.0)) throw ValidationError(fmt::format("negative outcome probability {}", p));
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError(fmt::format("outcome probabilities sum to {:.17g}", total));
    }
    if (spec.repetitions < 1) throw ValidationError("repetitions must be at least 1");
    if (!(spec.epsilon > 0.0)) throw ValidationError(fmt::format("epsilon {} must be positive", spec.epsilon));
}

double frequency(std::size_t outcome, std::span<const std::size_t> sequence) {
    if (sequence.empty()) throw ValidationError("frequency of an empty sequence");
    const auto hits = std::count(sequence.begin(), sequence.end(), outcome);
    return static_cast<double>(hits) / static_cast<double>(sequence.size());
}

double deviation_from_counts(std::span<const std::size_t> counts, std::size_t total,
                             std::span<const double> probs) {
    if (counts.size() != probs.size()) {
        throw ValidationError(
            fmt::format("{} outcome counts for {} probabilities", counts.size(), probs.size()));
    }
    if (total == 0) throw ValidationError("deviation of an empty sequence");
    double d = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        const double diff = static_cast<double>(counts[s]) / static_cast<double>(total) - probs[s];
        d += diff * diff;
    }
    return d;
}

double deviation(std::span<const std::size_t> sequence, std::span<const double> probs) {
    std::vector<std::size_t> counts(probs.size(), 0);
    for (std::size_t s : sequence) {
        if (s >= probs.size()) {
            throw ValidationError(fmt::format("outcome {} out of range for {} outcomes", s, probs.size()));
        }
        ++counts[s];
    }
    return deviation_from_counts(counts, sequence.size(), probs);
}

std::size_t sequence_space(std::size_t outcomes, std::size_t repetitions) {
    std::size_t size = 1;
    for (std::size_t k = 0; k < repetitions; ++k) {
        if (outcomes != 0 && size > std::numeric_limits<std::size_t>::max() / outcomes) return 0;
        size *= outcomes;
    }
    return size;
}

namespace {

double enumerate_tail(const ExperimentSpec& spec) {
    const std::size_t n = spec.outcomes();
    const std::size_t len = spec.repetitions;
    std::vector<std::size_t> sequence(len, 0);
    std::vector<std::size_t> counts(n, 0);
    counts[0] = len;
    const std::size_t space = sequence_space(n, len);
    double mass = 0.0;
    for (std::size_t index = 0; index < space; ++index) {
        if (deviation_from_counts(counts, len, spec.probs) >= spec.epsilon) {
            double weight = 1.0;
            for (std::size_t s : sequence) weight *= spec.probs[s];
            mass += weight;
        }
        for (std::size_t k = len; k-- > 0;) {
            --counts[sequence[k]];
            if (++sequence[k] < n) {
                ++counts[sequence[k]];
                break;
            }
            sequence[k] = 0;
            ++counts[0];
        }
    }
    return mass;
}

// log of N! / (c_1! ... c_n!)
double log_multinomial(std::span<const std::size_t> counts, std::size_t total) {
    double value = std::lgamma(static_cast<double>(total) + 1.0);
    for (std::size_t c : counts) value -= std::lgamma(static_cast<double>(c) + 1.0);
    return value;
}

__extension__ using Wide = unsigned __int128;

// Exact in integers while the coefficient fits in 64 bits.
double multinomial(std::span<const std::size_t> counts, std::size_t total) {
    Wide coef = 1;
    std::size_t remaining = total;
    for (std::size_t c : counts) {
        // C(remaining, c), built incrementally so every partial value is integral.
        Wide binom = 1;
        for (std::size_t k = 1; k <= c; ++k) {
            binom = binom * (remaining - c + k) / k;
            if (binom > std::numeric_limits<std::uint64_t>::max()) {
                return std::exp(log_multinomial(counts, total));
            }
        }
        coef *= binom;
        if (coef > std::numeric_limits<std::uint64_t>::max()) {
            return std::exp(log_multinomial(counts, total));
        }
        remaining -= c;
    }
    return static_cast<double>(coef);
}

std::size_t count_vector_space(std::size_t outcomes, std::size_t total) {
    // C(total + outcomes - 1, outcomes - 1), saturating.
    long double value = 1.0L;
    for (std::size_t k = 1; k < outcomes; ++k) {
        value = value * static_cast<long double>(total + k) / static_cast<long double>(k);
        if (value > 1e18L) return std::numeric_limits<std::size_t>::max();
    }
    return static_cast<std::size_t>(std::llround(value));
}

void aggregate(const ExperimentSpec& spec, std::vector<std::size_t>& counts, std::size_t slot,
               std::size_t remaining, double& mass) {
    const std::size_t n = spec.outcomes();
    if (slot + 1 == n) {
        counts[slot] = remaining;
        if (deviation_from_counts(counts, spec.repetitions, spec.probs) >= spec.epsilon) {
            double weight = multinomial(counts, spec.repetitions);
            for (std::size_t s = 0; s < n; ++s) {
                weight *= std::pow(spec.probs[s], static_cast<double>(counts[s]));
            }
            mass += weight;
        }
        return;
    }
    for (std::size_t c = remaining + 1; c-- > 0;) {
        counts[slot] = c;
        aggregate(spec, counts, slot + 1, remaining - c, mass);
    }
}

double aggregate_tail(const ExperimentSpec& spec) {
    const std::size_t n = spec.outcomes();
    if (count_vector_space(n, spec.repetitions) > kAggregationLimit) {
        throw ResourceError(fmt::format("{} outcomes over {} repetitions exceed the aggregation limit",
                                        n, spec.repetitions));
    }
    std::vector<std::size_t> counts(n, 0);
    double mass = 0.0;
    aggregate(spec, counts, 0, spec.repetitions, mass);
    return mass;
}

bool enumerable(const ExperimentSpec& spec) {
    const std::size_t space = sequence_space(spec.outcomes(), spec.repetitions);
    return space != 0 && space <= kEnumerationLimit;
}

}  // namespace

double typical_set_complement_mass(const ExperimentSpec& spec) {
    validate(spec);
    // rounding in the summation can overshoot a probability slightly
    return std::clamp(enumerable(spec) ? enumerate_tail(spec) : aggregate_tail(spec), 0.0, 1.0);
}

TailMassReport tail_mass_report(const ExperimentSpec& spec) {
    TailMassReport r;
    r.method = enumerable(spec) ? TailMethod::Enumeration : TailMethod::CountAggregation;
    r.mass = typical_set_complement_mass(spec);
    const double scale = spec.epsilon * static_cast<double>(spec.repetitions);
    r.bound = 1.0 / scale;
    double spread = 0.0;
    for (double p : spec.probs) spread += p * (1.0 - p);
    r.variance_bound = spread / scale;
    r.holds = r.mass < r.bound;
    return r;
}

std::string sequence_label(std::span<const std::size_t> sequence) {
    std::string label;
    label.reserve(sequence.size() * 2);
    for (std::size_t k = 0; k < sequence.size(); ++k) {
        if (k != 0) label += '.';
        if (sequence[k] < 10) {
            label += static_cast<char>('0' + sequence[k]);
        } else {
            label += std::to_string(sequence[k]);
        }
    }
    return label;
}

std::vector<std::size_t> sequence_of_index(std::size_t index, std::size_t outcomes,
                                           std::size_t repetitions) {
    std::vector<std::size_t> sequence(repetitions, 0);
    for (std::size_t k = repetitions; k-- > 0;) {
        sequence[k] = index % outcomes;
        index /= outcomes;
    }
    return sequence;
}

namespace {

// Real orthogonal matrix whose first column is sqrt(p).
Matrix preparation_unitary(std::span<const double> probs) {
    const auto n = static_cast<Eigen::Index>(probs.size());
    Eigen::VectorXd target(n);
    for (Eigen::Index s = 0; s < n; ++s) target[s] = std::sqrt(probs[static_cast<std::size_t>(s)]);
    target.normalize();
    Eigen::VectorXd w = -target;
    w[0] += 1.0;
    const double wsq = w.squaredNorm();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    if (wsq > 1e-30) h -= 2.0 * w * w.transpose() / wsq;
    return h.cast<Complex>();
}

std::size_t checked_space(const ExperimentSpec& spec) {
    if (!enumerable(spec)) {
        throw ResourceError(fmt::format("measurement chain of {}^{} sequences exceeds 2^20",
                                        spec.outcomes(), spec.repetitions));
    }
    return sequence_space(spec.outcomes(), spec.repetitions);
}

Region sequence_region(const ExperimentSpec& spec, bool typical) {
    validate(spec);
    const std::size_t space = checked_space(spec);
    const std::size_t n = spec.outcomes();
    const std::size_t len = spec.repetitions;
    std::vector<std::size_t> seq(len, 0);
    std::vector<std::size_t> counts(n, 0);
    counts[0] = len;
    Region region;
    for (std::size_t index = 0; index < space; ++index) {
        const bool is_typical = deviation_from_counts(counts, len, spec.probs) < spec.epsilon;
        if (is_typical == typical) region.insert(region.end(), sequence_label(seq));
        // odometer step, last position fastest, same order as sequence_of_index
        for (std::size_t k = len; k-- > 0;) {
            --counts[seq[k]];
            if (++seq[k] < n) {
                ++counts[seq[k]];
                break;
            }
            seq[k] = 0;
            ++counts[0];
        }
    }
    return region;
}

}  // namespace

QuantumStructure build_measurement_chain(const ExperimentSpec& spec) {
    validate(spec);
    const std::size_t space = checked_space(spec);
    const std::size_t n = spec.outcomes();
    const Matrix prepare = preparation_unitary(spec.probs);

    std::vector<StepOperator> schedule;
    for (std::size_t k = 0; k < spec.repetitions; ++k) {
        schedule.push_back(StepOperator::on_factor(prepare, n, spec.repetitions, k));
    }
    std::vector<Cell> cells;
    cells.reserve(space);
    for (std::size_t index = 0; index < space; ++index) {
        cells.push_back({sequence_label(sequence_of_index(index, n, spec.repetitions)), {index}});
    }
    Vector psi0 = Vector::Zero(static_cast<Eigen::Index>(space));
    psi0[0] = 1.0;
    return QuantumStructure(std::move(psi0), std::move(schedule), std::move(cells),
                            fmt::format("measurement-chain-{}x{}", n, spec.repetitions));
}

Region typical_region(const ExperimentSpec& spec) {
    return sequence_region(spec, true);
}

Region atypical_region(const ExperimentSpec& spec) {
    return sequence_region(spec, false);
}

std::vector<double> born_frequency_report(const ExperimentSpec& spec) {
    validate(spec);
    std::vector<double> counts;
    counts.reserve(spec.probs.size());
    for (double p : spec.probs) counts.push_back(static_cast<double>(spec.repetitions) * p);
    return counts;
}

}  // namespace qtyp
