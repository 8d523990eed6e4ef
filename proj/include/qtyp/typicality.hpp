#pragma once

#include <string_view>

#include "qtyp/structure.hpp"

namespace qtyp {

enum class Verdict { MutuallyTypical, NotTypical, Degenerate };

std::string_view to_string(Verdict v);

// Cutoff used for "M << 1" unless a caller supplies one. At this value the
// two normalizations differ by at most a factor of two.
inline constexpr double kDefaultTypicalityThreshold = 0.08;

// Both projected norms below this are treated as a dead branch.
inline constexpr double kDegenerateNormSq = 1e-14;

inline constexpr double kInequalityTolerance = 1e-9;

// Mutual typicality of two s-sets, quantum (M_Psi, m_Psi) or probabilistic
// (M_mu, m_mu). For a degenerate pair both measures are NaN. When only the
// smaller norm vanishes m_small is +inf.
struct TypicalityReport {
    double m_big = 0.0;
    double m_small = 0.0;
    double norm1_sq = 0.0;
    double norm2_sq = 0.0;
    // ||S1 psi0 - S2 psi0||^2, or mu(S1 symmetric-difference S2).
    double difference = 0.0;
    double threshold = kDefaultTypicalityThreshold;
    Verdict verdict = Verdict::Degenerate;
};

// Builds a report from the difference mass and the two set masses.
TypicalityReport typicality_from_masses(double difference, double norm1_sq, double norm2_sq,
                                        double threshold);

TypicalityReport mutual_typicality(const QuantumStructure& structure, const SSet& s1, const SSet& s2,
                                   double threshold = kDefaultTypicalityThreshold);

// sqrt(M) <= sqrt(m) <= sqrt(M) / (1 - sqrt(M)), plus m <= 2M whenever
// M <= 0.08. The upper bound is skipped when sqrt(M) >= 1.
bool check_inequality_chain(const TypicalityReport& report);

// The same chain without square roots, for the probabilistic measures.
bool check_inequality_chain_mu(const TypicalityReport& report);

// ||E(complement of region) Psi(t)||^2
double exclusion_measure(const QuantumStructure& structure, const SSet& sset);

// M_mu and m_mu from mu(S1), mu(S2) and mu(S1 symmetric-difference S2).
// Throws ValidationError on an inconsistent triple.
TypicalityReport mutual_typicality_measure_mu(double mu1, double mu2, double mu_symm_diff,
                                              double threshold = kDefaultTypicalityThreshold);

// Values of ||S2 (S1 + S1') psi0||^2, ||S2 S1 psi0||^2 and ||S2 S1' psi0||^2
// for disjoint equal-time S1, S1'.
struct AdditivityWitness {
    double joint = 0.0;
    double first = 0.0;
    double second = 0.0;

    double gap() const;
};

AdditivityWitness chained_additivity(const QuantumStructure& structure, const SSet& s1,
                                     const SSet& s1_prime, const SSet& s2);

}  // namespace qtyp
