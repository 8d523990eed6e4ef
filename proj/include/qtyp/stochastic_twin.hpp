#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtyp/structure.hpp"
#include "qtyp/typicality.hpp"

namespace qtyp {

// Finite Markov chain over cell labels. kernels[k](a, b) is the probability
// of moving from state a at time k to state b at time k + 1.
struct StochasticProcessSpec {
    std::vector<std::string> states;
    std::vector<double> initial;
    std::vector<Eigen::MatrixXd> kernels;

    TimeIndex final_time() const { return kernels.size(); }
};

void validate(const StochasticProcessSpec& spec);

// Single-time distribution mu[(t, .)].
std::vector<double> marginal(const StochasticProcessSpec& spec, TimeIndex t);

// mu(S_1 cap ... cap S_n) by masked forward propagation. Empty list -> 1.
double cylinder_measure(const StochasticProcessSpec& spec, std::vector<SSet> ssets);

// mu(S1 cap not S2) + mu(not S1 cap S2)
double mu_symmetric_difference(const StochasticProcessSpec& spec, const SSet& s1, const SSet& s2);

TypicalityReport mutual_typicality_mu(const StochasticProcessSpec& spec, const SSet& s1,
                                      const SSet& s2, double threshold = kDefaultTypicalityThreshold);

enum class KernelSource { ChainedNorm, Marginal };

struct MatchedChain {
    StochasticProcessSpec spec;
    std::vector<KernelSource> sources;
};

// Chain whose single-time marginals equal the quantum occupations. Step k
// uses the transfer ||E(b) U_k E(a) Psi(k)||^2 / ||E(a) Psi(k)||^2 when that
// reproduces the next occupations, otherwise rows equal to the next
// occupations.
MatchedChain matched_chain(const QuantumStructure& structure);

struct MarginalCheck {
    SSet sset;
    double quantum = 0.0;
    double stochastic = 0.0;
};

struct PairCheck {
    SSet s1;
    SSet s2;
    TypicalityReport quantum;
    TypicalityReport stochastic;
    bool in_regime = false;
    bool agree = false;
    // mu(S1 cap S2) >= (1 - M_mu) max(mu(S1), mu(S2))
    bool majority_holds = true;
};

struct ChainedCheck {
    SSet s1;
    SSet s2;
    double quantum_chained = 0.0;
    double mu_joint = 0.0;
};

struct AdditivityCheck {
    SSet s1;
    SSet s1_prime;
    SSet s2;
    AdditivityWitness quantum;
    double mu_joint = 0.0;
    double mu_first = 0.0;
    double mu_second = 0.0;
};

struct CorrespondenceAudit {
    double threshold = kDefaultTypicalityThreshold;
    std::vector<TimeIndex> pairing;

    std::vector<MarginalCheck> marginals;
    double marginal_max_error = 0.0;
    bool marginals_pass = false;

    std::vector<PairCheck> pairs;
    std::size_t regime_pairs = 0;
    std::size_t quantum_only_typical = 0;
    std::size_t stochastic_only_typical = 0;
    bool regime_agreement_pass = false;

    std::optional<ChainedCheck> chained_witness;
    double chained_max_gap = 0.0;
    bool interference_exhibited = false;

    std::optional<AdditivityCheck> additivity_witness;
    double quantum_additivity_max_gap = 0.0;
    double mu_additivity_max_error = 0.0;
    bool mu_additive = false;

    bool passed() const { return marginals_pass && regime_agreement_pass && mu_additive; }
};

inline constexpr double kMarginalTolerance = 1e-10;
inline constexpr double kInterferenceGap = 0.1;

// pairing[t] is the chain time matched with quantum time t; empty means the
// identity alignment.
CorrespondenceAudit correspondence_audit(const QuantumStructure& q, const StochasticProcessSpec& c,
                                         std::vector<TimeIndex> pairing = {},
                                         double threshold = kDefaultTypicalityThreshold);

}  // namespace qtyp
