#include "qtyp/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

namespace {

constexpr double kMeasureTolerance = 1e-12;

void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ValidationError(fmt::format("typicality threshold {} outside (0, 1)", threshold));
    }
}

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::MutuallyTypical: return "MutuallyTypical";
        case Verdict::NotTypical: return "NotTypical";
        case Verdict::Degenerate: return "Degenerate";
    }
    return "unknown";
}

TypicalityReport typicality_from_masses(double difference, double norm1_sq, double norm2_sq,
                                        double threshold) {
    check_threshold(threshold);
    TypicalityReport r;
    r.difference = difference;
    r.norm1_sq = norm1_sq;
    r.norm2_sq = norm2_sq;
    r.threshold = threshold;
    const double hi = std::max(norm1_sq, norm2_sq);
    const double lo = std::min(norm1_sq, norm2_sq);
    if (hi < kDegenerateNormSq) {
        r.m_big = std::numeric_limits<double>::quiet_NaN();
        r.m_small = std::numeric_limits<double>::quiet_NaN();
        r.verdict = Verdict::Degenerate;
        return r;
    }
    r.m_big = difference / hi;
    r.m_small = lo > 0.0 ? difference / lo : std::numeric_limits<double>::infinity();
    r.verdict = r.m_big <= threshold ? Verdict::MutuallyTypical : Verdict::NotTypical;
    return r;
}

TypicalityReport mutual_typicality(const QuantumStructure& structure, const SSet& s1, const SSet& s2,
                                   double threshold) {
    check_threshold(threshold);
    const TimeIndex reference = std::max(s1.time, s2.time);
    const ProjectedVector v1 = project_initial(structure, s1, reference);
    const ProjectedVector v2 = project_initial(structure, s2, reference);
    const double diff = (v1.amplitudes - v2.amplitudes).squaredNorm();
    return typicality_from_masses(diff, v1.norm_sq(), v2.norm_sq(), threshold);
}

bool check_inequality_chain(const TypicalityReport& report) {
    if (report.verdict == Verdict::Degenerate) {
        throw ValidationError("inequality chain is undefined for a degenerate report");
    }
    const double root_big = std::sqrt(report.m_big);
    const double root_small = std::sqrt(report.m_small);
    if (root_big > root_small + kInequalityTolerance) return false;
    if (root_big < 1.0) {
        if (root_small > root_big / (1.0 - root_big) + kInequalityTolerance) return false;
        if (report.m_big <= kDefaultTypicalityThreshold &&
            report.m_small > 2.0 * report.m_big + kInequalityTolerance) {
            return false;
        }
    }
    return true;
}

bool check_inequality_chain_mu(const TypicalityReport& report) {
    if (report.verdict == Verdict::Degenerate) {
        throw ValidationError("inequality chain is undefined for a degenerate report");
    }
    if (report.m_big > report.m_small + kInequalityTolerance) return false;
    if (report.m_big < 1.0 && report.m_small > report.m_big / (1.0 - report.m_big) + kInequalityTolerance) {
        return false;
    }
    return true;
}

double exclusion_measure(const QuantumStructure& structure, const SSet& sset) {
    structure.check_time(sset.time);
    // occupation of the complement, summed directly off the region mask
    const Vector state = structure.state_at(sset.time);
    const std::vector<char> inside = structure.basis_mask(sset.region);
    double total = 0.0;
    for (Eigen::Index i = 0; i < state.size(); ++i) {
        if (!inside[static_cast<std::size_t>(i)]) total += std::norm(state[i]);
    }
    return total;
}

TypicalityReport mutual_typicality_measure_mu(double mu1, double mu2, double mu_symm_diff,
                                              double threshold) {
    for (double m : {mu1, mu2, mu_symm_diff}) {
        if (!(m >= -kMeasureTolerance && m <= 1.0 + kMeasureTolerance)) {
            throw ValidationError(fmt::format("measure value {} outside [0, 1]", m));
        }
    }
    if (std::abs(mu1 - mu2) > mu_symm_diff + kMeasureTolerance ||
        mu_symm_diff > mu1 + mu2 + kMeasureTolerance) {
        throw ValidationError(fmt::format(
            "inconsistent measures: mu(S1)={}, mu(S2)={}, mu(S1 xor S2)={}", mu1, mu2, mu_symm_diff));
    }
    return typicality_from_masses(mu_symm_diff, mu1, mu2, threshold);
}

double AdditivityWitness::gap() const {
    return std::abs(joint - (first + second));
}

AdditivityWitness chained_additivity(const QuantumStructure& structure, const SSet& s1,
                                     const SSet& s1_prime, const SSet& s2) {
    if (s1.time != s1_prime.time) {
        throw ValidationError("additivity check needs equal-time S1 and S1'");
    }
    for (const std::string& label : s1.region) {
        if (s1_prime.region.count(label) != 0) {
            throw ValidationError(fmt::format("S1 and S1' share cell '{}'", label));
        }
    }
    SSet joint{s1.time, s1.region};
    joint.region.insert(s1_prime.region.begin(), s1_prime.region.end());
    AdditivityWitness w;
    w.joint = chain_project(structure, {joint, s2}).norm_sq();
    w.first = chain_project(structure, {s1, s2}).norm_sq();
    w.second = chain_project(structure, {s1_prime, s2}).norm_sq();
    return w;
}

}  // namespace qtyp
