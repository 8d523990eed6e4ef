#include "qtyp/stochastic_twin.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

namespace {

constexpr double kStochasticTolerance = 1e-12;
constexpr std::size_t kMaxMatchedCells = 4096;
// Audits enumerate every non-empty region when there are at most this many cells.
constexpr std::size_t kSubsetAuditCells = 6;

std::unordered_map<std::string, std::size_t> index_states(const StochasticProcessSpec& spec) {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < spec.states.size(); ++i) idx.emplace(spec.states[i], i);
    return idx;
}

std::vector<char> state_mask(const StochasticProcessSpec& spec,
                             const std::unordered_map<std::string, std::size_t>& idx,
                             const Region& region) {
    std::vector<char> mask(spec.states.size(), 0);
    for (const std::string& label : region) {
        const auto it = idx.find(label);
        if (it == idx.end()) throw SchemaError(fmt::format("unknown state label '{}'", label));
        mask[it->second] = 1;
    }
    return mask;
}

}  // namespace

void validate(const StochasticProcessSpec& spec) {
    const std::size_t n = spec.states.size();
    if (n == 0) throw ValidationError("stochastic process needs at least one state");
    if (index_states(spec).size() != n) throw ValidationError("duplicate state labels");
    if (spec.initial.size() != n) {
        throw ValidationError(fmt::format("initial distribution has {} entries for {} states",
                                          spec.initial.size(), n));
    }
    double total = 0.0;
    for (double p : spec.initial) {
        if (!(p >= 0.0)) throw ValidationError("initial distribution has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > kStochasticTolerance) {
        throw ValidationError(fmt::format("initial distribution sums to {:.17g}", total));
    }
    for (std::size_t k = 0; k < spec.kernels.size(); ++k) {
        const Eigen::MatrixXd& m = spec.kernels[k];
        if (m.rows() != static_cast<Eigen::Index>(n) || m.cols() != static_cast<Eigen::Index>(n)) {
            throw ValidationError(fmt::format("kernel {} is not {}x{}", k, n, n));
        }
        if ((m.array() < 0.0).any()) throw ValidationError(fmt::format("kernel {} has a negative entry", k));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (std::abs(m.row(r).sum() - 1.0) > kStochasticTolerance) {
                throw ValidationError(fmt::format("row {} of kernel {} sums to {:.17g}", r, k, m.row(r).sum()));
            }
        }
    }
}

std::vector<double> marginal(const StochasticProcessSpec& spec, TimeIndex t) {
    if (t > spec.final_time()) {
        throw RangeError(fmt::format("time index {} outside chain range [0, {}]", t, spec.final_time()));
    }
    Eigen::RowVectorXd dist = Eigen::Map<const Eigen::RowVectorXd>(
        spec.initial.data(), static_cast<Eigen::Index>(spec.initial.size()));
    for (TimeIndex k = 0; k < t; ++k) dist = dist * spec.kernels[k];
    return {dist.data(), dist.data() + dist.size()};
}

double cylinder_measure(const StochasticProcessSpec& spec, std::vector<SSet> ssets) {
    const auto idx = index_states(spec);
    std::stable_sort(ssets.begin(), ssets.end(),
                     [](const SSet& a, const SSet& b) { return a.time < b.time; });
    std::vector<std::vector<char>> masks;
    for (const SSet& s : ssets) {
        if (s.time > spec.final_time()) {
            throw RangeError(
                fmt::format("time index {} outside chain range [0, {}]", s.time, spec.final_time()));
        }
        masks.push_back(state_mask(spec, idx, s.region));
    }
    Eigen::RowVectorXd dist = Eigen::Map<const Eigen::RowVectorXd>(
        spec.initial.data(), static_cast<Eigen::Index>(spec.initial.size()));
    if (ssets.empty()) return dist.sum();
    TimeIndex now = 0;
    for (std::size_t i = 0; i < ssets.size(); ++i) {
        while (now < ssets[i].time) dist = dist * spec.kernels[now++];
        for (Eigen::Index s = 0; s < dist.size(); ++s) {
            if (!masks[i][static_cast<std::size_t>(s)]) dist[s] = 0.0;
        }
    }
    return dist.sum();
}

namespace {

Region complement_of(const StochasticProcessSpec& spec, const Region& region) {
    Region out;
    for (const std::string& s : spec.states) {
        if (region.count(s) == 0) out.insert(s);
    }
    return out;
}

}  // namespace

double mu_symmetric_difference(const StochasticProcessSpec& spec, const SSet& s1, const SSet& s2) {
    const SSet not1{s1.time, complement_of(spec, s1.region)};
    const SSet not2{s2.time, complement_of(spec, s2.region)};
    return cylinder_measure(spec, {s1, not2}) + cylinder_measure(spec, {not1, s2});
}

TypicalityReport mutual_typicality_mu(const StochasticProcessSpec& spec, const SSet& s1,
                                      const SSet& s2, double threshold) {
    const double mu1 = cylinder_measure(spec, {s1});
    const double mu2 = cylinder_measure(spec, {s2});
    const double diff = mu_symmetric_difference(spec, s1, s2);
    return mutual_typicality_measure_mu(std::clamp(mu1, 0.0, 1.0), std::clamp(mu2, 0.0, 1.0),
                                        std::clamp(diff, 0.0, 1.0), threshold);
}

MatchedChain matched_chain(const QuantumStructure& structure) {
    const std::size_t n = structure.cells().size();
    if (n > kMaxMatchedCells) {
        throw ResourceError(fmt::format("{} cells exceed the matched-chain limit of {}", n, kMaxMatchedCells));
    }
    MatchedChain out;
    for (const Cell& c : structure.cells()) out.spec.states.push_back(c.label);
    out.spec.initial = cell_occupations(structure, 0);

    const auto& owner = structure.cell_of_basis();
    for (TimeIndex k = 0; k < structure.final_time(); ++k) {
        const Vector state = structure.state_at(k);
        const std::vector<double> now = cell_occupations(structure, k);
        const std::vector<double> next = cell_occupations(structure, k + 1);

        Eigen::MatrixXd chained = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t a = 0; a < n; ++a) {
            if (now[a] < kDegenerateNormSq) {
                for (std::size_t b = 0; b < n; ++b) chained(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = next[b];
                continue;
            }
            Vector branch = Vector::Zero(state.size());
            for (std::size_t i : structure.cells()[a].basis) {
                branch[static_cast<Eigen::Index>(i)] = state[static_cast<Eigen::Index>(i)];
            }
            structure.schedule()[k].apply(branch);
            for (Eigen::Index i = 0; i < branch.size(); ++i) {
                chained(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(owner[static_cast<std::size_t>(i)])) +=
                    std::norm(branch[i]) / now[a];
            }
        }

        bool consistent = true;
        for (std::size_t b = 0; b < n && consistent; ++b) {
            double pushed = 0.0;
            for (std::size_t a = 0; a < n; ++a) pushed += now[a] * chained(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            consistent = std::abs(pushed - next[b]) <= kMarginalTolerance;
        }
        if (consistent) {
            out.spec.kernels.push_back(std::move(chained));
            out.sources.push_back(KernelSource::ChainedNorm);
        } else {
            Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) rows(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = next[b];
            }
            out.spec.kernels.push_back(std::move(rows));
            out.sources.push_back(KernelSource::Marginal);
        }
    }
    // Occupations carry rounding of order 1e-16; renormalize so the spec validates.
    for (Eigen::MatrixXd& m : out.spec.kernels) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) /= m.row(r).sum();
    }
    double total = 0.0;
    for (double p : out.spec.initial) total += p;
    for (double& p : out.spec.initial) p /= total;
    validate(out.spec);
    return out;
}

namespace {

std::vector<Region> audit_regions(const QuantumStructure& q) {
    const auto& cells = q.cells();
    std::vector<Region> regions;
    if (cells.size() <= kSubsetAuditCells) {
        const std::size_t count = std::size_t{1} << cells.size();
        for (std::size_t bits = 1; bits < count; ++bits) {
            Region r;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (bits & (std::size_t{1} << c)) r.insert(cells[c].label);
            }
            regions.push_back(std::move(r));
        }
    } else {
        for (const Cell& c : cells) regions.push_back({c.label});
    }
    return regions;
}

}  // namespace

CorrespondenceAudit correspondence_audit(const QuantumStructure& q, const StochasticProcessSpec& c,
                                         std::vector<TimeIndex> pairing, double threshold) {
    validate(c);
    if (pairing.empty()) {
        for (TimeIndex t = 0; t <= q.final_time(); ++t) pairing.push_back(t);
    }
    if (pairing.size() != q.final_time() + 1) {
        throw ValidationError(fmt::format("time pairing has {} entries, structure has {} times",
                                          pairing.size(), q.final_time() + 1));
    }
    for (TimeIndex t : pairing) {
        if (t > c.final_time()) throw ValidationError(fmt::format("paired chain time {} out of range", t));
    }
    {
        Region chain_states(c.states.begin(), c.states.end());
        if (chain_states != q.all_cells()) {
            throw SchemaError("structure cells and chain states differ");
        }
    }

    CorrespondenceAudit audit;
    audit.threshold = threshold;
    audit.pairing = pairing;
    const auto to_chain = [&](const SSet& s) { return SSet{pairing[s.time], s.region}; };

    const std::vector<Region> regions = audit_regions(q);
    std::vector<SSet> ssets;
    for (TimeIndex t = 0; t <= q.final_time(); ++t) {
        for (const Region& r : regions) ssets.push_back({t, r});
    }

    // Single-time marginals.
    for (const SSet& s : ssets) {
        MarginalCheck m{s, occupation(q, s.time, s.region), cylinder_measure(c, {to_chain(s)})};
        audit.marginal_max_error = std::max(audit.marginal_max_error, std::abs(m.quantum - m.stochastic));
        audit.marginals.push_back(std::move(m));
    }
    audit.marginals_pass = audit.marginal_max_error <= kMarginalTolerance;

    // Mutual typicality in both pictures.
    audit.regime_agreement_pass = true;
    for (std::size_t i = 0; i < ssets.size(); ++i) {
        for (std::size_t j = i + 1; j < ssets.size(); ++j) {
            PairCheck p;
            p.s1 = ssets[i];
            p.s2 = ssets[j];
            p.quantum = mutual_typicality(q, p.s1, p.s2, threshold);
            p.stochastic = mutual_typicality_mu(c, to_chain(p.s1), to_chain(p.s2), threshold);
            if (p.quantum.verdict == Verdict::Degenerate || p.stochastic.verdict == Verdict::Degenerate) {
                continue;
            }
            const bool q_typ = p.quantum.verdict == Verdict::MutuallyTypical;
            const bool s_typ = p.stochastic.verdict == Verdict::MutuallyTypical;
            p.in_regime = q_typ && s_typ;
            p.agree = q_typ == s_typ;
            if (q_typ && !s_typ) ++audit.quantum_only_typical;
            if (s_typ && !q_typ) ++audit.stochastic_only_typical;
            if (s_typ) {
                const double joint = cylinder_measure(c, {to_chain(p.s1), to_chain(p.s2)});
                const double hi = std::max(p.stochastic.norm1_sq, p.stochastic.norm2_sq);
                p.majority_holds = joint >= (1.0 - p.stochastic.m_big) * hi - kMarginalTolerance;
            }
            if (p.in_regime) {
                ++audit.regime_pairs;
                if (!p.agree || !p.majority_holds) audit.regime_agreement_pass = false;
            }
            audit.pairs.push_back(std::move(p));
        }
    }

    // Chained quantum norms against joint measures, on single cells.
    std::vector<SSet> singles;
    for (TimeIndex t = 0; t <= q.final_time(); ++t) {
        for (const Cell& cell : q.cells()) singles.push_back({t, {cell.label}});
    }
    for (const SSet& s1 : singles) {
        for (const SSet& s2 : singles) {
            if (s2.time <= s1.time) continue;
            ChainedCheck w{s1, s2, chain_project(q, {s1, s2}).norm_sq(),
                           cylinder_measure(c, {to_chain(s1), to_chain(s2)})};
            const double gap = std::abs(w.quantum_chained - w.mu_joint);
            if (!audit.chained_witness || gap > audit.chained_max_gap) {
                audit.chained_max_gap = gap;
                audit.chained_witness = w;
            }
        }
    }
    audit.interference_exhibited = audit.chained_max_gap > kInterferenceGap;

    // Additivity over disjoint equal-time pairs.
    audit.mu_additive = true;
    for (std::size_t i = 0; i < singles.size(); ++i) {
        for (std::size_t k = i + 1; k < singles.size(); ++k) {
            if (singles[k].time != singles[i].time) continue;
            for (const SSet& s2 : singles) {
                if (s2.time <= singles[i].time) continue;
                AdditivityCheck a;
                a.s1 = singles[i];
                a.s1_prime = singles[k];
                a.s2 = s2;
                a.quantum = chained_additivity(q, a.s1, a.s1_prime, a.s2);
                SSet joint{a.s1.time, a.s1.region};
                joint.region.insert(a.s1_prime.region.begin(), a.s1_prime.region.end());
                a.mu_joint = cylinder_measure(c, {to_chain(joint), to_chain(s2)});
                a.mu_first = cylinder_measure(c, {to_chain(a.s1), to_chain(s2)});
                a.mu_second = cylinder_measure(c, {to_chain(a.s1_prime), to_chain(s2)});
                const double mu_error = std::abs(a.mu_joint - (a.mu_first + a.mu_second));
                audit.mu_additivity_max_error = std::max(audit.mu_additivity_max_error, mu_error);
                if (!audit.additivity_witness || a.quantum.gap() > audit.quantum_additivity_max_gap) {
                    audit.quantum_additivity_max_gap = a.quantum.gap();
                    audit.additivity_witness = a;
                }
            }
        }
    }
    audit.mu_additive = audit.mu_additivity_max_error <= kMarginalTolerance;
    return audit;
}

}  // namespace qtyp
