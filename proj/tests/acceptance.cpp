// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qtyp/random_structure.hpp"
#include "qtyp/scenarios.hpp"
#include "qtyp/stat_typicality.hpp"
#include "qtyp/stochastic_twin.hpp"
#include "qtyp/trajectory_graph.hpp"
#include "qtyp/typicality.hpp"
#include "qtyp/wavepacket.hpp"

namespace {

using namespace qtyp;
using Paths = std::vector<std::vector<std::string>>;

constexpr std::uint64_t kSeed = 20261019;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Paths sorted(Paths p) {
    std::sort(p.begin(), p.end());
    return p;
}

// U3 E_x (i B) E_y (i B) E_z B psi0 with B = [[1, i], [i, 1]] / sqrt2 written out by hand.
Vector hand_chain(int z, int y, int x) {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix b(2, 2);
    b << Complex(s, 0), Complex(0, s), Complex(0, s), Complex(s, 0);
    const Matrix mb = Complex(0, 1) * b;
    auto keep = [](Vector v, int k) {
        v[1 - k] = 0.0;
        return v;
    };
    Vector v(2);
    v << 0.0, 1.0;
    v = keep(b * v, z);
    v = keep(mb * v, y);
    return keep(mb * v, x);
}

Outcome sign_table() {
    const UnruhModel m = build_unruh(false);
    const Vector psi_u = hand_chain(0, 0, 0);
    const Vector psi_d = hand_chain(0, 0, 1);
    double worst = 0.0;
    double worst_hand = 0.0;
    for (const SignEntry& e : unruh_sign_table(m)) {
        const Vector got = chain_project(m.structure, {e.first, e.second, e.third}).amplitudes;
        const Vector& target = e.upper_detector ? psi_u : psi_d;
        worst = std::max(worst, (got - static_cast<double>(e.expected_sign) * target).norm());
        const auto index = [](const SSet& s) { return s.region.count(kUpper) ? 0 : 1; };
        worst_hand = std::max(worst_hand, (got - hand_chain(index(e.first), index(e.second), index(e.third))).norm());
    }
    const double nu = m.psi_upper().norm_sq();
    const double nd = m.psi_lower().norm_sq();
    const bool pass = unruh_sign_table(m).size() == 8 && worst <= 1e-12 && worst_hand <= 1e-12 &&
                      std::abs(nu - 0.125) <= 1e-12 && std::abs(nd - 0.125) <= 1e-12;
    return {pass, fmt::format("max sign error {:.3g}, vs hand chain {:.3g}, |Psi_U|^2={:.15f} |Psi_D|^2={:.15f}",
                              worst, worst_hand, nu, nd)};
}

Outcome which_way() {
    const UnruhModel m = build_unruh(false);
    const double a = mutual_typicality(m.structure, m.upper(1), m.lower(3)).m_big;
    const double b = mutual_typicality(m.structure, m.lower(1), m.upper(3)).m_big;
    const double e = exclusion_measure(m.structure, m.upper(2));
    const Paths paths = sorted(build_graph(m.structure, m.partition()).path_ids());
    const Paths expected = sorted({{"U@1", "U@2", "D@3"}, {"D@1", "U@2", "U@3"}});
    const bool pass = a <= 1e-12 && b <= 1e-12 && e <= 1e-12 && paths == expected;
    return {pass, fmt::format("M(U1,D3)={:.3g} M(D1,U3)={:.3g} excl(U2)={:.3g} paths={}", a, b, e, paths.size())};
}

Outcome detector_variant() {
    const UnruhModel m = build_unruh(true);
    const double click = occupation(m.structure, 2, {kClick});
    const double big = mutual_typicality(m.structure, m.upper(1), m.lower(3)).m_big;
    const Paths paths = sorted(build_graph(m.structure, m.partition()).path_ids());
    const Paths expected = sorted({{"U@1", "U@2", "U@3"},
                                   {"U@1", "U@2", "D@3"},
                                   {"D@1", "U@2", "U@3"},
                                   {"D@1", "U@2", "D@3"}});
    const bool pass = click <= 1e-12 && big >= 0.5 && paths == expected;
    return {pass, fmt::format("click mass at t2={:.3g} M(U1,D3)={:.6f} paths={}", click, big, paths.size())};
}

Outcome inequality_chain() {
    Rng rng(kSeed);
    std::uniform_int_distribution<std::size_t> dims(2, 16);
    std::uniform_int_distribution<std::size_t> steps(1, 4);
    std::size_t draws = 0;
    std::size_t checked = 0;
    std::size_t corollary = 0;
    std::size_t failures = 0;
    double smallest_sqrt_gap = 1.0;
    while (checked < 200) {
        const std::size_t dim = dims(rng);
        std::uniform_int_distribution<std::size_t> cells(2, std::min<std::size_t>(dim, 6));
        const QuantumStructure q = random_structure(rng, dim, steps(rng), cells(rng));
        const TypicalityReport r = mutual_typicality(q, random_sset(rng, q), random_sset(rng, q));
        ++draws;
        if (r.verdict == Verdict::Degenerate || !std::isfinite(r.m_small) || std::sqrt(r.m_big) >= 1.0) continue;
        ++checked;
        if (!check_inequality_chain(r)) ++failures;
        if (r.m_big <= 0.08) {
            ++corollary;
            if (r.m_small > 2.0 * r.m_big + 1e-9) ++failures;
        }
        smallest_sqrt_gap = std::min(smallest_sqrt_gap, std::sqrt(r.m_small) - std::sqrt(r.m_big));
    }
    // A second batch aimed at the corollary range: R against R plus one extra cell.
    std::size_t attempts = 0;
    while (corollary < 100 && attempts < 100000) {
        ++attempts;
        const QuantumStructure q = random_structure(rng, 16, 2, 16);
        SSet a = random_sset(rng, q);
        const Region all = q.all_cells();
        std::vector<std::string> missing;
        for (const std::string& c : all) {
            if (!a.region.count(c)) missing.push_back(c);
        }
        if (missing.empty()) continue;
        SSet b = a;
        b.region.insert(missing[rng() % missing.size()]);
        const TypicalityReport r = mutual_typicality(q, a, b);
        ++draws;
        if (r.verdict == Verdict::Degenerate || r.m_big > 0.08) continue;
        ++checked;
        ++corollary;
        if (!check_inequality_chain(r) || r.m_small > 2.0 * r.m_big + 1e-9) ++failures;
    }
    return {failures == 0 && checked >= 100,
            fmt::format("{} draws, {} non-degenerate checked, {} in corollary range, {} failures, min "
                        "sqrt(m)-sqrt(M)={:.3g}",
                        draws, checked, corollary, failures, smallest_sqrt_gap)};
}

Outcome normalization_identity() {
    Rng rng(kSeed + 1);
    std::uniform_int_distribution<std::size_t> dims(2, 16);
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        const std::size_t dim = dims(rng);
        std::uniform_int_distribution<std::size_t> cells(1, std::min<std::size_t>(dim, 6));
        const QuantumStructure q = random_structure(rng, dim, 3, cells(rng));
        const SSet s = random_sset(rng, q);
        const Vector psi_t = q.state_at(s.time);
        // Oracle: mass outside the region read directly off Psi(t).
        const std::vector<char> inside = q.basis_mask(s.region);
        double outside = 0.0;
        for (std::size_t i = 0; i < q.dim(); ++i) {
            if (!inside[i]) outside += std::norm(psi_t[static_cast<Eigen::Index>(i)]);
        }
        const double m = mutual_typicality(q, SSet{s.time, q.all_cells()}, s).m_big;
        worst = std::max({worst, std::abs(exclusion_measure(q, s) - m), std::abs(outside - m)});
    }
    return {worst <= 1e-12, fmt::format("50 draws, max |excl - M| = {:.3g}", worst)};
}

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& x : p) sum += (x = expo(rng));
    for (double& x : p) x /= sum;
    return p;
}

const std::vector<double> kEpsilons{0.02, 0.05, 0.1, 0.125, 0.25, 0.5};
constexpr int kDraws = 20;

// Random p for the sweep, shared by criteria 6 and 7.
std::vector<std::vector<double>> sweep_probs(std::size_t n) {
    std::mt19937_64 rng(kSeed + n);
    std::vector<std::vector<double>> out;
    for (int d = 0; d < kDraws; ++d) out.push_back(dirichlet(rng, n));
    return out;
}

Outcome tail_bound() {
    const auto start = std::chrono::steady_clock::now();
    std::size_t cases = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0;
    for (std::size_t n : {2, 3}) {
        for (const std::vector<double>& p : sweep_probs(n)) {
            for (std::size_t big_n = 1; big_n <= 16; ++big_n) {
                for (double eps : kEpsilons) {
                    const TailMassReport r = tail_mass_report({p, big_n, eps});
                    ++cases;
                    if (!(r.mass < r.bound)) ++violations;
                    worst_ratio = std::max(worst_ratio, r.mass / r.bound);
                }
            }
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Oracle for the reference point: 2 * sum_{k<=4} C(16, k) / 2^16.
    double c = 1.0;
    double oracle = 0.0;
    for (int k = 0; k <= 4; ++k) {
        oracle += 2.0 * c;
        c = c * (16 - k) / (k + 1);
    }
    oracle /= 65536.0;
    const TailMassReport point = tail_mass_report({{0.5, 0.5}, 16, 0.125});
    const bool pass = violations == 0 && std::abs(point.mass - 5034.0 / 65536.0) <= 1e-12 &&
                      std::abs(oracle - 5034.0 / 65536.0) <= 1e-15 && point.bound == 0.5 && seconds < 60.0;
    return {pass, fmt::format("{} cases, {} violations, max mass/bound {:.4f}; reference mass {:.15f} bound {} "
                              "({:.2f} s)",
                              cases, violations, worst_ratio, point.mass, point.bound, seconds)};
}

Outcome oracle_equivalence() {
    std::size_t specs = 0;
    double worst_occ = 0.0;
    double worst_tail = 0.0;
    for (std::size_t n : {2, 3}) {
        for (const std::vector<double>& p : sweep_probs(n)) {
            for (std::size_t big_n = 1; big_n <= 16; ++big_n) {
                const std::size_t space = sequence_space(n, big_n);
                if (space == 0 || space > (std::size_t{1} << 16)) continue;
                const ExperimentSpec base{p, big_n, kEpsilons.front()};
                const QuantumStructure q = build_measurement_chain(base);
                const Vector final_state = q.state_at(big_n);
                for (std::size_t i = 0; i < space; ++i) {
                    const std::vector<std::size_t> seq = sequence_of_index(i, n, big_n);
                    double product = 1.0;
                    for (std::size_t s : seq) product *= p[s];
                    double occ = 0.0;
                    for (std::size_t b : q.cell(sequence_label(seq)).basis) {
                        occ += std::norm(final_state[static_cast<Eigen::Index>(b)]);
                    }
                    worst_occ = std::max(worst_occ, std::abs(occ - product));
                }
                for (double eps : kEpsilons) {
                    const ExperimentSpec spec{p, big_n, eps};
                    const double quantum = exclusion_measure(q, SSet{big_n, typical_region(spec)});
                    worst_tail = std::max(worst_tail, std::abs(quantum - typical_set_complement_mass(spec)));
                    ++specs;
                }
            }
        }
    }
    return {worst_occ <= 1e-10 && worst_tail <= 1e-10,
            fmt::format("{} specs, max occupation error {:.3g}, max tail error {:.3g}", specs, worst_occ,
                        worst_tail)};
}

Outcome nonadditivity() {
    const AdditivityWitness w = nonadditivity_demo();
    const UnruhModel m = build_unruh(false);
    const StochasticProcessSpec c = matched_chain(m.structure).spec;
    const SSet u2 = m.upper(2);
    const double joint = cylinder_measure(c, {SSet{1, {kUpper, kLower}}, u2});
    const double parts = cylinder_measure(c, {m.upper(1), u2}) + cylinder_measure(c, {m.lower(1), u2});
    const bool pass = std::abs(w.joint - 1.0) <= 1e-12 && std::abs(w.first + w.second - 0.5) <= 1e-12 &&
                      std::abs(joint - parts) <= 1e-12;
    return {pass, fmt::format("quantum joint {:.15f} vs termwise {:.15f}; mu joint {:.15f} vs parts {:.15f}", w.joint,
                              w.first + w.second, joint, parts)};
}

Outcome audit() {
    const UnruhModel m = build_unruh(false);
    const CorrespondenceAudit a = correspondence_audit(m.structure, matched_chain(m.structure).spec);
    std::size_t disagreements = 0;
    for (const PairCheck& p : a.pairs) {
        if (p.in_regime && (!p.agree || !p.majority_holds)) ++disagreements;
    }
    const bool pass = a.marginals_pass && a.marginal_max_error <= 1e-10 && a.regime_agreement_pass &&
                      disagreements == 0;
    return {pass, fmt::format("marginal max error {:.3g}, {} pairs in regime, {} disagreements; outside it {} "
                              "quantum-only and {} stochastic-only typical pairs",
                              a.marginal_max_error, a.regime_pairs, disagreements, a.quantum_only_typical,
                              a.stochastic_only_typical)};
}

Outcome grid_regime() {
    const grid::CounterPropagation setup;
    std::vector<double> values;
    bool monotone = true;
    bool small = true;
    for (double sep : {4.0, 6.0, 8.0, 10.0}) {
        const grid::SeparationPoint p = grid::counter_propagation_point(setup, sep);
        if (!values.empty() && !(p.m_big < values.back())) monotone = false;
        if (sep >= 8.0 && !(p.m_big < 0.01)) small = false;
        values.push_back(p.m_big);
    }
    // Drift x0 + k t and width sigma sqrt(1 + (t / 2 sigma^2)^2) on the 4096-point grid.
    const grid::Grid g{4096, 200.0};
    double worst = 0.0;
    for (double sigma : {1.0, 2.0}) {
        const grid::GridState s = grid::gaussian_packet(g, -30.0, sigma, 4.0);
        for (double t : {2.0, 5.0, 8.0}) {
            const grid::GridState later = grid::free_evolve(s, t);
            const double drift = -30.0 + 4.0 * t;
            const double width = sigma * std::sqrt(1.0 + std::pow(t / (2.0 * sigma * sigma), 2));
            worst = std::max({worst, std::abs(grid::mean_position(later) - drift) / std::abs(drift),
                              std::abs(grid::position_spread(later) - width) / width});
        }
    }
    return {monotone && small && worst <= 1e-6,
            fmt::format("M at 4,6,8,10 sigma: {:.3g} {:.3g} {:.3g} {:.3g}; max drift/spread rel error {:.3g}",
                        values[0], values[1], values[2], values[3], worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 unruh sign table", sign_table},
        {"2 which-way identities and two paths", which_way},
        {"3 detector variant and four paths", detector_variant},
        {"4 inequality chain on random draws", inequality_chain},
        {"5 normalization identity", normalization_identity},
        {"6 statistical typicality bound sweep", tail_bound},
        {"7 quantum vs combinatorial tail mass", oracle_equivalence},
        {"8 nonadditivity witness", nonadditivity},
        {"9 correspondence audit", audit},
        {"10 grid wavepacket regime", grid_regime},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        if (!o.pass) ++failed;
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fmt::print("{} criterion {}: {} [{:.2f} s]\n", o.pass ? "PASS" : "FAIL", name, o.detail, seconds);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
