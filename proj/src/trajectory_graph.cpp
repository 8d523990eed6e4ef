#include "qtyp/trajectory_graph.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qtyp/errors.hpp"

namespace qtyp {

std::string node_id(TimeIndex time, const Region& region) {
    std::string label;
    for (const std::string& cell : region) {
        if (!label.empty()) label += '+';
        label += cell;
    }
    return fmt::format("{}@{}", label, time);
}

std::vector<std::string> TrajectoryGraph::excluded_ids() const {
    std::vector<std::string> out;
    for (const GraphNode& n : nodes) {
        if (n.excluded) out.push_back(n.id);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> TrajectoryGraph::link_ids() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const GraphLink& l : links) out.emplace_back(nodes[l.a].id, nodes[l.b].id);
    return out;
}

std::vector<std::vector<std::string>> TrajectoryGraph::path_ids() const {
    std::vector<std::vector<std::string>> out;
    out.reserve(paths.size());
    for (const auto& path : paths) {
        std::vector<std::string> ids;
        for (std::size_t n : path) ids.push_back(nodes[n].id);
        out.push_back(std::move(ids));
    }
    return out;
}

void validate(const QuantumStructure& structure, const PartitionSchedule& schedule) {
    if (schedule.empty()) throw ValidationError("partition schedule has no slices");
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        const PartitionSlice& slice = schedule[s];
        structure.check_time(slice.time);
        if (slice.regions.empty()) throw ValidationError(fmt::format("slice {} has no regions", s));
        Region seen;
        for (const Region& region : slice.regions) {
            if (region.empty()) throw ValidationError(fmt::format("slice {} has an empty region", s));
            for (const std::string& label : region) {
                structure.cell_id(label);
                if (!seen.insert(label).second) {
                    throw ValidationError(
                        fmt::format("slice {} lists cell '{}' in two regions", s, label));
                }
            }
        }
        if (seen.size() != structure.cells().size()) {
            throw ValidationError(fmt::format("slice {} does not cover every cell", s));
        }
    }
}

namespace {

void check_unit_interval(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw ValidationError(fmt::format("{} = {} outside (0, 1)", what, v));
}

}  // namespace

TrajectoryGraph build_graph(const QuantumStructure& structure, const PartitionSchedule& schedule,
                            double epsilon_exclude, double tau_link) {
    validate(structure, schedule);
    check_unit_interval(epsilon_exclude, "epsilon_exclude");
    check_unit_interval(tau_link, "tau_link");

    TrajectoryGraph g;
    g.epsilon_exclude = epsilon_exclude;
    g.tau_link = tau_link;
    g.slice_count = schedule.size();

    std::vector<std::vector<std::size_t>> candidates(schedule.size());
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        const PartitionSlice& slice = schedule[s];
        const std::vector<double> occ = cell_occupations(structure, slice.time);
        for (const Region& region : slice.regions) {
            GraphNode node;
            node.id = node_id(slice.time, region);
            node.slice = s;
            node.time = slice.time;
            node.region = region;
            for (const std::string& label : region) node.occupation += occ[structure.cell_id(label)];
            node.excluded = node.occupation <= epsilon_exclude;
            if (!node.excluded) candidates[s].push_back(g.nodes.size());
            g.nodes.push_back(std::move(node));
        }
    }

    for (std::size_t a = 0; a < g.nodes.size(); ++a) {
        if (g.nodes[a].excluded) continue;
        for (std::size_t b = a + 1; b < g.nodes.size(); ++b) {
            if (g.nodes[b].excluded || g.nodes[b].slice == g.nodes[a].slice) continue;
            const TypicalityReport r =
                mutual_typicality(structure, g.nodes[a].sset(), g.nodes[b].sset(), tau_link);
            if (r.verdict == Verdict::MutuallyTypical) g.links.push_back({a, b, r.m_big});
        }
    }

    std::size_t space = 1;
    for (const auto& c : candidates) {
        if (c.empty()) return g;
        if (space > kMaxPathSpace / c.size()) {
            throw ResourceError(fmt::format("path space exceeds {}", kMaxPathSpace));
        }
        space *= c.size();
    }

    std::vector<std::size_t> digit(schedule.size(), 0);
    std::vector<std::size_t> path(schedule.size());
    for (std::size_t count = 0; count < space; ++count) {
        for (std::size_t s = 0; s < schedule.size(); ++s) path[s] = candidates[s][digit[s]];
        const bool admissible = std::all_of(g.links.begin(), g.links.end(), [&](const GraphLink& l) {
            const bool visits_a = path[g.nodes[l.a].slice] == l.a;
            const bool visits_b = path[g.nodes[l.b].slice] == l.b;
            return visits_a == visits_b;
        });
        if (admissible) g.paths.push_back(path);
        for (std::size_t s = schedule.size(); s-- > 0;) {
            if (++digit[s] < candidates[s].size()) break;
            digit[s] = 0;
        }
    }
    return g;
}

PartitionSchedule cellwise_schedule(const QuantumStructure& structure, TimeIndex first,
                                    TimeIndex last) {
    structure.check_time(first);
    structure.check_time(last);
    PartitionSchedule schedule;
    for (TimeIndex t = first; t <= last; ++t) {
        PartitionSlice slice{t, {}};
        for (const Cell& c : structure.cells()) slice.regions.push_back({c.label});
        schedule.push_back(std::move(slice));
    }
    return schedule;
}

bool branch_following_check(const QuantumStructure& structure, const std::vector<SSet>& branch,
                            double tau) {
    check_unit_interval(tau, "tau");
    for (const SSet& s : branch) validate(structure, s);
    for (std::size_t i = 1; i < branch.size(); ++i) {
        if (branch[i].time < branch[i - 1].time) {
            throw ValidationError("branch s-sets must be time-ordered");
        }
    }
    for (std::size_t i = 0; i < branch.size(); ++i) {
        const SSet outside{branch[i].time, structure.complement(branch[i].region)};
        for (std::size_t j = i + 1; j < branch.size(); ++j) {
            const TypicalityReport r = mutual_typicality(structure, branch[i], branch[j], tau);
            if (r.verdict == Verdict::MutuallyTypical) continue;
            const double later = project_initial(structure, branch[j]).norm_sq();
            const double leaked = chain_project(structure, {outside, branch[j]}).norm_sq();
            if (leaked > tau * later + kDegenerateNormSq) return false;
        }
    }
    return true;
}

}  // namespace qtyp
