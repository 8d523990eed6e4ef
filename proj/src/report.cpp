#include "qtyp/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace qtyp {

namespace {

void write_json(const Json& v, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
        case Json::value_t::number_float:
            out += format_real(v.get<double>());
            return;
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += Json(key).dump();
                out += ": ";
                write_json(item, out, depth + 1);
            }
            out += '\n' + close_pad + '}';
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            bool flat = true;
            for (const Json& item : v) flat = flat && !item.is_structured();
            if (flat) {
                out += '[';
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i > 0) out += ", ";
                    write_json(v[i], out, depth + 1);
                }
                out += ']';
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i > 0) out += ",\n";
                out += pad;
                write_json(v[i], out, depth + 1);
            }
            out += '\n' + close_pad + ']';
            return;
        }
        default:
            out += v.dump();
    }
}

Json real(double value) {
    if (!std::isfinite(value)) return nullptr;
    return value;
}

Json region_json(const Region& r) {
    return Json(std::vector<std::string>(r.begin(), r.end()));
}

}  // namespace

std::string_view tool_version() {
    return QTYP_VERSION;
}

std::string format_real(double value) {
    if (!std::isfinite(value)) return "null";
    std::string text = fmt::format("{:.17g}", value);
    // Keep a marker of floating type so readers do not narrow to integers.
    if (text.find_first_of(".eE") == std::string::npos) text += ".0";
    return text;
}

std::string dump_json(const Json& value) {
    std::string out;
    write_json(value, out, 0);
    out += '\n';
    return out;
}

Json to_json(const SSet& s) {
    return Json{{"time", s.time}, {"region", region_json(s.region)}, {"id", node_id(s.time, s.region)}};
}

Json to_json(const TypicalityReport& r) {
    return Json{{"m_big", real(r.m_big)},
                {"m_small", real(r.m_small)},
                {"norm1_sq", real(r.norm1_sq)},
                {"norm2_sq", real(r.norm2_sq)},
                {"difference", real(r.difference)},
                {"threshold", real(r.threshold)},
                {"verdict", std::string(to_string(r.verdict))}};
}

Json to_json(const AdditivityWitness& w) {
    return Json{{"joint", real(w.joint)},
                {"first", real(w.first)},
                {"second", real(w.second)},
                {"termwise_sum", real(w.first + w.second)},
                {"gap", real(w.gap())}};
}

Json to_json(const TrajectoryGraph& g) {
    Json nodes = Json::array();
    for (const GraphNode& n : g.nodes) {
        nodes.push_back(Json{{"id", n.id},
                             {"slice", n.slice},
                             {"time", n.time},
                             {"region", region_json(n.region)},
                             {"occupation", real(n.occupation)},
                             {"excluded", n.excluded}});
    }
    Json links = Json::array();
    for (const GraphLink& l : g.links) {
        links.push_back(Json{{"a", g.nodes[l.a].id}, {"b", g.nodes[l.b].id}, {"m_big", real(l.m_big)}});
    }
    return Json{{"epsilon_exclude", real(g.epsilon_exclude)},
                {"tau_link", real(g.tau_link)},
                {"slice_count", g.slice_count},
                {"nodes", std::move(nodes)},
                {"excluded", g.excluded_ids()},
                {"links", std::move(links)},
                {"paths", g.path_ids()}};
}

std::string_view to_string(TailMethod m) {
    return m == TailMethod::Enumeration ? "enumeration" : "count-aggregation";
}

Json to_json(const TailMassReport& r) {
    return Json{{"mass", real(r.mass)},
                {"bound", real(r.bound)},
                {"variance_bound", real(r.variance_bound)},
                {"holds", r.holds},
                {"method", std::string(to_string(r.method))}};
}

Json to_json(const CorrespondenceAudit& a) {
    Json marginals = Json::array();
    for (const MarginalCheck& m : a.marginals) {
        marginals.push_back(
            Json{{"sset", to_json(m.sset)}, {"quantum", real(m.quantum)}, {"stochastic", real(m.stochastic)}});
    }
    Json pairs = Json::array();
    for (const PairCheck& p : a.pairs) {
        pairs.push_back(Json{{"s1", node_id(p.s1.time, p.s1.region)},
                             {"s2", node_id(p.s2.time, p.s2.region)},
                             {"quantum", to_json(p.quantum)},
                             {"stochastic", to_json(p.stochastic)},
                             {"in_regime", p.in_regime},
                             {"agree", p.agree},
                             {"majority_holds", p.majority_holds}});
    }
    Json out{{"threshold", real(a.threshold)},
             {"pairing", a.pairing},
             {"passed", a.passed()},
             {"marginals_pass", a.marginals_pass},
             {"marginal_max_error", real(a.marginal_max_error)},
             {"regime_agreement_pass", a.regime_agreement_pass},
             {"regime_pairs", a.regime_pairs},
             {"quantum_only_typical", a.quantum_only_typical},
             {"stochastic_only_typical", a.stochastic_only_typical},
             {"interference_exhibited", a.interference_exhibited},
             {"chained_max_gap", real(a.chained_max_gap)},
             {"mu_additive", a.mu_additive},
             {"mu_additivity_max_error", real(a.mu_additivity_max_error)},
             {"quantum_additivity_max_gap", real(a.quantum_additivity_max_gap)}};
    if (a.chained_witness) {
        const ChainedCheck& c = *a.chained_witness;
        out["chained_witness"] = Json{{"s1", to_json(c.s1)},
                                      {"s2", to_json(c.s2)},
                                      {"quantum_chained", real(c.quantum_chained)},
                                      {"mu_joint", real(c.mu_joint)}};
    } else {
        out["chained_witness"] = nullptr;
    }
    if (a.additivity_witness) {
        const AdditivityCheck& c = *a.additivity_witness;
        out["additivity_witness"] = Json{{"s1", to_json(c.s1)},
                                         {"s1_prime", to_json(c.s1_prime)},
                                         {"s2", to_json(c.s2)},
                                         {"quantum", to_json(c.quantum)},
                                         {"mu_joint", real(c.mu_joint)},
                                         {"mu_first", real(c.mu_first)},
                                         {"mu_second", real(c.mu_second)}};
    } else {
        out["additivity_witness"] = nullptr;
    }
    out["marginals"] = std::move(marginals);
    out["pairs"] = std::move(pairs);
    return out;
}

Json to_json(const grid::SeparationPoint& p) {
    return Json{{"separation_sigmas", real(p.separation_sigmas)},
                {"m_big", real(p.m_big)},
                {"separation_t2_sigmas", real(p.separation_t2_sigmas)},
                {"boundary_warning", p.boundary_warning}};
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string graph_edges_csv(const TrajectoryGraph& g) {
    std::string out = "kind,from,to,value\n";
    for (const GraphLink& l : g.links) {
        out += fmt::format("link,{},{},{}\n", csv_field(g.nodes[l.a].id), csv_field(g.nodes[l.b].id),
                           format_real(l.m_big));
    }
    // Transitions used by at least one path, with the number of paths using them.
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> edges;
    for (const auto& path : g.paths) {
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const std::pair<std::size_t, std::size_t> e{path[i], path[i + 1]};
            auto it = std::find_if(edges.begin(), edges.end(), [&](const auto& x) { return x.first == e; });
            if (it == edges.end()) {
                edges.push_back({e, 1});
            } else {
                ++it->second;
            }
        }
    }
    for (const auto& [e, count] : edges) {
        out += fmt::format("path,{},{},{}\n", csv_field(g.nodes[e.first].id), csv_field(g.nodes[e.second].id),
                           count);
    }
    return out;
}

}  // namespace qtyp
