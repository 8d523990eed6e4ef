#include "qtyp/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qtyp/errors.hpp"
#include "qtyp/report.hpp"
#include "qtyp/scenarios.hpp"
#include "qtyp/stat_typicality.hpp"
#include "qtyp/stochastic_twin.hpp"
#include "qtyp/wavepacket.hpp"

namespace qtyp::cli {

namespace {

constexpr std::string_view kBuiltinPrefix = "builtin:";
const std::vector<double> kSweepEpsilons{0.02, 0.05, 0.1, 0.125, 0.25, 0.5};
constexpr std::size_t kSweepMaxRepetitions = 16;

Format effective_format(const RunConfig& c) {
    if (c.format) return *c.format;
    return c.command == "stat-bound" || c.command == "wavepacket" ? Format::Csv : Format::Json;
}

std::string_view format_name(Format f) {
    return f == Format::Json ? "json" : "csv";
}

Json complex_json(Complex z) {
    return Json::array({z.real(), z.imag()});
}

std::filesystem::path resolve_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv(kOutputDirVariable); dir != nullptr && *dir != '\0') {
            p = std::filesystem::path(dir) / p;
        }
    }
    return p;
}

void write_file(const std::string& path, const std::string& text, std::ostream& err) {
    const std::filesystem::path p = resolve_output(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(fmt::format("cannot write '{}'", p.string()));
    f << text;
    err << "wrote " << p.string() << '\n';
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out, std::ostream& err) {
    if (c.output.empty() || c.output == "-") {
        out << text;
    } else {
        write_file(c.output, text, err);
    }
}

Json thresholds_json(const Thresholds& t) {
    return Json{{"epsilon_exclude", t.epsilon_exclude}, {"tau_link", t.tau_link}, {"typicality", t.typicality}};
}

std::string json_report(const RunConfig& c, Json result) {
    Json doc{{"tool", "qtyp"},
             {"version", std::string(tool_version())},
             {"command", c.command},
             {"config", config_json(c)},
             {"thresholds", thresholds_json(c.thresholds)},
             {"result", std::move(result)}};
    return dump_json(doc);
}

std::string csv_preamble(const RunConfig& c) {
    const Thresholds& t = c.thresholds;
    return fmt::format("# qtyp {} {}\n# thresholds epsilon_exclude={} tau_link={} typicality={}\n# config {}\n",
                       tool_version(), c.command, format_real(t.epsilon_exclude), format_real(t.tau_link),
                       format_real(t.typicality), config_json(c).dump());
}

std::string join_reals(const std::vector<double>& values, std::string_view sep) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) s += sep;
        s += format_real(values[i]);
    }
    return s;
}

std::optional<Arm> obstacle_arm(const RunConfig& c) {
    if (!c.obstacle) return std::nullopt;
    return parse_arm(*c.obstacle);
}

Json occupations_json(const QuantumStructure& q, TimeIndex t) {
    const std::vector<double> occ = cell_occupations(q, t);
    Json j = Json::object();
    for (std::size_t i = 0; i < q.cells().size(); ++i) j[q.cells()[i].label] = occ[i];
    return j;
}

// --- scenario -------------------------------------------------------------

Json unruh_result(const RunConfig& c) {
    const UnruhModel model = build_unruh(UnruhOptions{c.detector_d2, obstacle_arm(c)});
    const QuantumStructure& q = model.structure;
    const double tau = c.thresholds.typicality;

    Json r;
    r["scenario"] = q.name();
    r["options"] = Json{{"detector_d2", c.detector_d2},
                        {"obstacle", c.obstacle ? Json(*c.obstacle) : Json(nullptr)}};
    r["convention"] = Json{{"transmit", complex_json(model.convention.transmit)},
                           {"reflect", complex_json(model.convention.reflect)},
                           {"mirror", complex_json(model.convention.mirror)},
                           {"source_mode", model.convention.source_mode}};
    const ProjectedVector psi_u = model.psi_upper();
    const ProjectedVector psi_d = model.psi_lower();
    r["psi_upper_norm_sq"] = psi_u.norm_sq();
    r["psi_lower_norm_sq"] = psi_d.norm_sq();

    if (!c.detector_d2 && !c.obstacle) {
        Json table = Json::array();
        double worst = 0.0;
        for (const SignEntry& e : unruh_sign_table(model)) {
            const ProjectedVector chained = chain_project(q, {e.first, e.second, e.third});
            const Vector& target = e.upper_detector ? psi_u.amplitudes : psi_d.amplitudes;
            const double error = (chained.amplitudes - static_cast<double>(e.expected_sign) * target).norm();
            worst = std::max(worst, error);
            table.push_back(Json{{"chain", e.chain},
                                 {"expected_sign", e.expected_sign},
                                 {"target", e.upper_detector ? "Psi_U" : "Psi_D"},
                                 {"error", error}});
        }
        r["sign_table"] = std::move(table);
        r["sign_table_max_error"] = worst;
    }

    r["which_way"] = Json{{"U1_D3", to_json(mutual_typicality(q, model.upper(1), model.lower(3), tau))},
                          {"D1_U3", to_json(mutual_typicality(q, model.lower(1), model.upper(3), tau))},
                          {"exclusion_U2", exclusion_measure(q, model.upper(2))}};
    Json occupations = Json::object();
    for (TimeIndex t = 1; t <= q.final_time(); ++t) occupations[std::to_string(t)] = occupations_json(q, t);
    r["occupations"] = std::move(occupations);
    r["graph"] = to_json(build_graph(q, model.partition(), c.thresholds.epsilon_exclude, c.thresholds.tau_link));
    return r;
}

Json fig1_result(const RunConfig& c) {
    const QuantumStructure q = build_beamsplitter_fig1();
    const double tau = c.thresholds.typicality;
    const SSet pa{1, {"A"}};
    const SSet pb{1, {"B"}};
    const SSet da{2, {"A"}};
    const SSet db{2, {"B"}};
    Json r;
    r["scenario"] = q.name();
    r["PA_DA"] = to_json(mutual_typicality(q, pa, da, tau));
    r["PA_DB"] = to_json(mutual_typicality(q, pa, db, tau));
    r["PB_DB"] = to_json(mutual_typicality(q, pb, db, tau));
    r["exclusion_PA"] = exclusion_measure(q, pa);
    r["exclusion_PB"] = exclusion_measure(q, pb);
    r["graph"] = to_json(build_graph(q, cellwise_schedule(q, 1, 2), c.thresholds.epsilon_exclude,
                                     c.thresholds.tau_link));
    return r;
}

Json nonadditivity_result() {
    const AdditivityWitness w = nonadditivity_demo();
    const UnruhModel model = build_unruh(false);
    const MatchedChain chain = matched_chain(model.structure);
    const SSet u2 = model.upper(2);
    const double joint = cylinder_measure(chain.spec, {SSet{1, {kUpper, kLower}}, u2});
    const double first = cylinder_measure(chain.spec, {model.upper(1), u2});
    const double second = cylinder_measure(chain.spec, {model.lower(1), u2});
    Json r;
    r["scenario"] = model.structure.name();
    r["s1"] = to_json(model.upper(1));
    r["s1_prime"] = to_json(model.lower(1));
    r["s2"] = to_json(u2);
    r["quantum"] = to_json(w);
    r["stochastic"] = Json{{"joint", joint},
                           {"first", first},
                           {"second", second},
                           {"additivity_error", std::abs(joint - first - second)}};
    return r;
}

int run_scenario(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.target == "unruh" && !c.export_path.empty()) {
        const UnruhModel model = build_unruh(UnruhOptions{c.detector_d2, obstacle_arm(c)});
        const PartitionSchedule partition = model.partition();
        write_file(c.export_path, dump_json(scenario_to_json(model.structure, &partition)), err);
    }
    if (effective_format(c) == Format::Csv) {
        TrajectoryGraph g;
        if (c.target == "unruh") {
            const UnruhModel model = build_unruh(UnruhOptions{c.detector_d2, obstacle_arm(c)});
            g = build_graph(model.structure, model.partition(), c.thresholds.epsilon_exclude,
                            c.thresholds.tau_link);
        } else if (c.target == "fig1") {
            const QuantumStructure q = build_beamsplitter_fig1();
            g = build_graph(q, cellwise_schedule(q, 1, 2), c.thresholds.epsilon_exclude, c.thresholds.tau_link);
        } else {
            throw ValidationError("csv output is only available for unruh and fig1");
        }
        emit(c, csv_preamble(c) + graph_edges_csv(g), out, err);
        return kOk;
    }
    Json result;
    if (c.target == "unruh") {
        result = unruh_result(c);
    } else if (c.target == "fig1") {
        result = fig1_result(c);
    } else {
        result = nonadditivity_result();
    }
    emit(c, json_report(c, std::move(result)), out, err);
    return kOk;
}

// --- typicality / graph / audit ---------------------------------------------

LoadedScenario source_of(const RunConfig& c) {
    return load_source(c.scenario_path.value_or("builtin:unruh"));
}

int run_typicality(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const LoadedScenario s = source_of(c);
    const QuantumStructure& q = s.structure;
    const double tau = c.thresholds.typicality;

    if (!c.all_pairs) {
        const SSet s1 = parse_sset(c.s1);
        const SSet s2 = parse_sset(c.s2);
        const TypicalityReport r = mutual_typicality(q, s1, s2, tau);
        const bool chain = r.verdict == Verdict::Degenerate || check_inequality_chain(r);
        if (effective_format(c) == Format::Csv) {
            emit(c,
                 csv_preamble(c) + "s1,s2,m_big,m_small,verdict,inequality_chain\n" +
                     fmt::format("{},{},{},{},{},{}\n", csv_field(to_string(s1)), csv_field(to_string(s2)),
                                 format_real(r.m_big), format_real(r.m_small), to_string(r.verdict), chain),
                 out, err);
        } else {
            emit(c,
                 json_report(c, Json{{"s1", to_json(s1)},
                                     {"s2", to_json(s2)},
                                     {"report", to_json(r)},
                                     {"inequality_chain", chain}}),
                 out, err);
        }
        return kOk;
    }

    // Every unordered pair of single-cell s-sets over all times.
    std::vector<SSet> ssets;
    for (TimeIndex t = 0; t <= q.final_time(); ++t) {
        for (const Cell& cell : q.cells()) ssets.push_back({t, {cell.label}});
    }
    std::string csv = csv_preamble(c) + "s1,s2,m_big,m_small,verdict\n";
    Json rows = Json::array();
    for (std::size_t i = 0; i < ssets.size(); ++i) {
        for (std::size_t j = i + 1; j < ssets.size(); ++j) {
            const TypicalityReport r = mutual_typicality(q, ssets[i], ssets[j], tau);
            const std::string a = node_id(ssets[i].time, ssets[i].region);
            const std::string b = node_id(ssets[j].time, ssets[j].region);
            csv += fmt::format("{},{},{},{},{}\n", csv_field(a), csv_field(b), format_real(r.m_big),
                               format_real(r.m_small), to_string(r.verdict));
            rows.push_back(Json{{"s1", a}, {"s2", b}, {"report", to_json(r)}});
        }
    }
    emit(c, effective_format(c) == Format::Csv ? csv : json_report(c, Json{{"pairs", std::move(rows)}}), out,
         err);
    return kOk;
}

int run_graph(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const LoadedScenario s = source_of(c);
    const TrajectoryGraph g =
        build_graph(s.structure, s.partition, c.thresholds.epsilon_exclude, c.thresholds.tau_link);
    if (effective_format(c) == Format::Csv) {
        emit(c, csv_preamble(c) + graph_edges_csv(g), out, err);
    } else {
        emit(c, json_report(c, to_json(g)), out, err);
    }
    return kOk;
}

int run_audit(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const LoadedScenario s = source_of(c);
    Json sources = Json::array();
    StochasticProcessSpec chain;
    if (s.stochastic) {
        chain = *s.stochastic;
        sources = "file";
    } else {
        MatchedChain matched = matched_chain(s.structure);
        for (KernelSource k : matched.sources) {
            sources.push_back(k == KernelSource::ChainedNorm ? "chained-norm" : "marginal");
        }
        chain = std::move(matched.spec);
    }
    const CorrespondenceAudit audit = correspondence_audit(s.structure, chain, {}, c.thresholds.typicality);
    if (effective_format(c) == Format::Csv) throw ValidationError("audit only writes json");
    Json result = to_json(audit);
    result["kernel_sources"] = std::move(sources);
    emit(c, json_report(c, std::move(result)), out, err);
    if (audit.passed()) return kOk;

    err << fmt::format("audit failed: marginal_max_error={} regime_pairs={} quantum_only_typical={} "
                       "stochastic_only_typical={} mu_additivity_max_error={}\n",
                       format_real(audit.marginal_max_error), audit.regime_pairs, audit.quantum_only_typical,
                       audit.stochastic_only_typical, format_real(audit.mu_additivity_max_error));
    for (const PairCheck& p : audit.pairs) {
        if (p.in_regime && !p.agree) {
            err << fmt::format("  disagreement {} vs {}: M_psi={} M_mu={}\n", to_string(p.s1), to_string(p.s2),
                               format_real(p.quantum.m_big), format_real(p.stochastic.m_big));
        }
    }
    return kAuditFailure;
}

// --- stat-bound ----------------------------------------------------------------

std::vector<double> complete_probs(std::size_t n, const std::vector<double>& given) {
    if (given.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    if (given.size() == n) return given;
    if (given.size() + 1 == n) {
        std::vector<double> p = given;
        double sum = 0.0;
        for (double x : given) sum += x;
        p.push_back(1.0 - sum);
        return p;
    }
    throw ValidationError(fmt::format("--p needs {} or {} values, got {}", n - 1, n, given.size()));
}

// Flat Dirichlet draw.
std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& x : p) {
        x = expo(rng);
        sum += x;
    }
    for (double& x : p) x /= sum;
    return p;
}

struct BoundRow {
    std::size_t n = 0;
    std::size_t repetitions = 0;
    double epsilon = 0.0;
    std::size_t draw = 0;
    std::vector<double> probs;
    TailMassReport report;
};

int run_stat_bound(const RunConfig& c, std::ostream& out, std::ostream& err) {
    std::vector<BoundRow> rows;
    if (!c.sweep) {
        ExperimentSpec spec{complete_probs(c.outcomes, c.probs), c.repetitions, c.epsilon};
        rows.push_back({c.outcomes, c.repetitions, c.epsilon, 0, spec.probs, tail_mass_report(spec)});
    } else {
        std::mt19937_64 rng(c.seed);
        for (std::size_t n : {std::size_t{2}, std::size_t{3}}) {
            for (std::size_t draw = 0; draw < c.draws; ++draw) {
                const std::vector<double> p = random_probs(rng, n);
                for (std::size_t big_n = 1; big_n <= kSweepMaxRepetitions; ++big_n) {
                    for (double eps : kSweepEpsilons) {
                        rows.push_back({n, big_n, eps, draw, p, tail_mass_report(ExperimentSpec{p, big_n, eps})});
                    }
                }
            }
        }
        std::stable_sort(rows.begin(), rows.end(), [](const BoundRow& a, const BoundRow& b) {
            return std::tie(a.n, a.repetitions, a.epsilon, a.draw) < std::tie(b.n, b.repetitions, b.epsilon, b.draw);
        });
    }

    bool all_hold = true;
    for (const BoundRow& r : rows) all_hold = all_hold && r.report.holds;

    if (effective_format(c) == Format::Csv) {
        std::string csv = csv_preamble(c) + "n,N,eps,mass,bound,holds,draw,method,p\n";
        for (const BoundRow& r : rows) {
            csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.n, r.repetitions, format_real(r.epsilon),
                               format_real(r.report.mass), format_real(r.report.bound), r.report.holds, r.draw,
                               to_string(r.report.method), join_reals(r.probs, ";"));
        }
        emit(c, csv, out, err);
    } else {
        Json items = Json::array();
        for (const BoundRow& r : rows) {
            Json item = to_json(r.report);
            item["n"] = r.n;
            item["N"] = r.repetitions;
            item["eps"] = r.epsilon;
            item["draw"] = r.draw;
            item["p"] = r.probs;
            items.push_back(std::move(item));
        }
        emit(c, json_report(c, Json{{"all_hold", all_hold}, {"rows", std::move(items)}}), out, err);
    }
    if (all_hold) return kOk;
    for (const BoundRow& r : rows) {
        if (!r.report.holds) {
            err << fmt::format("bound violated: n={} N={} eps={} mass={} bound={}\n", r.n, r.repetitions,
                               format_real(r.epsilon), format_real(r.report.mass), format_real(r.report.bound));
        }
    }
    return kAuditFailure;
}

// --- wavepacket ----------------------------------------------------------------

int run_wavepacket(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const grid::CounterPropagation setup;
    std::vector<double> separations = c.separations;
    std::stable_sort(separations.begin(), separations.end());
    std::vector<grid::SeparationPoint> points;
    for (double s : separations) points.push_back(grid::counter_propagation_point(setup, s));

    bool monotone = true;
    for (std::size_t i = 1; i < points.size(); ++i) monotone = monotone && points[i].m_big < points[i - 1].m_big;

    if (effective_format(c) == Format::Csv) {
        std::string csv = csv_preamble(c) + "separation_sigmas,m_big,separation_t2_sigmas,boundary_warning\n";
        for (const grid::SeparationPoint& p : points) {
            csv += fmt::format("{},{},{},{}\n", format_real(p.separation_sigmas), format_real(p.m_big),
                               format_real(p.separation_t2_sigmas), p.boundary_warning);
        }
        emit(c, csv, out, err);
    } else {
        Json items = Json::array();
        for (const grid::SeparationPoint& p : points) items.push_back(to_json(p));
        emit(c,
             json_report(c, Json{{"grid_points", setup.grid.n_points},
                                 {"length", setup.grid.length},
                                 {"sigma", setup.sigma},
                                 {"momentum", setup.momentum},
                                 {"dt", setup.dt},
                                 {"monotone_decreasing", monotone},
                                 {"points", std::move(items)}}),
             out, err);
    }

    if (!c.snapshots_path.empty()) {
        std::string csv = csv_preamble(c) + "separation_sigmas,time,x,density\n";
        for (double s : separations) {
            const double half_gap = 0.5 * s * setup.sigma;
            const grid::GridState left = grid::gaussian_packet(setup.grid, -half_gap, setup.sigma, -setup.momentum);
            const grid::GridState right = grid::gaussian_packet(setup.grid, half_gap, setup.sigma, setup.momentum);
            const grid::GridState at_t1 = grid::superpose(left, 1.0, right, 1.0);
            for (const grid::GridState& state : {at_t1, grid::free_evolve(at_t1, setup.dt)}) {
                for (std::size_t j = 0; j < state.amplitudes.size(); ++j) {
                    csv += fmt::format("{},{},{},{}\n", format_real(s), format_real(state.time),
                                       format_real(state.grid.x(j)), format_real(std::norm(state.amplitudes[j])));
                }
            }
        }
        write_file(c.snapshots_path, csv, err);
    }
    return kOk;
}

void add_threshold_options(CLI::App& app, RunConfig& c, std::string& format) {
    app.add_option("--eps-exclude", c.thresholds.epsilon_exclude, "Occupation at or below which a node is excluded");
    app.add_option("--tau-link", c.thresholds.tau_link, "M_psi at or below which two nodes are linked");
    app.add_option("--threshold", c.thresholds.typicality, "Typicality verdict cutoff");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("-o,--out", c.output, "Output file (default stdout)");
    app.add_option("--seed", c.seed, "Seed for randomized sweeps");
}

}  // namespace

LoadedScenario load_source(const std::string& source) {
    if (source.rfind(kBuiltinPrefix, 0) == 0) {
        const std::string name = source.substr(kBuiltinPrefix.size());
        auto from_unruh = [](const UnruhModel& m) {
            return LoadedScenario{m.structure, m.partition(), std::nullopt};
        };
        if (name == "unruh") return from_unruh(build_unruh(false));
        if (name == "unruh-detector-d2") return from_unruh(build_unruh(true));
        if (name == "unruh-obstacle-u1") return from_unruh(obstacle_variant(Arm::U1));
        if (name == "unruh-obstacle-d1") return from_unruh(obstacle_variant(Arm::D1));
        if (name == "fig1") {
            QuantumStructure q = build_beamsplitter_fig1();
            PartitionSchedule p = cellwise_schedule(q, 1, 2);
            return LoadedScenario{std::move(q), std::move(p), std::nullopt};
        }
        if (name == "identity-pair") {
            QuantumStructure q = build_identity_pair();
            PartitionSchedule p = cellwise_schedule(q, 0, q.final_time());
            return LoadedScenario{std::move(q), std::move(p), std::nullopt};
        }
        throw SchemaError(fmt::format("unknown builtin scenario '{}'", name));
    }
    ScenarioFile file = load_scenario(source);
    PartitionSchedule partition =
        file.partition ? *file.partition : cellwise_schedule(file.structure, 0, file.structure.final_time());
    return LoadedScenario{std::move(file.structure), std::move(partition), std::move(file.stochastic)};
}

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig c;
    std::string format;
    std::string obstacle;
    std::string scenario;

    CLI::App app{"Mutual typicality analysis of quantum and stochastic processes", "qtyp"};
    app.require_subcommand(1);
    add_threshold_options(app, c, format);
    app.set_version_flag("--version", std::string(tool_version()));

    auto* sc = app.add_subcommand("scenario", "Built-in interferometer scenarios");
    sc->add_option("target", c.target, "unruh | fig1 | nonadditivity")
        ->required()
        ->check(CLI::IsMember({"unruh", "fig1", "nonadditivity"}));
    sc->add_flag("--detector-d2", c.detector_d2, "Counter in arm D-2");
    sc->add_option("--obstacle", obstacle, "Block arm U1 or D1")->check(CLI::IsMember({"U1", "D1"}));
    sc->add_option("--export", c.export_path, "Also write the scenario JSON here");

    auto* ty = app.add_subcommand("typicality", "Mutual typicality of two s-sets");
    ty->add_option("--scenario", scenario, "Scenario file or builtin:NAME");
    ty->add_option("--s1", c.s1, "First s-set, TIME:LABEL[,LABEL...]");
    ty->add_option("--s2", c.s2, "Second s-set");
    ty->add_flag("--all-pairs", c.all_pairs, "Every pair of single-cell s-sets");

    auto* gr = app.add_subcommand("graph", "Trajectory graph of a scenario");
    gr->add_option("--scenario", scenario, "Scenario file or builtin:NAME");

    auto* sb = app.add_subcommand("stat-bound", "Tail mass of the typical set");
    sb->add_option("--n", c.outcomes, "Number of outcomes");
    sb->add_option("--p", c.probs, "Probabilities; the last may be omitted")->delimiter(',');
    sb->add_option("--N", c.repetitions, "Repetitions");
    sb->add_option("--eps", c.epsilon, "Deviation cutoff");
    sb->add_flag("--sweep", c.sweep, "n in {2,3}, N in 1..16, six cutoffs, random p");
    sb->add_option("--draws", c.draws, "Random p per n in the sweep");

    auto* wp = app.add_subcommand("wavepacket", "Counter-propagating Gaussian packets");
    wp->add_flag("--separation-sweep", c.separation_sweep, "M_psi over initial separations");
    wp->add_option("--separations", c.separations, "Separations in units of sigma")->delimiter(',');
    wp->add_option("--snapshots", c.snapshots_path, "Write |psi(x)|^2 snapshots to this CSV");

    auto* au = app.add_subcommand("audit", "Quantum vs stochastic correspondence audit");
    au->add_option("--scenario", scenario, "Scenario file or builtin:NAME");

    for (CLI::App* sub : {sc, ty, gr, sb, wp, au}) sub->fallthrough();

    if (args.size() > 1 && !args[1].empty() && args[1][0] != '-') {
        const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
        const bool known = std::any_of(subs.begin(), subs.end(),
                                       [&](const CLI::App* s) { return s->get_name() == args[1]; });
        if (!known) throw UsageError(fmt::format("unknown subcommand '{}'", args[1]));
    }

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        c.command = "help";
        c.target = app.help();
        return c;
    } catch (const CLI::CallForAllHelp&) {
        c.command = "help";
        c.target = app.help("", CLI::AppFormatMode::All);
        return c;
    } catch (const CLI::CallForVersion&) {
        c.command = "help";
        c.target = std::string(tool_version()) + "\n";
        return c;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    for (CLI::App* sub : app.get_subcommands()) c.command = sub->get_name();
    if (!format.empty()) c.format = format == "json" ? Format::Json : Format::Csv;
    if (!obstacle.empty()) c.obstacle = obstacle;
    if (!scenario.empty()) c.scenario_path = scenario;
    return c;
}

void validate(const RunConfig& c) {
    const Thresholds& t = c.thresholds;
    for (auto [name, value] : {std::pair{"--eps-exclude", t.epsilon_exclude}, std::pair{"--tau-link", t.tau_link},
                               std::pair{"--threshold", t.typicality}}) {
        if (!(value > 0.0 && value < 1.0)) throw ValidationError(fmt::format("{} must lie in (0, 1)", name));
    }
    if (c.command == "typicality" && !c.all_pairs && (c.s1.empty() || c.s2.empty())) {
        throw ValidationError("typicality needs --s1 and --s2, or --all-pairs");
    }
    if (c.command == "scenario" && c.target != "unruh" && (c.detector_d2 || c.obstacle || !c.export_path.empty())) {
        throw ValidationError("--detector-d2, --obstacle and --export apply to 'scenario unruh' only");
    }
    if (c.command == "stat-bound" && !c.sweep && c.outcomes < 2) {
        throw ValidationError("--n must be at least 2");
    }
    if (c.command == "wavepacket" && c.separations.empty()) throw ValidationError("--separations is empty");
}

Json config_json(const RunConfig& c) {
    Json j{{"command", c.command}};
    if (!c.target.empty() && c.command != "help") j["target"] = c.target;
    j["format"] = std::string(format_name(effective_format(c)));
    j["output"] = c.output.empty() ? "-" : c.output;
    j["seed"] = c.seed;
    if (c.command == "scenario") {
        j["detector_d2"] = c.detector_d2;
        j["obstacle"] = c.obstacle ? Json(*c.obstacle) : Json(nullptr);
    } else if (c.command == "typicality" || c.command == "graph" || c.command == "audit") {
        j["scenario"] = c.scenario_path.value_or("builtin:unruh");
        if (c.command == "typicality") {
            j["s1"] = c.s1;
            j["s2"] = c.s2;
            j["all_pairs"] = c.all_pairs;
        }
    } else if (c.command == "stat-bound") {
        j["sweep"] = c.sweep;
        if (c.sweep) {
            j["draws"] = c.draws;
        } else {
            j["n"] = c.outcomes;
            j["p"] = c.probs;
            j["N"] = c.repetitions;
            j["eps"] = c.epsilon;
        }
    } else if (c.command == "wavepacket") {
        j["separations"] = c.separations;
        j["snapshots"] = c.snapshots_path;
    }
    return j;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.command == "help") {
        out << c.target;
        return kOk;
    }
    validate(c);
    if (c.command == "scenario") return run_scenario(c, out, err);
    if (c.command == "typicality") return run_typicality(c, out, err);
    if (c.command == "graph") return run_graph(c, out, err);
    if (c.command == "stat-bound") return run_stat_bound(c, out, err);
    if (c.command == "wavepacket") return run_wavepacket(c, out, err);
    if (c.command == "audit") return run_audit(c, out, err);
    throw UsageError(fmt::format("unknown command '{}'", c.command));
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(parse_args(args), out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return kInputError;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kInputError;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInputError;
    } catch (const RangeError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInputError;
    } catch (const ResourceError& e) {
        err << "resource limit: " << e.what() << '\n';
        return kResourceLimit;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInternalError;
    }
}

}  // namespace qtyp::cli
