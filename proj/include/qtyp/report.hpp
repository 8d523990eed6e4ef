#pragma once

#include <string>
#include <vector>

#include "qtyp/scenario_io.hpp"
#include "qtyp/stat_typicality.hpp"
#include "qtyp/stochastic_twin.hpp"
#include "qtyp/trajectory_graph.hpp"
#include "qtyp/typicality.hpp"
#include "qtyp/wavepacket.hpp"

namespace qtyp {

std::string_view tool_version();

// Doubles as "%.17g"; NaN and infinities become null.
std::string format_real(double value);

// Pretty JSON (two-space indent, trailing newline) with every floating point
// number written through format_real.
std::string dump_json(const Json& value);

Json to_json(const SSet& s);
Json to_json(const TypicalityReport& r);
Json to_json(const AdditivityWitness& w);
Json to_json(const TrajectoryGraph& g);
Json to_json(const TailMassReport& r);
Json to_json(const CorrespondenceAudit& a);
Json to_json(const grid::SeparationPoint& p);

std::string_view to_string(TailMethod m);

// One CSV line per link, then one per path node transition:
//   kind,from,to,value
std::string graph_edges_csv(const TrajectoryGraph& g);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace qtyp
