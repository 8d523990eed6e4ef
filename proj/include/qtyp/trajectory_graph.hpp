#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qtyp/structure.hpp"
#include "qtyp/typicality.hpp"

namespace qtyp {

// The regions of one slice must be pairwise disjoint and cover every cell.
struct PartitionSlice {
    TimeIndex time = 0;
    std::vector<Region> regions;
};

using PartitionSchedule = std::vector<PartitionSlice>;

inline constexpr double kDefaultExclusionEpsilon = 1e-6;
inline constexpr double kDefaultLinkThreshold = kDefaultTypicalityThreshold;
inline constexpr std::size_t kMaxPathSpace = 1'000'000;

struct GraphNode {
    std::string id;
    std::size_t slice = 0;
    TimeIndex time = 0;
    Region region;
    double occupation = 0.0;
    bool excluded = false;

    SSet sset() const { return {time, region}; }
};

// A forced equivalence: a path visits `a` exactly when it visits `b`.
struct GraphLink {
    std::size_t a = 0;
    std::size_t b = 0;
    double m_big = 0.0;
};

struct TrajectoryGraph {
    double epsilon_exclude = kDefaultExclusionEpsilon;
    double tau_link = kDefaultLinkThreshold;
    std::size_t slice_count = 0;
    std::vector<GraphNode> nodes;
    std::vector<GraphLink> links;
    // Node indices, one per slice, in slice order.
    std::vector<std::vector<std::size_t>> paths;

    std::vector<std::string> excluded_ids() const;
    std::vector<std::pair<std::string, std::string>> link_ids() const;
    std::vector<std::vector<std::string>> path_ids() const;
};

// "U@1" for a single-cell region, "D+CLICK@2" otherwise.
std::string node_id(TimeIndex time, const Region& region);

void validate(const QuantumStructure& structure, const PartitionSchedule& schedule);

// Nodes are excluded when their occupation is at most epsilon_exclude. Links
// are evaluated for every pair of non-excluded nodes in different slices.
// Paths pick one node per slice, avoid excluded nodes and honour every link.
TrajectoryGraph build_graph(const QuantumStructure& structure, const PartitionSchedule& schedule,
                            double epsilon_exclude = kDefaultExclusionEpsilon,
                            double tau_link = kDefaultLinkThreshold);

// One slice per time in [first, last], each cell its own region.
PartitionSchedule cellwise_schedule(const QuantumStructure& structure, TimeIndex first,
                                    TimeIndex last);

// Checks that a time-ordered list of branch s-sets is followed: for every
// i < j either M(S_i, S_j) <= tau or the later packet lies inside the
// earlier branch, ||S_j (1 - S_i) psi0||^2 <= tau * ||S_j psi0||^2.
bool branch_following_check(const QuantumStructure& structure, const std::vector<SSet>& branch,
                            double tau = kDefaultTypicalityThreshold);

}  // namespace qtyp
