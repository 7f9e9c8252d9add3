#pragma once

#include <span>
#include <vector>

#include "ftoracle/graph.hpp"

namespace ftoracle {

// r-net in the graph metric: members pairwise >= r apart, every vertex
// within r of a member.  closest[v] is the nearest member (ties: smaller id).
struct Net {
    double r = 0.0;
    std::vector<VertexId> members;       // sorted
    std::vector<VertexId> closest;       // per vertex
    std::vector<double> closest_dist;    // per vertex
    std::vector<char> is_member;         // per vertex

    bool contains(VertexId v) const { return v < is_member.size() && is_member[v]; }
};

// Greedy r-net; candidates are scanned in id order.
Net build_net(const GeoGraph& g, double r);

// Greedy r-net that starts from `seed` (which must already be pairwise >= r
// apart) and completes it in id order.  Used to build aligned hierarchies.
Net extend_net(const GeoGraph& g, double r, std::span<const VertexId> seed);

// Nets for radii[0] < radii[1] < ... with members(i) a superset of members(i+1).
std::vector<Net> build_aligned_nets(const GeoGraph& g, std::span<const double> radii);

// Recomputes closest/closest_dist for a given member set.
void assign_closest(const GeoGraph& g, Net& net);

} // namespace ftoracle
