#pragma once

#include <string>
#include <vector>

#include "ftoracle/kernel.hpp"
#include "ftoracle/path_oracle.hpp"

namespace ftoracle {

struct DistanceAnswer {
    double value = kInf;
    std::size_t kernel_vertices = 0;
    std::size_t kernel_edges = 0;
    int level = 0;
    bool small_instance = false;
    std::string reason;  // empty, or why the answer is +inf
};

// One kernel edge of the chosen path and how it was turned back into a walk.
struct ExpansionStep {
    VertexId a = 0, b = 0;  // in walk order
    EdgeKind kind = EdgeKind::Short;
    int level = 0;
    double weight = 0;      // kernel edge weight
    double expanded = 0;    // length of the substituted walk
    std::size_t hops = 0;
};

struct PathAnswer {
    std::vector<VertexId> path;        // input-graph vertex ids
    std::vector<VertexId> split_path;  // same walk in the split graph
    double length = kInf;
    std::vector<ExpansionStep> expansion_log;
    std::size_t kernel_vertices = 0;
    std::size_t kernel_edges = 0;
    int level = 0;
    bool small_instance = false;
    std::string reason;

    bool found() const { return !path.empty(); }
};

// Removes cycles from a walk (keeps the first visit's prefix).
std::vector<VertexId> erase_loops(std::span<const VertexId> walk);

// Distance and path queries for moderately far pairs of an L-partial
// f-FT t-spanner.
class ModerateOracle {
public:
    ModerateOracle(const GeoGraph& g, KernelParams p);
    ModerateOracle(const GeoGraph& g, KernelParams p, const std::vector<std::vector<VertexId>>& net_members);

    KernelOracle& kernels() { return k_; }
    const KernelOracle& kernels() const { return k_; }
    // Threshold used for short-edge expansion (t L / m^6).
    double short_threshold() const { return short_.max_len(); }
    bool moderately_far(VertexId s, VertexId t) const { return k_.moderately_far(s, t); }

    DistanceAnswer distance(VertexId s, VertexId t, const FailureSet& F);
    PathAnswer path(VertexId s, VertexId t, const FailureSet& F, bool simplify = false);

private:
    bool small() const;

    KernelOracle k_;
    PathOracle short_;
};

} // namespace ftoracle
