#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftoracle/dijkstra.hpp"
#include "ftoracle/graph.hpp"

namespace ftoracle {

enum class VicinityMode {
    Pair,  // max(|pu|,|pv|) <= 2t|uv|
    Scale, // max(|pu|,|pv|) <= 2(1+eps)t^2 W_j  (W_j = level scale)
};

std::string to_string(VicinityMode m);
std::optional<VicinityMode> parse_vicinity_mode(const std::string& s);

// Subgraph of `base` induced by the vertices p with max(|pu|,|pv|) <= radius.
// Local ids follow global id order.
class VicinityGraph {
public:
    VicinityGraph(const GeoGraph& base, VertexId u, VertexId v, double radius);

    const GeoGraph& base() const { return *base_; }
    double radius() const { return radius_; }
    std::size_t size() const { return global_.size(); }
    std::span<const Arc> out(VertexId local) const { return adj_.out(local); }
    VertexId global(VertexId local) const { return global_[local]; }
    // kNoVertex if the vertex is not a member.
    VertexId local(VertexId global) const;
    bool contains(VertexId global) const { return local(global) != kNoVertex; }
    std::span<const VertexId> members() const { return global_; }

private:
    const GeoGraph* base_;
    double radius_;
    std::vector<VertexId> global_;
    Csr adj_;
};

struct FtOptions {
    int f = 1;
    double t = 2.0;
    std::size_t max_nodes = 200000;
};

inline constexpr std::int32_t kChildUnbuilt = -1;
inline constexpr std::int32_t kChildNone = -2;

struct FtNode {
    std::int32_t parent = -1;
    std::int32_t segment = -1;        // segment of the parent this node replaces
    int level = 0;                    // root is level 0
    VertexId seed = kNoVertex;        // centre of the removed ball, if any
    std::vector<VertexId> removed;    // vertices removed here (global ids, sorted)
    std::vector<VertexId> path;       // shortest u-v path in G_alpha (global ids); empty if none
    double length = kInf;
    // Path index of the last vertex of each segment; segment i covers
    // indices (seg_end[i-1], seg_end[i]] with seg_end[-1] = 0.
    std::vector<std::uint32_t> seg_end;
    std::vector<std::int32_t> child;  // per segment: node id, kChildUnbuilt or kChildNone
    // Assistant array row: path vertex -> segment, sorted by vertex.
    std::vector<std::pair<VertexId, std::uint32_t>> assistant;
    bool leaf = false;

    // Segment containing v, or -1.
    int segment_of(VertexId v) const;
};

struct FtPathRef {
    std::int32_t node = -1;
    double length = kInf;
    std::span<const VertexId> path;
};

// FT(u,v;W): replacement-path tree over the vicinity graph.  Only the root is
// built eagerly; children are materialized when a query descends into them
// (or by expand_all).  The node set reached is the same as for an eager build.
class FtTree {
public:
    FtTree(const GeoGraph& g, VertexId u, VertexId v, double W, double vicinity_radius, FtOptions opts);

    VertexId u() const { return u_; }
    VertexId v() const { return v_; }
    double W() const { return W_; }
    const FtOptions& options() const { return opts_; }
    const VicinityGraph& vicinity() const { return vic_; }
    bool degenerate() const { return degenerate_; }

    std::size_t num_nodes() const { return nodes_.size(); }
    const FtNode& node(std::size_t i) const { return nodes_[i]; }
    int depth() const;

    // Builds every node (including the level f+1 leaves).
    void expand_all();

    // Descends from the root following failed vertices; returns the first
    // failure-free stored path, or nothing if a leaf is reached.
    std::optional<FtPathRef> query(const FailureSet& F);

    // Vertices of the vicinity graph that are absent from G_alpha.
    std::vector<VertexId> removed_upto(std::int32_t node) const;

private:
    std::int32_t make_child(std::int32_t parent, std::uint32_t seg);
    void finish_node(FtNode& n);

    const GeoGraph* g_;
    VertexId u_, v_;
    double W_;
    FtOptions opts_;
    VicinityGraph vic_;
    bool degenerate_ = false;
    double leaf_len_;
    std::deque<FtNode> nodes_; // deque: node references survive lazy growth
    ShortestPaths sp_;
    ShortestPaths ball_;
    std::vector<char> mask_;
};

} // namespace ftoracle
