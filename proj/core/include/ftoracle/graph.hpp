#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ftoracle/types.hpp"

namespace ftoracle {

struct Edge {
    VertexId u = 0;
    VertexId v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Arc {
    VertexId to;
    double w;
};

// Compressed adjacency; arcs of every vertex sorted by target id.
class Csr {
public:
    Csr() = default;
    // Builds an undirected adjacency from weighted edges over n vertices.
    static Csr undirected(std::size_t n, std::span<const Edge> edges, std::span<const double> weights);

    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::span<const Arc> out(VertexId v) const {
        return {arcs_.data() + offsets_[v], arcs_.data() + offsets_[v + 1]};
    }

private:
    std::vector<std::size_t> offsets_;
    std::vector<Arc> arcs_;
};

struct GraphMeta {
    double t = 1.0;
    int f = 0;
    double L = kInf;
};

// Euclidean graph: edge weights are the distances between endpoints.
// Edges are stored normalized (u < v) and sorted.
class GeoGraph {
public:
    GeoGraph() = default;
    GeoGraph(std::vector<Point> points, std::vector<Edge> edges, GraphMeta meta = {});

    std::size_t num_vertices() const { return points_.size(); }
    std::size_t num_edges() const { return edges_.size(); }
    const GraphMeta& meta() const { return meta_; }
    void set_meta(GraphMeta m) { meta_ = m; }

    Point point(VertexId v) const { return points_[v]; }
    std::span<const Point> points() const { return points_; }
    std::span<const Edge> edges() const { return edges_; }
    double edge_length(std::size_t e) const { return lengths_[e]; }
    std::span<const double> edge_lengths() const { return lengths_; }
    double euclid(VertexId a, VertexId b) const { return dist(points_[a], points_[b]); }

    const Csr& adjacency() const { return adj_; }
    std::span<const Arc> out(VertexId v) const { return adj_.out(v); }
    std::size_t size() const { return points_.size(); }

    bool has_edge(VertexId a, VertexId b) const;
    // Index of edge {a,b} in edges(), or -1.
    long edge_index(VertexId a, VertexId b) const;
    double max_edge_length() const;

    bool valid_vertex(VertexId v) const { return v < points_.size(); }

private:
    std::vector<Point> points_;
    std::vector<Edge> edges_;
    std::vector<double> lengths_;
    Csr adj_;
    GraphMeta meta_;
};

// Sorted, duplicate-free set of failed vertices.
class FailureSet {
public:
    FailureSet() = default;
    explicit FailureSet(std::vector<VertexId> ids);

    bool contains(VertexId v) const;
    bool empty() const { return ids_.empty(); }
    std::size_t size() const { return ids_.size(); }
    std::span<const VertexId> ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }

    // Throws PreconditionError on invalid ids or |F| > f.
    void check(const GeoGraph& g, int f) const;

    friend bool operator==(const FailureSet&, const FailureSet&) = default;

private:
    std::vector<VertexId> ids_;
};

// Graph text format: header `n m t f L`, n lines `id x y`, m lines `u v`.
GeoGraph read_graph(std::istream& in);
GeoGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const GeoGraph& g);
void write_graph_file(const std::string& path, const GeoGraph& g);

// Little-endian canonical encoding; the digest hashes exactly these bytes.
std::vector<unsigned char> encode_graph(const GeoGraph& g);
GeoGraph decode_graph(std::span<const unsigned char> bytes);
std::uint64_t graph_digest(const GeoGraph& g);
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

// Path helpers shared by the oracles and the checks.
double path_length(const GeoGraph& g, std::span<const VertexId> path);
// True iff consecutive vertices are adjacent, endpoints match and no vertex is failed.
bool is_valid_path(const GeoGraph& g, std::span<const VertexId> path, VertexId s, VertexId t,
                   const FailureSet& failed);

} // namespace ftoracle
