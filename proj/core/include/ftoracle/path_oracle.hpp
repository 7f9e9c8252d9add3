#pragma once

#include <optional>
#include <vector>

#include "ftoracle/graph.hpp"

namespace ftoracle {

// Connectivity/path oracle under vertex failures over the subgraph of edges
// with length <= max_len.  activate(F) relabels components of base - F and
// rebuilds a BFS forest (roots and neighbours in id order); any_path then walks
// the forest, so retrieval is linear in the returned path.
//
// activate mutates; copy the oracle to serve several failure sets at once.
class PathOracle {
public:
    PathOracle() = default;
    PathOracle(const GeoGraph& g, double max_len);

    double max_len() const { return max_len_; }
    std::size_t num_vertices() const { return adj_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    double total_weight() const { return total_weight_; }

    void activate(const FailureSet& F);
    const FailureSet& active() const { return failed_; }

    // Component label (smallest vertex id of the component); kNoVertex if failed.
    VertexId label(VertexId v) const { return label_[v]; }
    bool connected(VertexId u, VertexId v) const {
        return label_[u] != kNoVertex && label_[u] == label_[v];
    }
    std::optional<std::vector<VertexId>> any_path(VertexId u, VertexId v) const;

private:
    double max_len_ = 0;
    double total_weight_ = 0;
    std::vector<Edge> edges_;
    Csr adj_;
    FailureSet failed_;
    std::vector<VertexId> label_;
    std::vector<VertexId> parent_;
    std::vector<std::uint32_t> depth_;
};

} // namespace ftoracle
