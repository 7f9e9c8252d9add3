#include "ftoracle/path_oracle.hpp"

#include <algorithm>

namespace ftoracle {

PathOracle::PathOracle(const GeoGraph& g, double max_len) : max_len_(max_len) {
    if (!(max_len >= 0)) throw PreconditionError("max_len must be >= 0");
    std::vector<double> w;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        if (g.edge_length(e) <= max_len) {
            edges_.push_back(g.edges()[e]);
            w.push_back(g.edge_length(e));
            total_weight_ += g.edge_length(e);
        }
    }
    adj_ = Csr::undirected(g.num_vertices(), edges_, w);
    activate(FailureSet{});
}

void PathOracle::activate(const FailureSet& F) {
    const auto n = adj_.size();
    failed_ = F;
    label_.assign(n, kNoVertex);
    parent_.assign(n, kNoVertex);
    depth_.assign(n, 0);
    std::vector<char> dead(n, 0);
    for (auto x : F)
        if (x < n) dead[x] = 1;
    std::vector<VertexId> queue;
    queue.reserve(n);
    for (VertexId r = 0; r < n; ++r) {
        if (dead[r] || label_[r] != kNoVertex) continue;
        label_[r] = r;
        queue.clear();
        queue.push_back(r);
        for (std::size_t h = 0; h < queue.size(); ++h) {
            VertexId x = queue[h];
            for (const Arc& a : adj_.out(x)) {
                if (dead[a.to] || label_[a.to] != kNoVertex) continue;
                label_[a.to] = r;
                parent_[a.to] = x;
                depth_[a.to] = depth_[x] + 1;
                queue.push_back(a.to);
            }
        }
    }
}

std::optional<std::vector<VertexId>> PathOracle::any_path(VertexId u, VertexId v) const {
    if (!connected(u, v)) return std::nullopt;
    std::vector<VertexId> up, down;
    VertexId a = u, b = v;
    while (depth_[a] > depth_[b]) {
        up.push_back(a);
        a = parent_[a];
    }
    while (depth_[b] > depth_[a]) {
        down.push_back(b);
        b = parent_[b];
    }
    while (a != b) {
        up.push_back(a);
        down.push_back(b);
        a = parent_[a];
        b = parent_[b];
    }
    up.push_back(a);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
}

} // namespace ftoracle
