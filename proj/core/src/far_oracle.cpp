#include "ftoracle/far_oracle.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace ftoracle {

std::vector<VertexId> erase_loops(std::span<const VertexId> walk) {
    std::vector<VertexId> out;
    std::unordered_map<VertexId, std::size_t> at;
    for (auto v : walk) {
        auto it = at.find(v);
        if (it != at.end()) {
            for (std::size_t k = it->second + 1; k < out.size(); ++k) at.erase(out[k]);
            out.resize(it->second + 1);
            continue;
        }
        at.emplace(v, out.size());
        out.push_back(v);
    }
    return out;
}

namespace {

double short_len(const KernelOracle& k) {
    const double m = k.m();
    return k.params().t * k.params().L / std::pow(m, 6);
}

} // namespace

ModerateOracle::ModerateOracle(const GeoGraph& g, KernelParams p)
    : k_(g, p), short_(k_.graph(), short_len(k_)) {}

ModerateOracle::ModerateOracle(const GeoGraph& g, KernelParams p, const std::vector<std::vector<VertexId>>& members)
    : k_(g, p, members), short_(k_.graph(), short_len(k_)) {}

bool ModerateOracle::small() const {
    const auto& p = k_.params();
    return static_cast<double>(k_.input().num_edges()) < 16 * p.t / p.eps;
}

DistanceAnswer ModerateOracle::distance(VertexId s, VertexId t, const FailureSet& F) {
    DistanceAnswer a;
    a.small_instance = small();
    Kernel H = k_.kernel_query(s, t, F);
    a.level = H.level;
    a.kernel_vertices = H.vertices.size();
    a.kernel_edges = H.edges.size();
    a.value = H.shortest_path(s, t).length;
    if (a.value == kInf) a.reason = "disconnected in kernel";
    return a;
}

PathAnswer ModerateOracle::path(VertexId s, VertexId t, const FailureSet& F, bool simplify) {
    PathAnswer a;
    a.small_instance = small();
    Kernel H = k_.pp_kernel_query(s, t, F);
    a.level = H.level;
    a.kernel_vertices = H.vertices.size();
    a.kernel_edges = H.edges.size();
    const WeightedPath hp = H.shortest_path(s, t);
    if (hp.path.empty()) {
        a.reason = "disconnected in kernel";
        return a;
    }
    const GeoGraph& sg = k_.graph();
    PathOracle po = short_;
    bool activated = false;
    std::vector<VertexId> walk{s};
    for (std::size_t i = 0; i + 1 < hp.path.size(); ++i) {
        const VertexId x = hp.path[i], y = hp.path[i + 1];
        const KernelEdge* e = H.edge(x, y);
        if (!e) throw InternalConsistencyError("kernel path uses a missing edge");
        std::vector<VertexId> sub;
        if (e->kind == EdgeKind::FtPath) {
            sub = k_.bank().node_path(e->a, e->b, e->level, e->ft_node, x);
        } else {
            if (!activated) {
                po.activate(F);
                activated = true;
            }
            auto p = po.any_path(x, y);
            if (!p) {
                std::ostringstream msg;
                msg << "no replacement walk for short kernel edge (" << x << "," << y << ") at level " << e->level;
                throw InternalConsistencyError(msg.str());
            }
            sub = std::move(*p);
        }
        if (sub.empty() || sub.front() != x || sub.back() != y)
            throw InternalConsistencyError("expanded kernel edge has wrong endpoints");
        ExpansionStep st{x, y, e->kind, e->level, e->w, path_length(sg, sub), sub.size() - 1};
        a.expansion_log.push_back(st);
        walk.insert(walk.end(), sub.begin() + 1, sub.end());
    }
    if (simplify) walk = erase_loops(walk);
    a.path = k_.split().project(walk);
    if (simplify) a.path = erase_loops(a.path);
    a.split_path = std::move(walk);
    a.length = path_length(k_.input(), a.path);
    return a;
}

} // namespace ftoracle
