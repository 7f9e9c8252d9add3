#include "ftoracle/net.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "ftoracle/dijkstra.hpp"

namespace ftoracle {

namespace {

// Lowers near[] by a Dijkstra from `src` truncated at distance < r; only
// vertices whose label improves are expanded, so repeated calls share work.
void lower_from(const GeoGraph& g, VertexId src, double r, std::vector<double>& near) {
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    near[src] = 0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d != near[u]) continue;
        for (const Arc& a : g.out(u)) {
            double nd = d + a.w;
            if (nd < r && nd < near[a.to]) {
                near[a.to] = nd;
                pq.emplace(nd, a.to);
            }
        }
    }
}

} // namespace

void assign_closest(const GeoGraph& g, Net& net) {
    const auto n = g.num_vertices();
    net.is_member.assign(n, 0);
    for (auto m : net.members) net.is_member[m] = 1;
    ShortestPaths sp(n);
    sp.run(g, net.members, [](VertexId) { return false; });
    net.closest.assign(n, kNoVertex);
    net.closest_dist.assign(n, kInf);
    for (VertexId v = 0; v < n; ++v) {
        if (!sp.settled(v)) continue;
        net.closest[v] = sp.origin(v);
        net.closest_dist[v] = sp.dist(v);
    }
}

Net extend_net(const GeoGraph& g, double r, std::span<const VertexId> seed) {
    if (!(r > 0)) throw PreconditionError("net radius must be positive");
    const auto n = g.num_vertices();
    Net net;
    net.r = r;
    std::vector<double> near(n, kInf);
    std::vector<char> member(n, 0);
    for (auto s : seed) {
        member[s] = 1;
        lower_from(g, s, r, near);
    }
    for (VertexId v = 0; v < n; ++v) {
        if (member[v] || near[v] < r) continue;
        member[v] = 1;
        lower_from(g, v, r, near);
    }
    for (VertexId v = 0; v < n; ++v)
        if (member[v]) net.members.push_back(v);
    assign_closest(g, net);
    return net;
}

Net build_net(const GeoGraph& g, double r) { return extend_net(g, r, {}); }

std::vector<Net> build_aligned_nets(const GeoGraph& g, std::span<const double> radii) {
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i - 1] <= radii[i])) throw PreconditionError("net radii must be non-decreasing");
    std::vector<Net> nets(radii.size());
    // Coarsest first; each finer level keeps every coarser member.
    std::vector<VertexId> seed;
    for (std::size_t k = radii.size(); k-- > 0;) {
        nets[k] = extend_net(g, radii[k], seed);
        seed = nets[k].members;
    }
    return nets;
}

} // namespace ftoracle
