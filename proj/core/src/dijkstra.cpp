#include "ftoracle/dijkstra.hpp"

namespace ftoracle {

std::vector<VertexId> SsspResult::path_to(VertexId v) const {
    std::vector<VertexId> p;
    if (v >= dist.size() || dist[v] == kInf) return p;
    for (VertexId x = v; x != kNoVertex; x = pred[x]) p.push_back(x);
    std::reverse(p.begin(), p.end());
    return p;
}

SsspResult dijkstra(const GeoGraph& g, VertexId source, const FailureSet& avoid, double radius_cap) {
    if (!g.valid_vertex(source)) throw PreconditionError("source out of range");
    if (avoid.contains(source)) throw PreconditionError("source vertex is failed");
    ShortestPaths sp(g.num_vertices());
    VertexId src[1] = {source};
    sp.run(g, src, [&](VertexId v) { return avoid.contains(v); }, radius_cap);
    SsspResult r;
    r.dist.resize(g.num_vertices());
    r.pred.resize(g.num_vertices());
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        // Tentative labels past the cap are not final; report them as unvisited.
        r.dist[v] = sp.settled(v) ? sp.dist(v) : kInf;
        r.pred[v] = sp.settled(v) ? sp.pred(v) : kNoVertex;
    }
    return r;
}

double ground_truth_distance(const GeoGraph& g, VertexId s, VertexId t, const FailureSet& F) {
    if (F.contains(s) || F.contains(t)) throw PreconditionError("query endpoint is failed");
    ShortestPaths sp(g.num_vertices());
    VertexId src[1] = {s};
    sp.run(g, src, [&](VertexId v) { return F.contains(v); }, kInf, t);
    return sp.settled(t) ? sp.dist(t) : kInf;
}

std::vector<VertexId> ground_truth_path(const GeoGraph& g, VertexId s, VertexId t, const FailureSet& F) {
    if (F.contains(s) || F.contains(t)) throw PreconditionError("query endpoint is failed");
    ShortestPaths sp(g.num_vertices());
    VertexId src[1] = {s};
    sp.run(g, src, [&](VertexId v) { return F.contains(v); }, kInf, t);
    return sp.settled(t) ? sp.path_to(t) : std::vector<VertexId>{};
}

std::optional<WeightedPath> shortest_safe_path(const GeoGraph& g, VertexId u, VertexId v, const FailureSet& F,
                                               double t, double r) {
    if (F.contains(u) || F.contains(v)) throw PreconditionError("query endpoint is failed");
    const std::size_t n = g.num_vertices();
    std::vector<char> unsafe(n, 0);
    if (!F.empty()) {
        // Ball of radius < t*r around F in the graph metric of g (F not removed).
        ShortestPaths ball(n);
        ball.run(g, F.ids(), [](VertexId) { return false; }, t * r);
        for (auto x : ball.settled())
            if (ball.dist(x) < t * r) unsafe[x] = 1;
        for (auto x : F) unsafe[x] = 1;
    }
    if (unsafe[u] || unsafe[v]) return std::nullopt;
    ShortestPaths sp(n);
    VertexId src[1] = {u};
    sp.run(g, src, [&](VertexId x) { return unsafe[x] != 0; }, kInf, v);
    if (!sp.settled(v)) return std::nullopt;
    return WeightedPath{sp.dist(v), sp.path_to(v)};
}

} // namespace ftoracle
