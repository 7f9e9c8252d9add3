#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

#include "ftoracle/graph.hpp"

namespace ftoracle {

// Reusable Dijkstra state; resets only the entries a run touched, so bounded
// searches cost proportional to the explored region.
//
// Ties: among equal distances the smaller source label wins, then the smaller
// predecessor id.  This makes the shortest-path tree canonical.
class ShortestPaths {
public:
    explicit ShortestPaths(std::size_t n = 0) { resize(n); }

    void resize(std::size_t n) {
        dist_.assign(n, kInf);
        pred_.assign(n, kNoVertex);
        origin_.assign(n, kNoVertex);
        done_.assign(n, 0);
        touched_.clear();
        settled_.clear();
    }
    std::size_t capacity() const { return dist_.size(); }

    // Adj provides out(v) -> range of Arc.  Vertices for which blocked(v) is
    // true are never entered.  Labels beyond cap stay at +inf.  If target is
    // given the search stops once it is settled.
    template <class Adj, class Blocked>
    void run(const Adj& adj, std::span<const VertexId> sources, Blocked&& blocked, double cap = kInf,
             VertexId target = kNoVertex) {
        clear();
        using Item = std::tuple<double, VertexId, VertexId>; // dist, origin, vertex
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        for (auto s : sources) {
            if (blocked(s)) continue;
            if (dist_[s] == 0 && origin_[s] <= s) continue;
            touch(s);
            dist_[s] = 0;
            origin_[s] = s;
            pred_[s] = kNoVertex;
            pq.emplace(0.0, s, s);
        }
        while (!pq.empty()) {
            auto [d, o, u] = pq.top();
            pq.pop();
            if (done_[u] || d != dist_[u] || o != origin_[u]) continue;
            done_[u] = 1;
            settled_.push_back(u);
            if (u == target) break;
            for (const Arc& a : adj.out(u)) {
                const VertexId w = a.to;
                if (done_[w]) continue;
                const double nd = d + a.w;
                if (nd > cap) continue;
                const double cur = dist_[w];
                bool better = nd < cur;
                if (!better && nd == cur)
                    better = o < origin_[w] || (o == origin_[w] && u < pred_[w]);
                if (!better || blocked(w)) continue;
                touch(w);
                dist_[w] = nd;
                origin_[w] = o;
                pred_[w] = u;
                pq.emplace(nd, o, w);
            }
        }
    }

    template <class Adj>
    void run(const Adj& adj, VertexId source, double cap = kInf, VertexId target = kNoVertex) {
        VertexId s[1] = {source};
        run(adj, s, [](VertexId) { return false; }, cap, target);
    }

    double dist(VertexId v) const { return dist_[v]; }
    VertexId pred(VertexId v) const { return pred_[v]; }
    VertexId origin(VertexId v) const { return origin_[v]; }
    bool settled(VertexId v) const { return done_[v] != 0; }
    // Settled vertices in order of settlement.
    std::span<const VertexId> settled() const { return settled_; }

    // Source-to-v vertex sequence; empty if v was not reached.
    std::vector<VertexId> path_to(VertexId v) const {
        std::vector<VertexId> p;
        if (dist_[v] == kInf) return p;
        for (VertexId x = v; x != kNoVertex; x = pred_[x]) p.push_back(x);
        std::reverse(p.begin(), p.end());
        return p;
    }

private:
    void touch(VertexId v) {
        if (dist_[v] == kInf && origin_[v] == kNoVertex) touched_.push_back(v);
    }
    void clear() {
        for (auto v : touched_) {
            dist_[v] = kInf;
            pred_[v] = kNoVertex;
            origin_[v] = kNoVertex;
            done_[v] = 0;
        }
        touched_.clear();
        settled_.clear();
    }

    std::vector<double> dist_;
    std::vector<VertexId> pred_;
    std::vector<VertexId> origin_;
    std::vector<char> done_;
    std::vector<VertexId> touched_;
    std::vector<VertexId> settled_;
};

struct SsspResult {
    std::vector<double> dist;
    std::vector<VertexId> pred;
    std::vector<VertexId> path_to(VertexId v) const;
};

// Single-source shortest paths in g - avoid.  Throws PreconditionError if the
// source is in avoid.
SsspResult dijkstra(const GeoGraph& g, VertexId source, const FailureSet& avoid = {}, double radius_cap = kInf);

// Exact d_{G-F}(s,t) / one shortest path (empty when disconnected).
double ground_truth_distance(const GeoGraph& g, VertexId s, VertexId t, const FailureSet& F);
std::vector<VertexId> ground_truth_path(const GeoGraph& g, VertexId s, VertexId t, const FailureSet& F);

struct WeightedPath {
    double length = kInf;
    std::vector<VertexId> path;
};

// Shortest path whose vertices all lie at graph distance >= t*r from every
// failed vertex (distance measured in g itself).
std::optional<WeightedPath> shortest_safe_path(const GeoGraph& g, VertexId u, VertexId v, const FailureSet& F,
                                               double t, double r);

} // namespace ftoracle
