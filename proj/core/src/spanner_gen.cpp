#include "ftoracle/spanner_gen.hpp"

#include <algorithm>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <tuple>

#include "ftoracle/dijkstra.hpp"

namespace ftoracle {

std::string to_string(Distribution d) {
    switch (d) {
    case Distribution::UniformSquare: return "uniform";
    case Distribution::Clustered: return "clustered";
    case Distribution::Grid: return "grid";
    case Distribution::Hierarchical: return "hierarchical";
    }
    return "?";
}

std::optional<Distribution> parse_distribution(const std::string& s) {
    if (s == "uniform" || s == "uniform-square") return Distribution::UniformSquare;
    if (s == "clustered") return Distribution::Clustered;
    if (s == "grid") return Distribution::Grid;
    if (s == "hierarchical") return Distribution::Hierarchical;
    return std::nullopt;
}

namespace {

// mt19937_64 output is fixed by the standard; the conversions below are ours,
// so point sets do not depend on the library's distribution implementations.
struct Rng {
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        double a = uniform();
        double b = uniform();
        if (a < 1e-300) a = 1e-300;
        return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * std::numbers::pi * b);
    }
    Point in_disk(Point c, double r) {
        double rad = r * std::sqrt(uniform());
        double ang = 2.0 * std::numbers::pi * uniform();
        return {c.x + rad * std::cos(ang), c.y + rad * std::sin(ang)};
    }
    std::mt19937_64 eng;
};

void dedupe(std::vector<Point>& pts, Rng& rng, double jitter) {
    // Coincident points would create zero-length edges; nudge them apart.
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (pts[i].x == pts[j].x && pts[i].y == pts[j].y) {
                pts[i].x += jitter * rng.uniform(0.5, 1.0);
                j = static_cast<std::size_t>(-1);
            }
        }
    }
}

} // namespace

std::vector<Point> generate_points(const SpannerSpec& spec) {
    if (spec.n < 2) throw PreconditionError("n must be >= 2");
    Rng rng(spec.seed);
    std::vector<Point> pts;
    pts.reserve(spec.n);
    const std::size_t n = spec.n;
    switch (spec.distribution) {
    case Distribution::UniformSquare:
        for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(), rng.uniform()});
        break;
    case Distribution::Clustered: {
        std::size_t k = std::max<std::size_t>(2, n / 25);
        std::vector<Point> centers;
        for (std::size_t i = 0; i < k; ++i) centers.push_back({rng.uniform(), rng.uniform()});
        for (std::size_t i = 0; i < n; ++i) {
            Point c = centers[i % k];
            pts.push_back({c.x + 0.03 * rng.normal(), c.y + 0.03 * rng.normal()});
        }
        break;
    }
    case Distribution::Grid: {
        auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        for (std::size_t i = 0; i < n; ++i) {
            double x = static_cast<double>(i % side) + rng.uniform(-0.05, 0.05);
            double y = static_cast<double>(i / side) + rng.uniform(-0.05, 0.05);
            pts.push_back({x / side, y / side});
        }
        break;
    }
    case Distribution::Hierarchical: {
        // Three concentric point clouds at radii 1, 1e-7, 1e-14 around the
        // origin, so several well separated distance scales coexist.
        const std::size_t n0 = n - n / 2;
        const std::size_t n1 = (n - n0) / 2;
        const double radii[3] = {1.0, 1e-7, 1e-14};
        const std::size_t counts[3] = {n0, n1, n - n0 - n1};
        for (int lvl = 0; lvl < 3; ++lvl)
            for (std::size_t i = 0; i < counts[lvl]; ++i) pts.push_back(rng.in_disk({0, 0}, radii[lvl]));
        break;
    }
    }
    dedupe(pts, rng, 1e-9);
    return pts;
}

namespace {

struct DynGraph {
    std::vector<std::vector<Arc>> adj;
    std::span<const Arc> out(VertexId v) const { return adj[v]; }
    std::size_t size() const { return adj.size(); }
};

// Bounded A* with the Euclidean heuristic (consistent for geometric weights).
// Only explores vertices x with g(x) + |xv| <= bound.
class AStar {
public:
    explicit AStar(std::size_t n) : g_(n, kInf), pred_(n, kNoVertex), closed_(n, 0) {}

    template <class Adj, class Blocked>
    bool run(const Adj& adj, std::span<const Point> pts, VertexId s, VertexId t, double bound, Blocked&& blocked,
             std::vector<VertexId>* path) {
        reset();
        const Point pt = pts[t];
        // Comparisons carry a little slack so that equal-length alternatives
        // (and rounding in the heuristic) are not pruned.
        const double lim = bound * (1 + 1e-12);
        using Item = std::tuple<double, double, VertexId>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        set(s, 0.0, kNoVertex);
        pq.emplace(dist(pts[s], pt), 0.0, s);
        while (!pq.empty()) {
            auto [fx, gx, x] = pq.top();
            pq.pop();
            if (closed_[x] || gx != g_[x]) continue;
            if (x == t) {
                if (path) {
                    path->clear();
                    for (VertexId y = t; y != kNoVertex; y = pred_[y]) path->push_back(y);
                    std::reverse(path->begin(), path->end());
                }
                return gx <= bound * (1 + 1e-12);
            }
            closed_[x] = 1;
            for (const Arc& a : adj.out(x)) {
                if (closed_[a.to]) continue;
                double ng = gx + a.w;
                if (ng >= g_[a.to]) continue;
                double h = dist(pts[a.to], pt);
                if (ng + h > lim || blocked(a.to)) continue;
                set(a.to, ng, x);
                pq.emplace(ng + h, ng, a.to);
            }
        }
        return false;
    }

private:
    void set(VertexId v, double g, VertexId p) {
        if (g_[v] == kInf) touched_.push_back(v);
        g_[v] = g;
        pred_[v] = p;
    }
    void reset() {
        for (auto v : touched_) {
            g_[v] = kInf;
            pred_[v] = kNoVertex;
            closed_[v] = 0;
        }
        touched_.clear();
    }
    std::vector<double> g_;
    std::vector<VertexId> pred_;
    std::vector<char> closed_;
    std::vector<VertexId> touched_;
};

// Exact robustness test for one pair.  Any violating F must hit the current
// short path, so branching on its interior vertices (depth <= f) is complete.
template <class Adj>
class RobustChecker {
public:
    RobustChecker(const Adj& adj, std::span<const Point> pts)
        : adj_(adj), pts_(pts), astar_(adj.size()), blocked_(adj.size(), 0) {}

    bool check(VertexId u, VertexId v, double bound, int f, std::vector<VertexId>* witness) {
        std::vector<VertexId> path;
        if (!astar_.run(adj_, pts_, u, v, bound, no_block(), &path)) {
            if (witness) witness->clear();
            return false;
        }
        if (f == 0 || path.size() <= 2) return true;
        if (disjoint_paths(u, v, bound, f, path)) return true;
        seen_.clear();
        std::vector<VertexId> F;
        return branch(u, v, bound, f, F, witness);
    }

private:
    auto no_block() {
        return [](VertexId) { return false; };
    }
    auto by_mask() {
        return [this](VertexId x) { return blocked_[x] != 0; };
    }

    // f+1 internally disjoint short paths certify the pair.
    bool disjoint_paths(VertexId u, VertexId v, double bound, int f, const std::vector<VertexId>& first) {
        std::vector<VertexId> marked;
        auto mark = [&](const std::vector<VertexId>& p) {
            for (std::size_t i = 1; i + 1 < p.size(); ++i) {
                blocked_[p[i]] = 1;
                marked.push_back(p[i]);
            }
        };
        mark(first);
        bool ok = true;
        std::vector<VertexId> p;
        for (int k = 1; k <= f && ok; ++k) {
            ok = astar_.run(adj_, pts_, u, v, bound, by_mask(), &p);
            if (ok) {
                if (p.size() <= 2) break; // direct edge cannot be hit
                mark(p);
            }
        }
        for (auto x : marked) blocked_[x] = 0;
        return ok;
    }

    bool branch(VertexId u, VertexId v, double bound, int depth, std::vector<VertexId>& F,
                std::vector<VertexId>* witness) {
        std::vector<VertexId> path;
        for (auto x : F) blocked_[x] = 1;
        bool found = astar_.run(adj_, pts_, u, v, bound, by_mask(), &path);
        for (auto x : F) blocked_[x] = 0;
        if (!found) {
            if (witness) *witness = F;
            return false;
        }
        if (depth == 0) return true;
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
            F.push_back(path[i]);
            auto key = F;
            std::sort(key.begin(), key.end());
            bool fresh = seen_.insert(key).second;
            bool ok = !fresh || branch(u, v, bound, depth - 1, F, witness);
            F.pop_back();
            if (!ok) return false;
        }
        return true;
    }

    const Adj& adj_;
    std::span<const Point> pts_;
    AStar astar_;
    std::vector<char> blocked_;
    std::set<std::vector<VertexId>> seen_;
};

} // namespace

GeoGraph greedy_ft_spanner(std::vector<Point> points, double t, int f, double max_len) {
    const std::size_t n = points.size();
    struct Pair {
        double d;
        VertexId u, v;
    };
    std::vector<Pair> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (VertexId u = 0; u < n; ++u)
        for (VertexId v = u + 1; v < n; ++v) {
            double d = dist(points[u], points[v]);
            if (d <= max_len) pairs.push_back({d, u, v});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.d, a.u, a.v) < std::tie(b.d, b.u, b.v);
    });
    DynGraph dg;
    dg.adj.resize(n);
    RobustChecker<DynGraph> checker(dg, points);
    std::vector<Edge> edges;
    for (const auto& p : pairs) {
        if (checker.check(p.u, p.v, t * p.d, f, nullptr)) continue;
        dg.adj[p.u].push_back({p.v, p.d});
        dg.adj[p.v].push_back({p.u, p.d});
        edges.push_back({p.u, p.v});
    }
    GraphMeta meta{t, f, max_len};
    return GeoGraph(std::move(points), std::move(edges), meta);
}

GeoGraph generate_ft_spanner(const SpannerSpec& spec) {
    if (!(spec.t > 1.0)) throw PreconditionError("t must be > 1");
    if (spec.f < 0) throw PreconditionError("f must be >= 0");
    return greedy_ft_spanner(generate_points(spec), spec.t, spec.f);
}

bool robust_within(const GeoGraph& g, VertexId u, VertexId v, double bound, int f, std::vector<VertexId>* witness) {
    RobustChecker<GeoGraph> checker(g, g.points());
    return checker.check(u, v, bound, f, witness);
}

namespace {

double binom_sum(std::size_t n, int f, double cap) {
    double total = 0, term = 1;
    for (int k = 0; k <= f; ++k) {
        if (k > 0) term = term * static_cast<double>(n - k + 1) / k;
        total += term;
        if (total > cap) return total;
    }
    return total;
}

template <class Fn>
void for_each_subset(std::size_t n, int k, Fn&& fn) {
    std::vector<VertexId> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (static_cast<std::size_t>(k) > n) return;
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

ValidationReport validate_ft_spanner(const GeoGraph& g, double t, int f, double L, ValidationOptions opts) {
    ValidationReport rep;
    const std::size_t n = g.num_vertices();
    auto in_range = [&](VertexId a, VertexId b) { return g.euclid(a, b) <= L; };
    auto record = [&](VertexId a, VertexId b, std::vector<VertexId> F, double d) {
        if (rep.violations.size() < opts.max_violations)
            rep.violations.push_back({a, b, std::move(F), d, t * g.euclid(a, b)});
    };
    f = std::max(f, 0);
    if (binom_sum(n, f, static_cast<double>(opts.exhaustive_limit)) <= static_cast<double>(opts.exhaustive_limit)) {
        rep.exhaustive = true;
        ShortestPaths sp(n);
        std::vector<char> failed(n, 0);
        std::vector<std::pair<VertexId, VertexId>> bad_pairs;
        for (int k = 0; k <= f && static_cast<std::size_t>(k) <= n; ++k) {
            for_each_subset(n, k, [&](const std::vector<VertexId>& F) {
                ++rep.failure_sets_checked;
                for (auto x : F) failed[x] = 1;
                for (VertexId u = 0; u < n; ++u) {
                    if (failed[u]) continue;
                    VertexId src[1] = {u};
                    sp.run(g, src, [&](VertexId x) { return failed[x] != 0; });
                    for (VertexId v = u + 1; v < n; ++v) {
                        if (failed[v] || !in_range(u, v)) continue;
                        double d = sp.settled(v) ? sp.dist(v) : kInf;
                        if (d > t * g.euclid(u, v) * (1 + 1e-12)) record(u, v, F, d);
                    }
                }
                for (auto x : F) failed[x] = 0;
            });
        }
        for (VertexId u = 0; u < n; ++u)
            for (VertexId v = u + 1; v < n; ++v) rep.pairs_checked += in_range(u, v);
        return rep;
    }
    RobustChecker<GeoGraph> checker(g, g.points());
    std::vector<VertexId> witness;
    for (VertexId u = 0; u < n; ++u) {
        for (VertexId v = u + 1; v < n; ++v) {
            if (!in_range(u, v)) continue;
            ++rep.pairs_checked;
            if (!checker.check(u, v, t * g.euclid(u, v), f, &witness)) {
                FailureSet F(witness);
                record(u, v, witness, ground_truth_distance(g, u, v, F));
                if (rep.violations.size() >= opts.max_violations) return rep;
            }
        }
    }
    return rep;
}

} // namespace ftoracle
