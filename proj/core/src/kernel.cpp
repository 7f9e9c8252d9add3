#include "ftoracle/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ftoracle/dijkstra.hpp"

namespace ftoracle {

// ---- levels ------------------------------------------------------------------

ScaleLevels ScaleLevels::make(double L, double m) {
    if (!(L > 0) || !std::isfinite(L)) throw PreconditionError("scale levels need a finite L > 0");
    if (!(m >= 2)) m = 2;
    ScaleLevels s;
    s.W0 = L / (2.0 * std::pow(m, 6));
    s.K = static_cast<int>(std::ceil(6.0 * std::log2(m))) + 1;
    return s;
}

std::optional<int> ScaleLevels::level_of(double d) const {
    if (!(d > 0) || !std::isfinite(d)) return std::nullopt;
    int i = static_cast<int>(std::floor(std::log2(d / W0))) + 1;
    // Exact fix-up against powers of two: want W_{i-1} <= d < W_i.
    while (W(i) <= d) ++i;
    while (i > 0 && W(i - 1) > d) --i;
    if (i < 1 || i > K) return std::nullopt;
    return i;
}

// ---- splitting -----------------------------------------------------------------

std::vector<VertexId> SplitGraph::project(std::span<const VertexId> walk) const {
    std::vector<VertexId> out;
    for (auto v : walk) {
        if (!is_original(v)) continue;
        if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
}

SplitGraph split_graph(const GeoGraph& g0, double L, double t, double eps_prime, double m_floor,
                       const SplitOptions& opts) {
    SplitGraph sg;
    sg.original_vertices = g0.num_vertices();
    sg.original_edges = g0.num_edges();
    sg.eps_prime = eps_prime;
    sg.subdivided = opts.subdivide;
    sg.input_edges.assign(g0.edges().begin(), g0.edges().end());
    const std::size_t mo = g0.num_edges();
    sg.dropped.assign(mo, 0);
    sg.governing_level.assign(mo, 0);
    sg.pieces.assign(mo, 1);

    const auto lv = ScaleLevels::make(L, std::max<double>(static_cast<double>(mo), m_floor));
    const double threshold = eps_prime * L / (4.0 * std::pow(std::max<double>(static_cast<double>(mo), std::max(m_floor, 2.0)), 6));
    std::size_t extra = 0;
    for (std::size_t e = 0; e < mo; ++e) {
        const double len = g0.edge_length(e);
        if (len >= 2 * L) {
            sg.dropped[e] = 1;
            continue;
        }
        if (!opts.subdivide || !(len > threshold)) continue;
        int j = 1;
        while (4 * t * lv.W(j) < len) ++j;
        const double piece = eps_prime * lv.W(j) / 4.0;
        const double k = std::ceil(len / piece);
        if (k > static_cast<double>(opts.max_split_vertices))
            throw CapExceededError("edge subdivision exceeds max_split_vertices");
        sg.governing_level[e] = j;
        sg.pieces[e] = static_cast<std::uint32_t>(std::max(1.0, k));
        extra += sg.pieces[e] - 1;
        if (extra > opts.max_split_vertices) throw CapExceededError("edge subdivision exceeds max_split_vertices");
    }

    std::vector<Point> pts(g0.points().begin(), g0.points().end());
    sg.origin.assign(pts.size(), -1);
    std::vector<Edge> edges;
    for (std::size_t e = 0; e < mo; ++e) {
        if (sg.dropped[e]) continue;
        const Edge ed = g0.edges()[e];
        const std::uint32_t k = sg.pieces[e];
        if (k <= 1) {
            edges.push_back(ed);
            continue;
        }
        const Point a = g0.point(ed.u), b = g0.point(ed.v);
        VertexId prev = ed.u;
        for (std::uint32_t i = 1; i < k; ++i) {
            const double s = static_cast<double>(i) / k;
            pts.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
            sg.origin.push_back(static_cast<std::int64_t>(e));
            const auto id = static_cast<VertexId>(pts.size() - 1);
            edges.push_back({prev, id});
            prev = id;
        }
        edges.push_back({prev, ed.v});
    }
    GraphMeta meta = g0.meta();
    meta.L = L;
    sg.graph = GeoGraph(std::move(pts), std::move(edges), meta);
    return sg;
}

// ---- kernel ----------------------------------------------------------------------

bool Kernel::has_vertex(VertexId v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }

const KernelEdge* Kernel::edge(VertexId a, VertexId b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(a, b), [](const KernelEdge& e, auto key) {
        return std::make_pair(e.a, e.b) < key;
    });
    if (it == edges.end() || it->a != a || it->b != b) return nullptr;
    return &*it;
}

WeightedPath Kernel::shortest_path(VertexId from, VertexId to) const {
    auto local = [&](VertexId v) {
        return static_cast<VertexId>(std::lower_bound(vertices.begin(), vertices.end(), v) - vertices.begin());
    };
    if (!has_vertex(from) || !has_vertex(to)) throw PreconditionError("kernel query vertex missing");
    std::vector<Edge> le;
    std::vector<double> w;
    for (const auto& e : edges) {
        le.push_back({local(e.a), local(e.b)});
        w.push_back(e.w);
    }
    Csr adj = Csr::undirected(vertices.size(), le, w);
    ShortestPaths sp(vertices.size());
    sp.run(adj, local(from), kInf, local(to));
    WeightedPath out;
    const VertexId lt = local(to);
    if (!sp.settled(lt)) return out;
    out.length = sp.dist(lt);
    for (auto x : sp.path_to(lt)) out.path.push_back(vertices[x]);
    return out;
}

// ---- bank --------------------------------------------------------------------------

FtBank::FtBank(const GeoGraph& g, const ScaleLevels& levels, const std::vector<Net>& nets, double eps,
               double eps_prime, double t, int f, std::size_t max_nodes, VicinityMode mode)
    : g_(&g), levels_(&levels), nets_(&nets), eps_(eps), eps_prime_(eps_prime), t_(t), f_(f), max_nodes_(max_nodes),
      mode_(mode) {}

bool FtBank::is_key(VertexId u, VertexId v, int j) const {
    if (u == v || j < 1 || j > levels_->K) return false;
    const Net& n = (*nets_)[j - 1];
    return n.contains(u) && n.contains(v) && g_->euclid(u, v) <= (1 + eps_) * t_ * levels_->W(j);
}

std::vector<std::tuple<VertexId, VertexId, int>> FtBank::keys() const {
    std::vector<std::tuple<VertexId, VertexId, int>> out;
    for (int j = 1; j <= levels_->K; ++j) {
        const auto& mem = (*nets_)[j - 1].members;
        for (std::size_t a = 0; a < mem.size(); ++a)
            for (std::size_t b = a + 1; b < mem.size(); ++b)
                if (is_key(mem[a], mem[b], j)) out.emplace_back(mem[a], mem[b], j);
    }
    return out;
}

bool FtBank::in_range(VertexId u, VertexId v, int j) const {
    if (u == v || j < 1 || j > levels_->K) return false;
    return g_->euclid(u, v) <= (1 + eps_) * t_ * levels_->W(j);
}

FtTree& FtBank::tree_locked(VertexId u, VertexId v, int j) {
    if (u > v) std::swap(u, v);
    if (!in_range(u, v, j)) throw PreconditionError("no FT structure for this (u,v,j)");
    auto key = std::make_tuple(u, v, j);
    auto it = trees_.find(key);
    if (it != trees_.end()) return *it->second;
    const double Wj = levels_->W(j);
    const double radius =
        mode_ == VicinityMode::Pair ? 2 * t_ * g_->euclid(u, v) : 2 * (1 + eps_) * t_ * t_ * Wj;
    auto tree = std::make_unique<FtTree>(*g_, u, v, eps_prime_ * Wj, radius, FtOptions{f_, t_, max_nodes_});
    auto& ref = *tree;
    trees_.emplace(key, std::move(tree));
    return ref;
}

FtTree& FtBank::tree(VertexId u, VertexId v, int j) {
    std::lock_guard lk(mu_);
    return tree_locked(u, v, j);
}

std::optional<std::pair<std::int32_t, double>> FtBank::query(VertexId u, VertexId v, int j, const FailureSet& F) {
    std::lock_guard lk(mu_);
    auto r = tree_locked(u, v, j).query(F);
    if (!r) return std::nullopt;
    return std::make_pair(r->node, r->length);
}

std::vector<VertexId> FtBank::node_path(VertexId a, VertexId b, int j, std::int32_t node, VertexId from) {
    std::lock_guard lk(mu_);
    FtTree& t = tree_locked(a, b, j);
    if (node < 0 || static_cast<std::size_t>(node) >= t.num_nodes())
        throw InternalConsistencyError("FT node id out of range");
    std::vector<VertexId> p = t.node(node).path;
    if (!p.empty() && p.front() != from) std::reverse(p.begin(), p.end());
    return p;
}

std::size_t FtBank::materialized() const {
    std::lock_guard lk(mu_);
    return trees_.size();
}

// ---- oracle --------------------------------------------------------------------------

KernelOracle::KernelOracle(const GeoGraph& g0, KernelParams p) : g0_(&g0), p_(p) { init(nullptr); }

KernelOracle::KernelOracle(const GeoGraph& g0, KernelParams p, const std::vector<std::vector<VertexId>>& members)
    : g0_(&g0), p_(p) {
    init(&members);
}

void KernelOracle::init(const std::vector<std::vector<VertexId>>* members) {
    if (!(p_.eps > 0)) throw PreconditionError("eps must be positive");
    if (!(p_.t >= 1)) throw PreconditionError("t must be >= 1");
    if (p_.f < 0) throw PreconditionError("f must be >= 0");
    const double eps_prime =
        p_.eps_prime > 0 ? p_.eps_prime : p_.eps / (p_.eps_prime_divisor * p_.t * p_.t * p_.t * (p_.f + 1));
    split_ = split_graph(*g0_, p_.L, p_.t, eps_prime, p_.m_floor, p_.split);
    m_ = std::max({static_cast<double>(split_.graph.num_edges()), p_.m_floor, 2.0});
    levels_ = ScaleLevels::make(p_.L, m_);
    std::vector<double> radii;
    for (int j = 1; j <= levels_.K; ++j) radii.push_back(eps_prime * levels_.W(j));
    if (members) {
        if (members->size() != radii.size()) throw PreconditionError("net member lists do not match level count");
        nets_.resize(radii.size());
        for (std::size_t k = 0; k < radii.size(); ++k) {
            nets_[k].r = radii[k];
            nets_[k].members = (*members)[k];
            for (auto v : nets_[k].members)
                if (!split_.graph.valid_vertex(v)) throw PreconditionError("net member out of range");
            assign_closest(split_.graph, nets_[k]);
        }
    } else {
        nets_ = build_aligned_nets(split_.graph, radii);
    }
    bank_ = std::make_unique<FtBank>(split_.graph, levels_, nets_, p_.eps, eps_prime, p_.t, p_.f, p_.max_nodes,
                                     p_.vicinity);
}

double KernelOracle::kappa() const { return 4 * p_.t * p_.t + 8 * p_.t + 5; }

double KernelOracle::short_weight(int j) const {
    return 40 * p_.t * p_.t * p_.t * eps_prime() * levels_.W(j);
}

bool KernelOracle::moderately_far(VertexId s, VertexId t) const {
    const double d = g0_->euclid(s, t);
    return d >= p_.L / (m_ * m_) && d < p_.L / p_.t;
}

int KernelOracle::level_for(VertexId s, VertexId t) const {
    if (!moderately_far(s, t)) throw PreconditionError("query pair is not moderately far");
    auto i = levels_.level_of(g0_->euclid(s, t));
    if (!i) throw PreconditionError("no scale level for query pair");
    return *i;
}

void KernelOracle::check_query(VertexId s, VertexId t, const FailureSet& F) const {
    if (s >= split_.original_vertices || t >= split_.original_vertices)
        throw PreconditionError("query vertex out of range");
    if (F.contains(s) || F.contains(t)) throw PreconditionError("query endpoint is failed");
    for (auto x : F)
        if (x >= split_.original_vertices) throw PreconditionError("failed vertex out of range");
    if (F.size() > static_cast<std::size_t>(p_.f)) throw PreconditionError("more than f failures");
}

bool KernelOracle::touches_failure(VertexId v, const FailureSet& F) const {
    if (v >= split_.origin.size() || split_.origin[v] < 0) return false;
    const Edge& e = split_.input_edges[static_cast<std::size_t>(split_.origin[v])];
    return F.contains(e.u) || F.contains(e.v);
}

const std::vector<std::pair<VertexId, double>>& KernelOracle::near_list(VertexId x, int j) {
    const std::uint64_t key = (static_cast<std::uint64_t>(x) << 16) | static_cast<std::uint64_t>(j);
    {
        std::lock_guard lk(near_mu_);
        auto it = near_.find(key);
        if (it != near_.end()) return it->second;
    }
    const GeoGraph& g = split_.graph;
    ShortestPaths sp(g.num_vertices());
    sp.run(g, x, kappa() * net(j).r);
    std::vector<std::pair<VertexId, double>> out;
    for (auto v : sp.settled())
        if (net(j).contains(v)) out.emplace_back(v, sp.dist(v));
    std::sort(out.begin(), out.end());
    std::lock_guard lk(near_mu_);
    return near_.emplace(key, std::move(out)).first->second;
}

std::vector<VertexId> KernelOracle::near_net_lookup(VertexId x, int j, double radius) {
    if (j < 1 || j > levels_.K) throw PreconditionError("level out of range");
    if (radius > kappa() * net(j).r * (1 + 1e-12)) throw PreconditionError("lookup radius too large");
    std::vector<VertexId> out;
    for (const auto& [v, d] : near_list(x, j))
        if (d <= radius) out.push_back(v);
    return out;
}

// Decides the kernel edge between two vertices at one level; caches the
// bounded balls used by the distance rule.
class KernelOracle::EdgeRule {
public:
    EdgeRule(KernelOracle& o, const FailureSet& F) : o_(o), F_(F), sp_(o.graph().num_vertices()) {}

    // Portals may carry FT edges to net vertices and to each other.
    void set_portals(std::vector<VertexId> p) { portals_ = std::move(p); }

    std::optional<KernelEdge> decide(VertexId a, VertexId b, int j) {
        if (a > b) std::swap(a, b);
        KernelEdge e;
        e.a = a;
        e.b = b;
        e.level = j;
        auto portal = [&](VertexId x) { return std::binary_search(portals_.begin(), portals_.end(), x); };
        auto member = [&](VertexId x) { return o_.net(j).contains(x); };
        const bool ft = o_.bank().is_key(a, b, j) ||
                        ((portal(a) || portal(b)) && (portal(a) || member(a)) && (portal(b) || member(b)) &&
                         o_.bank().in_range(a, b, j));
        if (ft) {
            if (auto q = o_.bank().query(a, b, j, F_)) {
                e.kind = EdgeKind::FtPath;
                e.ft_node = q->first;
                e.w = q->second;
                return e;
            }
        }
        if (o_.touches_failure(a, F_) || o_.touches_failure(b, F_)) return std::nullopt;
        const auto& ball = ball_of(a, j);
        auto it = std::lower_bound(ball.begin(), ball.end(), std::make_pair(b, -kInf));
        if (it == ball.end() || it->first != b) return std::nullopt;
        e.kind = EdgeKind::Short;
        e.w = o_.short_weight(j);
        return e;
    }

private:
    const std::vector<std::pair<VertexId, double>>& ball_of(VertexId a, int j) {
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 16) | static_cast<std::uint64_t>(j);
        auto it = balls_.find(key);
        if (it != balls_.end()) return it->second;
        sp_.run(o_.graph(), a, o_.kappa() * o_.net(j).r);
        std::vector<std::pair<VertexId, double>> ball;
        for (auto v : sp_.settled()) ball.emplace_back(v, sp_.dist(v));
        std::sort(ball.begin(), ball.end());
        return balls_.emplace(key, std::move(ball)).first->second;
    }

    KernelOracle& o_;
    const FailureSet& F_;
    std::vector<VertexId> portals_;
    ShortestPaths sp_;
    std::unordered_map<std::uint64_t, std::vector<std::pair<VertexId, double>>> balls_;
};

std::vector<VertexId> KernelOracle::portals(int j, const FailureSet& F) {
    // Without subdivision the edges leaving B(F, kappa r_j) carry no vertex
    // near the sphere, so their inner endpoints serve as entry points.
    const GeoGraph& g = graph();
    const double rad = kappa() * net(j).r;
    ShortestPaths sp(g.num_vertices());
    std::vector<VertexId> src(F.begin(), F.end());
    sp.run(g, src, [](VertexId) { return false; }, rad);
    std::vector<VertexId> out;
    for (auto y : sp.settled()) {
        if (F.contains(y)) continue;
        for (const Arc& a : g.out(y))
            if (!sp.settled(a.to)) {
                out.push_back(y);
                break;
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void finalize(Kernel& H, std::map<std::pair<VertexId, VertexId>, KernelEdge>& edges) {
    std::sort(H.vertices.begin(), H.vertices.end());
    H.vertices.erase(std::unique(H.vertices.begin(), H.vertices.end()), H.vertices.end());
    H.edges.clear();
    for (auto& [k, e] : edges) H.edges.push_back(e);
}

void keep_min(std::map<std::pair<VertexId, VertexId>, KernelEdge>& edges, const KernelEdge& e) {
    auto [it, fresh] = edges.emplace(std::make_pair(e.a, e.b), e);
    if (!fresh && e.w < it->second.w) it->second = e;
}

} // namespace

std::vector<VertexId> KernelOracle::level_portals(int j, VertexId s, VertexId t, const FailureSet& F) {
    std::vector<VertexId> P = portals(j, F);
    for (auto x : {s, t})
        if (F.contains(net(j).closest[x])) P.push_back(x);
    std::sort(P.begin(), P.end());
    P.erase(std::unique(P.begin(), P.end()), P.end());
    return P;
}

Kernel KernelOracle::kernel_query(VertexId s, VertexId t, const FailureSet& F) {
    check_query(s, t, F);
    const int i = level_for(s, t);
    const Net& N = net(i);
    Kernel H;
    H.level = i;
    H.s = s;
    H.t = t;
    H.vertices = {s, t, N.closest[s], N.closest[t]};
    const double rad = kappa() * N.r;
    for (auto x : F)
        for (auto u : near_net_lookup(x, i, rad)) H.vertices.push_back(u);
    H.portals = level_portals(i, s, t, F);
    H.vertices.insert(H.vertices.end(), H.portals.begin(), H.portals.end());
    std::erase_if(H.vertices, [&](VertexId v) { return v == kNoVertex || F.contains(v); });
    std::sort(H.vertices.begin(), H.vertices.end());
    H.vertices.erase(std::unique(H.vertices.begin(), H.vertices.end()), H.vertices.end());

    EdgeRule rule(*this, F);
    rule.set_portals(H.portals);
    std::map<std::pair<VertexId, VertexId>, KernelEdge> edges;
    for (std::size_t a = 0; a < H.vertices.size(); ++a)
        for (std::size_t b = a + 1; b < H.vertices.size(); ++b)
            if (auto e = rule.decide(H.vertices[a], H.vertices[b], i)) keep_min(edges, *e);
    finalize(H, edges);
    return H;
}

Kernel KernelOracle::pp_kernel_query(VertexId s, VertexId t, const FailureSet& F) {
    Kernel H0 = kernel_query(s, t, F);
    const int istar = H0.level;
    Kernel H;
    H.level = istar;
    H.s = s;
    H.t = t;
    H.vertices = H0.vertices;
    std::vector<VertexId> anchors(F.begin(), F.end());
    anchors.push_back(s);
    anchors.push_back(t);
    // near_f[j] = level-j net vertices within kappa r_j of F (minus F).
    std::vector<std::vector<VertexId>> near_f(istar + 1), portals_at(istar + 1);
    for (int j = 1; j <= istar; ++j) {
        const double rad = kappa() * net(j).r;
        for (auto x : anchors) {
            for (auto u : near_net_lookup(x, j, rad)) {
                if (F.contains(u)) continue;
                H.vertices.push_back(u);
                if (F.contains(x)) near_f[j].push_back(u);
            }
        }
        portals_at[j] = level_portals(j, s, t, F);
        for (auto u : portals_at[j]) {
            H.vertices.push_back(u);
            H.portals.push_back(u);
            near_f[j].push_back(u);
        }
        std::sort(near_f[j].begin(), near_f[j].end());
        near_f[j].erase(std::unique(near_f[j].begin(), near_f[j].end()), near_f[j].end());
    }
    std::sort(H.vertices.begin(), H.vertices.end());
    H.vertices.erase(std::unique(H.vertices.begin(), H.vertices.end()), H.vertices.end());
    std::sort(H.portals.begin(), H.portals.end());
    H.portals.erase(std::unique(H.portals.begin(), H.portals.end()), H.portals.end());

    std::map<std::pair<VertexId, VertexId>, KernelEdge> edges;
    for (const auto& e : H0.edges) edges.emplace(std::make_pair(e.a, e.b), e);

    EdgeRule rule(*this, F);
    for (int j = 1; j <= istar; ++j) {
        const Net& N = net(j);
        rule.set_portals(portals_at[j]);
        std::vector<VertexId> A;
        for (auto v : H.vertices)
            if (N.contains(v) || std::binary_search(portals_at[j].begin(), portals_at[j].end(), v)) A.push_back(v);
        const double Wj = levels_.W(j);
        // Union of the (p,q,F) kernels over well separated p,q in A.  Each
        // such kernel has vertex set {p,q} plus the level-j vertices near F
        // and the level-j portals.
        std::set<std::pair<VertexId, VertexId>> cand;
        bool any = false;
        auto add = [&](VertexId a, VertexId b) {
            if (a != b) cand.emplace(std::min(a, b), std::max(a, b));
        };
        for (std::size_t x = 0; x < A.size(); ++x) {
            for (std::size_t y = x + 1; y < A.size(); ++y) {
                const double d = graph().euclid(A[x], A[y]);
                if (!(d >= Wj / 2 && d < Wj)) continue;
                any = true;
                add(A[x], A[y]);
                for (auto u : near_f[j]) {
                    add(A[x], u);
                    add(A[y], u);
                }
            }
        }
        if (any)
            for (std::size_t x = 0; x < near_f[j].size(); ++x)
                for (std::size_t y = x + 1; y < near_f[j].size(); ++y) add(near_f[j][x], near_f[j][y]);
        for (const auto& [a, b] : cand)
            if (auto e = rule.decide(a, b, j)) keep_min(edges, *e);
    }
    finalize(H, edges);
    return H;
}

} // namespace ftoracle
