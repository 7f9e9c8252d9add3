#include "ftoracle/generalization.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "ftoracle/binary.hpp"
#include "ftoracle/spanner_gen.hpp"

namespace ftoracle {

namespace {

struct UnionFind {
    std::vector<VertexId> p;
    explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), VertexId{0}); }
    VertexId find(VertexId x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    // Smaller id becomes the root, so roots are canonical.
    bool unite(VertexId a, VertexId b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        p[b] = a;
        return true;
    }
};

} // namespace

// ---- sequences --------------------------------------------------------------

ScaleSequences ScaleSequences::build(const GeoGraph& g, double m, double t) {
    if (!(m > t)) throw PreconditionError("scale sequences need m > t");
    const auto n = g.num_vertices();
    std::vector<double> ds;
    ds.reserve(n * (n - 1) / 2);
    for (VertexId a = 0; a < n; ++a)
        for (VertexId b = a + 1; b < n; ++b) {
            const double d = g.euclid(a, b);
            if (d > 0) ds.push_back(d);
        }
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());

    std::vector<double> scales;
    std::size_t at = 0;
    while (at < ds.size()) {
        const double d = ds[at];
        double L = m * d;
        while (L / m > d) L = std::nextafter(L, 0.0);
        scales.push_back(L);
        // Everything below L/t is covered.
        while (at < ds.size() && ds[at] < L / t) ++at;
    }
    std::vector<std::vector<double>> seqs;
    for (double L : scales) {
        bool placed = false;
        for (auto& s : seqs) {
            if (L >= m * m * s.back()) {
                s.push_back(L);
                placed = true;
                break;
            }
        }
        if (!placed) seqs.push_back({L});
    }
    return from_sequences(std::move(seqs), m, t);
}

ScaleSequences ScaleSequences::from_sequences(std::vector<std::vector<double>> seqs, double m, double t) {
    ScaleSequences s;
    s.m_ = m;
    s.t_ = t;
    s.seqs_ = std::move(seqs);
    s.index();
    return s;
}

void ScaleSequences::index() {
    all_.clear();
    for (std::uint32_t k = 0; k < seqs_.size(); ++k)
        for (std::uint32_t i = 0; i < seqs_[k].size(); ++i) all_.push_back({k, i + 1, seqs_[k][i]});
    std::sort(all_.begin(), all_.end(), [](const ScaleRef& a, const ScaleRef& b) { return a.L < b.L; });
}

std::optional<ScaleRef> ScaleSequences::lookup(double d) const {
    // Largest L with L/m <= d.
    auto it = std::upper_bound(all_.begin(), all_.end(), d, [&](double x, const ScaleRef& r) { return x < r.L / m_; });
    if (it == all_.begin()) return std::nullopt;
    --it;
    if (!(d < it->L / t_)) return std::nullopt;
    return *it;
}

// ---- level sets -------------------------------------------------------------

LevelSets::LevelSets(const GeoGraph& g, const std::vector<double>& seq) : g_(&g), seq_(seq) {
    const long r = static_cast<long>(seq_.size());
    V_.assign(r + 3, {});
    inV_.assign(r + 3, std::vector<char>(g.num_vertices(), 0));
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        for (long j = 1; j <= r + 1; ++j) {
            if (!in_E(e, j)) continue;
            inV_[j][g.edges()[e].u] = 1;
            inV_[j][g.edges()[e].v] = 1;
        }
    }
    for (long j = 0; j <= r + 2; ++j)
        for (VertexId v = 0; v < g.num_vertices(); ++v)
            if (inV_[j][v]) V_[j].push_back(v);
}

double LevelSets::L(long j) const {
    if (j <= 0) return 0.0;
    if (j > static_cast<long>(seq_.size())) return kInf;
    return seq_[j - 1];
}

bool LevelSets::in_E(std::size_t e, long j) const {
    if (j < 1 || j > static_cast<long>(seq_.size()) + 1) return false;
    const double len = edge_len(e);
    return len >= L(j - 1) && len < L(j);
}

bool LevelSets::in_V(VertexId v, long j) const {
    if (j < 0 || j >= static_cast<long>(inV_.size())) return false;
    return inV_[j][v] != 0;
}

const std::vector<VertexId>& LevelSets::V(long j) const {
    static const std::vector<VertexId> empty;
    if (j < 0 || j >= static_cast<long>(V_.size())) return empty;
    return V_[j];
}

// ---- partial spanner ------------------------------------------------------------

PartialSpanner build_partial_spanner(const GeoGraph& g, const std::vector<double>& seq, std::size_t index,
                                     double eps) {
    if (index < 1 || index > seq.size()) throw PreconditionError("scale index out of range");
    const long i = static_cast<long>(index);
    LevelSets ls(g, seq);
    std::vector<Edge> edges;
    for (std::size_t e = 0; e < g.num_edges(); ++e)
        if (ls.in_E(e, i - 1) || ls.in_E(e, i) || ls.in_E(e, i + 1)) edges.push_back(g.edges()[e]);

    if (i - 2 >= 1) {
        UnionFind uf(g.num_vertices());
        for (std::size_t e = 0; e < g.num_edges(); ++e)
            if (ls.in_G(e, i - 2)) uf.unite(g.edges()[e].u, g.edges()[e].v);
        std::map<VertexId, std::vector<VertexId>> comps;
        for (VertexId v = 0; v < g.num_vertices(); ++v) comps[uf.find(v)].push_back(v);
        for (const auto& [root, U] : comps) {
            if (U.size() < 2) continue;
            std::vector<Point> pts;
            for (auto v : U) pts.push_back(g.point(v));
            GeoGraph sp = greedy_ft_spanner(std::move(pts), 1 + eps, g.meta().f);
            for (const auto& e : sp.edges()) edges.push_back({U[e.u], U[e.v]});
        }
    }
    for (auto& e : edges)
        if (e.u > e.v) std::swap(e.u, e.v);
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    PartialSpanner S;
    S.L = seq[index - 1];
    GraphMeta meta{(1 + eps) * g.meta().t, g.meta().f, 4 * S.L};
    S.graph = GeoGraph(std::vector<Point>(g.points().begin(), g.points().end()), std::move(edges), meta);
    S.synthetic.resize(S.graph.num_edges());
    for (std::size_t e = 0; e < S.graph.num_edges(); ++e)
        S.synthetic[e] = !g.has_edge(S.graph.edges()[e].u, S.graph.edges()[e].v);
    return S;
}

// ---- connection tree -----------------------------------------------------------------

ConnectionTree::ConnectionTree(const GeoGraph& g, const std::vector<double>& seq, int f) {
    const std::size_t n = g.num_vertices();
    const long r = static_cast<long>(seq.size());
    LevelSets ls(g, seq);
    nodes_.resize(n);
    for (VertexId v = 0; v < n; ++v) nodes_[v].leaf = v;

    std::vector<std::size_t> order(g.num_edges());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g.edge_length(a) < g.edge_length(b); });

    UnionFind uf(n);
    std::vector<std::int32_t> top(n);
    std::iota(top.begin(), top.end(), 0);
    std::vector<std::vector<VertexId>> members(n);
    for (VertexId v = 0; v < n; ++v) members[v] = {v};

    std::size_t at = 0;
    for (long j = 1; j <= r + 1; ++j) {
        const double Lj = ls.L(j);
        std::vector<std::pair<VertexId, std::int32_t>> involved;
        while (at < order.size() && g.edge_length(order[at]) <= Lj) {
            const Edge& e = g.edges()[order[at++]];
            const VertexId a = uf.find(e.u), b = uf.find(e.v);
            if (a == b) continue;
            involved.emplace_back(a, top[a]);
            involved.emplace_back(b, top[b]);
            uf.unite(a, b);
        }
        std::map<VertexId, std::vector<std::int32_t>> groups;
        for (auto [old_root, node] : involved) groups[uf.find(old_root)].push_back(node);
        for (auto& [root, kids] : groups) {
            std::sort(kids.begin(), kids.end());
            kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
            const auto c = static_cast<std::int32_t>(nodes_.size());
            CtNode node;
            node.level = static_cast<int>(j);
            node.children = kids;
            std::vector<VertexId> all;
            for (auto k : kids) {
                auto& mem = members[k];
                std::vector<VertexId> cand;
                for (auto v : mem)
                    if (ls.in_V(v, j) || ls.in_V(v, j + 1)) cand.push_back(v);
                std::sort(cand.begin(), cand.end());
                if (cand.size() > static_cast<std::size_t>(f + 1)) cand.resize(f + 1);
                nodes_[k].stored = std::move(cand);
                nodes_[k].parent = c;
                all.insert(all.end(), mem.begin(), mem.end());
                mem.clear();
                mem.shrink_to_fit();
            }
            std::sort(all.begin(), all.end());
            nodes_.push_back(std::move(node));
            members.push_back(std::move(all));
            top[root] = c;
        }
    }
    std::vector<std::int32_t> tops;
    for (VertexId v = 0; v < n; ++v)
        if (uf.find(v) == v) tops.push_back(top[v]);
    if (tops.size() > 1) {
        CtNode vr;
        vr.level = static_cast<int>(r + 2);
        vr.children = tops;
        const auto c = static_cast<std::int32_t>(nodes_.size());
        for (auto k : tops) nodes_[k].parent = c;
        nodes_.push_back(std::move(vr));
        virtual_root_ = true;
    }
    root_ = nodes_.empty() ? -1 : static_cast<std::int32_t>(nodes_.size() - 1);
    if (!tops.empty() && tops.size() == 1) root_ = tops[0];
    finish();
}

ConnectionTree ConnectionTree::from_nodes(std::vector<CtNode> nodes, std::size_t n, bool virtual_root) {
    ConnectionTree T;
    if (nodes.size() < n) throw PreconditionError("connection tree has fewer nodes than vertices");
    for (auto& c : nodes) c.children.clear();
    std::int32_t root = -1;
    for (std::size_t c = 0; c < nodes.size(); ++c) {
        const auto p = nodes[c].parent;
        if (p < 0) {
            if (root >= 0) throw PreconditionError("connection tree has several roots");
            root = static_cast<std::int32_t>(c);
            continue;
        }
        if (static_cast<std::size_t>(p) >= nodes.size() || p <= static_cast<std::int32_t>(c))
            throw PreconditionError("connection tree parent out of order");
        nodes[p].children.push_back(static_cast<std::int32_t>(c));
    }
    for (std::size_t v = 0; v < n; ++v)
        if (nodes[v].leaf != v || !nodes[v].children.empty()) throw PreconditionError("bad connection tree leaf");
    T.nodes_ = std::move(nodes);
    T.root_ = root;
    T.virtual_root_ = virtual_root;
    T.finish();
    return T;
}

void ConnectionTree::finish() {
    const auto N = nodes_.size();
    depth_.assign(N, 0);
    first_.assign(N, -1);
    euler_.clear();
    if (root_ < 0) return;
    // Iterative Euler tour.
    std::vector<std::pair<std::int32_t, std::size_t>> st{{root_, 0}};
    first_[root_] = 0;
    euler_.push_back(root_);
    while (!st.empty()) {
        auto& [c, k] = st.back();
        if (k < nodes_[c].children.size()) {
            const auto ch = nodes_[c].children[k++];
            depth_[ch] = depth_[c] + 1;
            first_[ch] = static_cast<std::int32_t>(euler_.size());
            euler_.push_back(ch);
            st.emplace_back(ch, 0);
        } else {
            st.pop_back();
            if (!st.empty()) euler_.push_back(st.back().first);
        }
    }
    const std::size_t E = euler_.size();
    sparse_.assign(1, euler_);
    for (std::size_t w = 2; w <= E; w *= 2) {
        const auto& prev = sparse_.back();
        std::vector<std::int32_t> cur(E - w + 1);
        for (std::size_t i = 0; i + w <= E; ++i) {
            const auto a = prev[i], b = prev[i + w / 2];
            cur[i] = depth_[a] <= depth_[b] ? a : b;
        }
        sparse_.push_back(std::move(cur));
    }
}

std::int32_t ConnectionTree::lca(VertexId a, VertexId b) const {
    std::size_t l = static_cast<std::size_t>(first_[leaf(a)]), r = static_cast<std::size_t>(first_[leaf(b)]);
    if (l > r) std::swap(l, r);
    const std::size_t len = r - l + 1;
    const auto k = static_cast<std::size_t>(std::bit_width(len) - 1);
    const auto x = sparse_[k][l], y = sparse_[k][r + 1 - (std::size_t{1} << k)];
    return depth_[x] <= depth_[y] ? x : y;
}

std::int32_t ConnectionTree::child_toward(std::int32_t c, VertexId v) const {
    std::int32_t x = leaf(v);
    while (x >= 0 && nodes_[x].parent != c) x = nodes_[x].parent;
    if (x < 0) throw PreconditionError("vertex is not below the given node");
    return x;
}

std::vector<VertexId> ConnectionTree::leaves_below(std::int32_t c) const {
    std::vector<VertexId> out;
    std::vector<std::int32_t> st{c};
    while (!st.empty()) {
        auto x = st.back();
        st.pop_back();
        if (nodes_[x].leaf != kNoVertex) out.push_back(nodes_[x].leaf);
        for (auto ch : nodes_[x].children) st.push_back(ch);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Proxies find_proxies(const ConnectionTree& T, long i, VertexId s, VertexId t, const FailureSet& F) {
    Proxies P;
    if (s == t) {
        P.p = P.q = s;
        return P;
    }
    const auto c = T.lca(s, t);
    P.lca = c;
    P.lca_level = T.node(c).level;
    if (T.has_virtual_root() && c == T.root()) {
        P.reason = "disconnected in G";
        return P;
    }
    auto pick = [&](VertexId x) {
        std::int32_t cp = T.child_toward(c, x);
        // Candidates must share a G_{i-2} component with x.
        while (T.node(cp).leaf == kNoVertex && T.node(cp).level > i - 2) cp = T.child_toward(cp, x);
        for (auto v : T.node(cp).stored)
            if (!F.contains(v)) return v;
        return kNoVertex;
    };
    P.p = pick(s);
    P.q = pick(t);
    if (P.p == kNoVertex || P.q == kNoVertex) P.reason = "cut by F";
    return P;
}

// ---- general oracle ------------------------------------------------------------------

struct GeneralOracle::Scale {
    PartialSpanner S;
    std::unique_ptr<ModerateOracle> mod;
    std::unique_ptr<PathOracle> gs;
};

struct GeneralOracle::Slot {
    std::once_flag once;
    std::unique_ptr<Scale> sc;
};

struct GeneralOracle::Restored {
    std::vector<std::vector<double>> seqs;
    std::vector<ConnectionTree> trees;
    std::vector<std::vector<PartialSpanner>> spanners;
    std::vector<std::vector<std::vector<std::vector<VertexId>>>> nets;
};

GeneralOracle::GeneralOracle(const GeoGraph& g, OracleConfig cfg) : g_(g), cfg_(cfg) {
    const double t = g_.meta().t;
    if (!(cfg_.eps > 0)) throw PreconditionError("eps must be positive");
    if (!(t >= 1) || !std::isfinite(t)) throw PreconditionError("graph t must be >= 1");
    if (g_.meta().f < 0) throw PreconditionError("graph f must be >= 0");
    eps_int_ = cfg_.eps_int > 0 ? cfg_.eps_int : cfg_.eps / 8;
    m_scale_ = std::max({static_cast<double>(g_.num_edges()), std::ceil(16 * t / eps_int_), 2.0});
    seqs_ = ScaleSequences::build(g_, m_scale_, t);
    for (const auto& s : seqs_.sequences()) {
        trees_.emplace_back(g_, s, g_.meta().f);
        scales_.emplace_back();
        for (std::size_t i = 0; i < s.size(); ++i) scales_.back().push_back(std::make_unique<Slot>());
    }
}

GeneralOracle::GeneralOracle(const GeoGraph& g, OracleConfig cfg, Restored&& r) : g_(g), cfg_(cfg) {
    eps_int_ = cfg_.eps_int > 0 ? cfg_.eps_int : cfg_.eps / 8;
    m_scale_ = std::max({static_cast<double>(g_.num_edges()), std::ceil(16 * t() / eps_int_), 2.0});
    seqs_ = ScaleSequences::from_sequences(std::move(r.seqs), m_scale_, t());
    trees_ = std::move(r.trees);
    const auto& seqs = seqs_.sequences();
    if (trees_.size() != seqs.size() || r.spanners.size() != seqs.size() || r.nets.size() != seqs.size())
        throw PreconditionError("bundle sections disagree on the sequence count");
    for (std::size_t k = 0; k < seqs.size(); ++k) {
        if (r.spanners[k].size() != seqs[k].size() || r.nets[k].size() != seqs[k].size())
            throw PreconditionError("bundle sections disagree on the scale count");
        scales_.emplace_back();
        for (std::size_t i = 0; i < seqs[k].size(); ++i) {
            auto sc = std::make_unique<Scale>();
            sc->S = std::move(r.spanners[k][i]);
            sc->mod = std::make_unique<ModerateOracle>(sc->S.graph, kernel_params(sc->S.L), r.nets[k][i]);
            sc->gs = std::make_unique<PathOracle>(g_, t() * sc->S.L / std::pow(m_scale_, 3));
            auto slot = std::make_unique<Slot>();
            std::call_once(slot->once, [&] { slot->sc = std::move(sc); });
            scales_.back().push_back(std::move(slot));
        }
    }
}

GeneralOracle::~GeneralOracle() = default;

bool GeneralOracle::small_instance() const {
    return static_cast<double>(g_.num_edges()) < 16 * t() / eps_int_;
}

KernelParams GeneralOracle::kernel_params(double L) const {
    KernelParams p;
    p.eps = eps_int_;
    p.t = (1 + eps_int_) * t();
    p.f = f();
    p.L = 4 * L;
    p.m_floor = m_scale_;
    p.eps_prime_divisor = cfg_.eps_prime_divisor;
    p.eps_prime = cfg_.eps_prime;
    p.split = cfg_.split;
    p.max_nodes = cfg_.max_nodes;
    p.vicinity = cfg_.vicinity;
    return p;
}

GeneralOracle::Scale& GeneralOracle::scale(const ScaleRef& s) {
    Slot& slot = *scales_.at(s.seq).at(s.index - 1);
    std::call_once(slot.once, [&] {
        auto sc = std::make_unique<Scale>();
        sc->S = build_partial_spanner(g_, seqs_.sequences()[s.seq], s.index, eps_int_);
        sc->mod = std::make_unique<ModerateOracle>(sc->S.graph, kernel_params(sc->S.L));
        sc->gs = std::make_unique<PathOracle>(g_, t() * sc->S.L / std::pow(m_scale_, 3));
        slot.sc = std::move(sc);
    });
    return *slot.sc;
}

const PartialSpanner& GeneralOracle::spanner(const ScaleRef& s) { return scale(s).S; }
ModerateOracle& GeneralOracle::moderate(const ScaleRef& s) { return *scale(s).mod; }
PathOracle GeneralOracle::short_paths(const ScaleRef& s) { return *scale(s).gs; }

void GeneralOracle::prepare_all(unsigned threads) {
    std::vector<ScaleRef> todo;
    for (std::uint32_t k = 0; k < seqs_.sequences().size(); ++k)
        for (std::uint32_t i = 0; i < seqs_.sequences()[k].size(); ++i)
            todo.push_back({k, i + 1, seqs_.sequences()[k][i]});
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(todo.size())));
    if (threads <= 1) {
        for (const auto& r : todo) scale(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t k; (k = next++) < todo.size();) {
                try {
                    scale(todo[k]);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

void GeneralOracle::check_query(VertexId s, VertexId t, const FailureSet& F) const {
    if (!g_.valid_vertex(s) || !g_.valid_vertex(t)) throw PreconditionError("query vertex out of range");
    F.check(g_, f());
    if (F.contains(s) || F.contains(t)) throw PreconditionError("query endpoint is failed");
}

namespace {

ScaleRef resolve(const ScaleSequences& seqs, const GeoGraph& g, VertexId s, VertexId t) {
    const double d = g.euclid(s, t);
    auto sc = seqs.lookup(d);
    if (!sc) {
        std::ostringstream msg;
        msg << "no scale covers |" << s << " " << t << "| = " << d;
        throw PreconditionError(msg.str());
    }
    return *sc;
}

} // namespace

GeneralDistance GeneralOracle::distance_full(VertexId s, VertexId t, const FailureSet& F) {
    check_query(s, t, F);
    GeneralDistance out;
    out.answer.small_instance = small_instance();
    if (s == t) {
        out.answer.value = 0;
        out.proxies.p = out.proxies.q = s;
        return out;
    }
    out.scale = resolve(seqs_, g_, s, t);
    out.proxies = find_proxies(trees_[out.scale.seq], out.scale.index, s, t, F);
    if (!out.proxies.ok()) {
        out.answer.reason = out.proxies.reason;
        return out;
    }
    ModerateOracle& mod = moderate(out.scale);
    const auto [p, q] = std::pair{out.proxies.p, out.proxies.q};
    if (!mod.moderately_far(p, q)) throw InternalConsistencyError("proxies are not moderately far in S_i");
    out.answer = mod.distance(p, q, F);
    out.answer.small_instance = small_instance();
    if (out.answer.value < kInf) out.answer.value += 2 * this->t() * out.scale.L / (m_scale_ * m_scale_);
    return out;
}

GeneralPath GeneralOracle::path_full(VertexId s, VertexId t, const FailureSet& F, bool simplify) {
    check_query(s, t, F);
    GeneralPath out;
    out.answer.small_instance = small_instance();
    if (s == t) {
        out.answer.path = {s};
        out.answer.split_path = {s};
        out.answer.length = 0;
        out.proxies.p = out.proxies.q = s;
        return out;
    }
    out.scale = resolve(seqs_, g_, s, t);
    out.proxies = find_proxies(trees_[out.scale.seq], out.scale.index, s, t, F);
    if (!out.proxies.ok()) {
        out.answer.reason = out.proxies.reason;
        return out;
    }
    ModerateOracle& mod = moderate(out.scale);
    const VertexId p = out.proxies.p, q = out.proxies.q;
    if (!mod.moderately_far(p, q)) throw InternalConsistencyError("proxies are not moderately far in S_i");
    PathAnswer pq = mod.path(p, q, F, simplify);
    out.answer = pq;
    out.answer.small_instance = small_instance();
    out.answer.path.clear();
    out.answer.length = kInf;
    if (!pq.found()) return out;

    PathOracle gs = short_paths(out.scale);
    gs.activate(F);
    auto connect = [&](VertexId a, VertexId b, const char* what) {
        auto w = gs.any_path(a, b);
        if (!w) {
            std::ostringstream msg;
            msg << "no short-edge walk for " << what << " (" << a << "," << b << ")";
            throw InternalConsistencyError(msg.str());
        }
        return std::move(*w);
    };
    std::vector<VertexId> walk = connect(s, p, "s-p");
    for (std::size_t k = 0; k + 1 < pq.path.size(); ++k) {
        const VertexId x = pq.path[k], y = pq.path[k + 1];
        if (g_.has_edge(x, y)) {
            walk.push_back(y);
        } else {
            auto sub = connect(x, y, "synthetic edge");
            walk.insert(walk.end(), sub.begin() + 1, sub.end());
        }
    }
    auto tail = connect(q, t, "q-s'");
    walk.insert(walk.end(), tail.begin() + 1, tail.end());
    if (simplify) walk = erase_loops(walk);
    out.answer.path = std::move(walk);
    out.answer.length = path_length(g_, out.answer.path);
    return out;
}

// ---- bundle --------------------------------------------------------------------------

namespace {

constexpr std::uint32_t fourcc(const char (&s)[5]) {
    return static_cast<std::uint32_t>(s[0]) | static_cast<std::uint32_t>(s[1]) << 8 |
           static_cast<std::uint32_t>(s[2]) << 16 | static_cast<std::uint32_t>(s[3]) << 24;
}

constexpr std::uint64_t kMagic = 0x31424f5254464f46ULL;  // "FOFTROB1"
constexpr std::uint32_t kFormat = 1;
constexpr std::uint32_t kGraph = fourcc("GRPH"), kParams = fourcc("PARM"), kSeqs = fourcc("SEQS"),
                        kTrees = fourcc("CTRE"), kSpan = fourcc("SPAN");

void section(ByteWriter& out, std::uint32_t tag, std::uint32_t version, const ByteWriter& body) {
    out.u32(tag);
    out.u32(version);
    out.bytes(body.data());
}

} // namespace

std::vector<unsigned char> GeneralOracle::serialize(unsigned threads) {
    prepare_all(threads);
    ByteWriter out;
    out.u64(kMagic);
    out.u32(kFormat);
    {
        ByteWriter b;
        b.u64(graph_digest(g_));
        b.bytes(encode_graph(g_));
        section(out, kGraph, 1, b);
    }
    {
        ByteWriter b;
        b.f64(cfg_.eps);
        b.f64(cfg_.eps_int);
        b.u64(cfg_.max_nodes);
        b.u8(static_cast<std::uint8_t>(cfg_.vicinity));
        b.u8(cfg_.split.subdivide ? 1 : 0);
        b.u64(cfg_.split.max_split_vertices);
        b.f64(cfg_.eps_prime_divisor);
        b.f64(cfg_.eps_prime);
        b.f64(eps_int_);
        b.f64(m_scale_);
        section(out, kParams, 1, b);
    }
    {
        ByteWriter b;
        b.u64(seqs_.sequences().size());
        for (const auto& s : seqs_.sequences()) b.f64s(s);
        section(out, kSeqs, 1, b);
    }
    {
        ByteWriter b;
        b.u64(trees_.size());
        for (const auto& T : trees_) {
            b.u8(T.has_virtual_root() ? 1 : 0);
            b.u64(T.num_nodes());
            for (const auto& c : T.nodes()) {
                b.i32(c.level);
                b.i32(c.parent);
                b.u32(c.leaf);
                b.u32s(c.stored);
            }
        }
        section(out, kTrees, 1, b);
    }
    {
        ByteWriter b;
        b.u64(scales_.size());
        for (auto& seq : scales_) {
            b.u64(seq.size());
            for (auto& slot : seq) {
                const auto& sc = slot->sc;
                b.f64(sc->S.L);
                b.u64(sc->S.graph.num_edges());
                for (const auto& e : sc->S.graph.edges()) {
                    b.u32(e.u);
                    b.u32(e.v);
                }
                for (char c : sc->S.synthetic) b.u8(static_cast<std::uint8_t>(c));
                const auto& nets = sc->mod->kernels().nets();
                b.u64(nets.size());
                for (const auto& n : nets) b.u32s(n.members);
            }
        }
        section(out, kSpan, 1, b);
    }
    return out.take();
}

std::unique_ptr<GeneralOracle> GeneralOracle::deserialize(std::span<const unsigned char> bytes) {
    try {
        ByteReader in(bytes);
        if (in.u64() != kMagic) throw PreconditionError("not an oracle bundle");
        if (const auto v = in.u32(); v != kFormat)
            throw PreconditionError("unsupported bundle format version " + std::to_string(v));
        std::optional<GeoGraph> g;
        std::optional<OracleConfig> cfg;
        Restored r;
        bool have_seqs = false, have_trees = false, have_span = false;
        double m_scale = 0;
        while (!in.done()) {
            const auto tag = in.u32();
            const auto version = in.u32();
            ByteReader b(in.bytes());
            auto need_version = [&](std::uint32_t want) {
                if (version != want) throw PreconditionError("unsupported bundle section version");
            };
            if (tag == kGraph) {
                need_version(1);
                const auto digest = b.u64();
                auto enc = b.bytes();
                g = decode_graph(enc);
                if (graph_digest(*g) != digest) throw PreconditionError("bundle graph digest mismatch");
            } else if (tag == kParams) {
                need_version(1);
                OracleConfig c;
                c.eps = b.f64();
                c.eps_int = b.f64();
                c.max_nodes = b.u64();
                c.vicinity = static_cast<VicinityMode>(b.u8());
                c.split.subdivide = b.u8() != 0;
                c.split.max_split_vertices = b.u64();
                c.eps_prime_divisor = b.f64();
                c.eps_prime = b.f64();
                b.f64();  // eps_int, recomputed
                m_scale = b.f64();
                cfg = c;
            } else if (tag == kSeqs) {
                need_version(1);
                const auto k = b.count(8);
                for (std::size_t i = 0; i < k; ++i) r.seqs.push_back(b.f64s());
                have_seqs = true;
            } else if (tag == kTrees) {
                if (!g) throw PreconditionError("bundle tree section precedes the graph");
                need_version(1);
                const auto k = b.count(1);
                for (std::size_t i = 0; i < k; ++i) {
                    const bool vr = b.u8() != 0;
                    const auto cnt = b.count(12);
                    std::vector<CtNode> nodes(cnt);
                    for (auto& c : nodes) {
                        c.level = b.i32();
                        c.parent = b.i32();
                        c.leaf = b.u32();
                        c.stored = b.u32s<VertexId>();
                    }
                    r.trees.push_back(ConnectionTree::from_nodes(std::move(nodes), g->num_vertices(), vr));
                }
                have_trees = true;
            } else if (tag == kSpan) {
                if (!g) throw PreconditionError("bundle spanner section precedes the graph");
                need_version(1);
                const auto k = b.count(8);
                for (std::size_t i = 0; i < k; ++i) {
                    const auto cnt = b.count(8);
                    r.spanners.emplace_back();
                    r.nets.emplace_back();
                    for (std::size_t j = 0; j < cnt; ++j) {
                        PartialSpanner S;
                        S.L = b.f64();
                        const auto me = b.count(8);
                        std::vector<Edge> edges(me);
                        for (auto& e : edges) {
                            e.u = b.u32();
                            e.v = b.u32();
                        }
                        std::vector<char> syn(me);
                        for (auto& c : syn) c = static_cast<char>(b.u8());
                        GraphMeta meta{0, g->meta().f, 4 * S.L};
                        S.graph = GeoGraph(std::vector<Point>(g->points().begin(), g->points().end()),
                                           std::move(edges), meta);
                        S.synthetic = std::move(syn);
                        std::vector<std::vector<VertexId>> nets(b.count(8));
                        for (auto& n : nets) n = b.u32s<VertexId>();
                        r.spanners.back().push_back(std::move(S));
                        r.nets.back().push_back(std::move(nets));
                    }
                }
                have_span = true;
            }
            // Unknown sections are skipped.
        }
        if (!g || !cfg || !have_seqs || !have_trees || !have_span) throw PreconditionError("bundle is missing sections");
        for (auto& seq : r.spanners)
            for (auto& S : seq) {
                GraphMeta m = S.graph.meta();
                m.t = (1 + (cfg->eps_int > 0 ? cfg->eps_int : cfg->eps / 8)) * g->meta().t;
                S.graph.set_meta(m);
            }
        auto o = std::unique_ptr<GeneralOracle>(new GeneralOracle(*g, *cfg, std::move(r)));
        if (o->m_scale_ != m_scale) throw PreconditionError("bundle parameters are inconsistent");
        return o;
    } catch (const std::runtime_error& e) {
        throw PreconditionError(std::string("corrupt bundle: ") + e.what());
    }
}

} // namespace ftoracle
