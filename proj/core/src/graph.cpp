#include "ftoracle/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ftoracle/binary.hpp"

namespace ftoracle {

Csr Csr::undirected(std::size_t n, std::span<const Edge> edges, std::span<const double> weights) {
    Csr c;
    c.offsets_.assign(n + 1, 0);
    for (const auto& e : edges) {
        ++c.offsets_[e.u + 1];
        ++c.offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) c.offsets_[i + 1] += c.offsets_[i];
    c.arcs_.resize(c.offsets_[n]);
    std::vector<std::size_t> fill(c.offsets_.begin(), c.offsets_.end() - 1);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        c.arcs_[fill[e.u]++] = {e.v, weights[i]};
        c.arcs_[fill[e.v]++] = {e.u, weights[i]};
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(c.arcs_.begin() + c.offsets_[v], c.arcs_.begin() + c.offsets_[v + 1],
                  [](const Arc& a, const Arc& b) { return a.to < b.to; });
    }
    return c;
}

GeoGraph::GeoGraph(std::vector<Point> points, std::vector<Edge> edges, GraphMeta meta)
    : points_(std::move(points)), edges_(std::move(edges)), meta_(meta) {
    const auto n = points_.size();
    for (const auto& p : points_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw PreconditionError("non-finite coordinate");
    }
    for (auto& e : edges_) {
        if (e.u >= n || e.v >= n) throw PreconditionError("edge endpoint out of range");
        if (e.u == e.v) throw PreconditionError("self-loop on vertex " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw PreconditionError("duplicate edge");
    lengths_.reserve(edges_.size());
    for (const auto& e : edges_) lengths_.push_back(dist(points_[e.u], points_[e.v]));
    adj_ = Csr::undirected(n, edges_, lengths_);
}

bool GeoGraph::has_edge(VertexId a, VertexId b) const { return edge_index(a, b) >= 0; }

long GeoGraph::edge_index(VertexId a, VertexId b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{a, b},
                               [](const Edge& x, const Edge& y) { return x.u != y.u ? x.u < y.u : x.v < y.v; });
    if (it != edges_.end() && it->u == a && it->v == b) return it - edges_.begin();
    return -1;
}

double GeoGraph::max_edge_length() const {
    double m = 0;
    for (double l : lengths_) m = std::max(m, l);
    return m;
}

FailureSet::FailureSet(std::vector<VertexId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool FailureSet::contains(VertexId v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }

void FailureSet::check(const GeoGraph& g, int f) const {
    if (ids_.size() > static_cast<std::size_t>(std::max(f, 0)))
        throw PreconditionError("failure set larger than f=" + std::to_string(f));
    for (auto v : ids_)
        if (!g.valid_vertex(v)) throw PreconditionError("failed vertex id out of range: " + std::to_string(v));
}

// ---- text format -----------------------------------------------------------

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::string body = line.substr(0, line.find('#'));
    std::istringstream ss(body);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

template <class T>
T parse_num(const std::string& s, std::size_t line, const char* what) {
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars rejects a leading '+', and we want "inf" accepted.
        char* end = nullptr;
        v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) throw ParseError(line, std::string("bad ") + what + " '" + s + "'");
    } else {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw ParseError(line, std::string("bad ") + what + " '" + s + "'");
    }
    return v;
}

std::string fmt_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, p};
}

} // namespace

GeoGraph read_graph(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&](std::vector<std::string>& toks) {
        while (std::getline(in, line)) {
            ++lineno;
            toks = tokens_of(line);
            if (!toks.empty()) return true;
        }
        return false;
    };
    std::vector<std::string> tk;
    if (!next(tk)) throw ParseError(lineno, "missing header");
    if (tk.size() != 5) throw ParseError(lineno, "header must be `n m t f L`");
    auto n = parse_num<std::uint64_t>(tk[0], lineno, "n");
    auto m = parse_num<std::uint64_t>(tk[1], lineno, "m");
    GraphMeta meta;
    meta.t = parse_num<double>(tk[2], lineno, "t");
    meta.f = parse_num<int>(tk[3], lineno, "f");
    meta.L = parse_num<double>(tk[4], lineno, "L");
    if (!(meta.t >= 1.0)) throw ParseError(lineno, "t must be >= 1");
    if (meta.f < 0) throw ParseError(lineno, "f must be >= 0");
    if (!(meta.L >= 0.0)) throw ParseError(lineno, "L must be >= 0");
    if (n > (1u << 30)) throw ParseError(lineno, "n too large");

    std::vector<Point> pts(n);
    std::vector<char> seen(n, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!next(tk)) throw ParseError(lineno, "expected vertex line");
        if (tk.size() != 3) throw ParseError(lineno, "vertex line must be `id x y`");
        auto id = parse_num<std::uint64_t>(tk[0], lineno, "vertex id");
        if (id >= n) throw ParseError(lineno, "vertex id out of range");
        if (seen[id]) throw ParseError(lineno, "duplicate vertex id");
        seen[id] = 1;
        pts[id] = {parse_num<double>(tk[1], lineno, "x"), parse_num<double>(tk[2], lineno, "y")};
        if (!std::isfinite(pts[id].x) || !std::isfinite(pts[id].y)) throw ParseError(lineno, "non-finite coordinate");
    }
    std::vector<Edge> edges;
    edges.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        if (!next(tk)) throw ParseError(lineno, "expected edge line");
        if (tk.size() != 2) throw ParseError(lineno, "edge line must be `u v`");
        auto u = parse_num<std::uint64_t>(tk[0], lineno, "endpoint");
        auto v = parse_num<std::uint64_t>(tk[1], lineno, "endpoint");
        if (u >= n || v >= n) throw ParseError(lineno, "edge endpoint out of range");
        if (u == v) throw ParseError(lineno, "self-loop");
        edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v)});
    }
    if (next(tk)) throw ParseError(lineno, "trailing content");
    try {
        return GeoGraph(std::move(pts), std::move(edges), meta);
    } catch (const PreconditionError& e) {
        throw ParseError(lineno, e.what());
    }
}

GeoGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_graph(in);
}

void write_graph(std::ostream& out, const GeoGraph& g) {
    const auto& m = g.meta();
    out << g.num_vertices() << ' ' << g.num_edges() << ' ' << fmt_double(m.t) << ' ' << m.f << ' '
        << fmt_double(m.L) << '\n';
    for (VertexId v = 0; v < g.num_vertices(); ++v)
        out << v << ' ' << fmt_double(g.point(v).x) << ' ' << fmt_double(g.point(v).y) << '\n';
    for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_graph_file(const std::string& path, const GeoGraph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_graph(out, g);
}

std::vector<unsigned char> encode_graph(const GeoGraph& g) {
    ByteWriter w;
    w.u64(g.num_vertices());
    w.u64(g.num_edges());
    w.f64(g.meta().t);
    w.i32(g.meta().f);
    w.f64(g.meta().L);
    for (auto p : g.points()) {
        w.f64(p.x);
        w.f64(p.y);
    }
    for (const auto& e : g.edges()) {
        w.u32(e.u);
        w.u32(e.v);
    }
    return w.take();
}

GeoGraph decode_graph(std::span<const unsigned char> bytes) {
    ByteReader r(bytes);
    const auto n = r.u64();
    const auto m = r.u64();
    GraphMeta meta;
    meta.t = r.f64();
    meta.f = r.i32();
    meta.L = r.f64();
    if (n > r.remaining() / 16 || m > r.remaining() / 8) throw std::runtime_error("truncated graph encoding");
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        p.x = r.f64();
        p.y = r.f64();
    }
    std::vector<Edge> edges(m);
    for (auto& e : edges) {
        e.u = r.u32();
        e.v = r.u32();
    }
    if (!r.done()) throw std::runtime_error("trailing bytes in graph encoding");
    return GeoGraph(std::move(pts), std::move(edges), meta);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t h) {
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t graph_digest(const GeoGraph& g) { return fnv1a64(encode_graph(g)); }

double path_length(const GeoGraph& g, std::span<const VertexId> path) {
    double s = 0;
    for (std::size_t i = 1; i < path.size(); ++i) s += g.euclid(path[i - 1], path[i]);
    return s;
}

bool is_valid_path(const GeoGraph& g, std::span<const VertexId> path, VertexId s, VertexId t,
                   const FailureSet& failed) {
    if (path.empty() || path.front() != s || path.back() != t) return false;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (!g.valid_vertex(path[i]) || failed.contains(path[i])) return false;
        if (i > 0 && !g.has_edge(path[i - 1], path[i])) return false;
    }
    return true;
}

} // namespace ftoracle
