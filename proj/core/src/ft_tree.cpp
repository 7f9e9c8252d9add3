#include "ftoracle/ft_tree.hpp"

#include <algorithm>
#include <sstream>

namespace ftoracle {

std::string to_string(VicinityMode m) { return m == VicinityMode::Pair ? "pair" : "scale"; }

std::optional<VicinityMode> parse_vicinity_mode(const std::string& s) {
    if (s == "pair") return VicinityMode::Pair;
    if (s == "scale") return VicinityMode::Scale;
    return std::nullopt;
}

VicinityGraph::VicinityGraph(const GeoGraph& base, VertexId u, VertexId v, double radius)
    : base_(&base), radius_(radius) {
    const Point pu = base.point(u), pv = base.point(v);
    for (VertexId p = 0; p < base.num_vertices(); ++p) {
        Point pp = base.point(p);
        if (std::max(dist(pp, pu), dist(pp, pv)) <= radius) global_.push_back(p);
    }
    std::vector<Edge> edges;
    std::vector<double> w;
    for (VertexId a = 0; a < global_.size(); ++a) {
        for (const Arc& arc : base.out(global_[a])) {
            if (arc.to <= global_[a]) continue;
            VertexId b = local(arc.to);
            if (b == kNoVertex) continue;
            edges.push_back({a, b});
            w.push_back(arc.w);
        }
    }
    adj_ = Csr::undirected(global_.size(), edges, w);
}

VertexId VicinityGraph::local(VertexId global) const {
    auto it = std::lower_bound(global_.begin(), global_.end(), global);
    if (it == global_.end() || *it != global) return kNoVertex;
    return static_cast<VertexId>(it - global_.begin());
}

int FtNode::segment_of(VertexId v) const {
    auto it = std::lower_bound(assistant.begin(), assistant.end(), std::make_pair(v, std::uint32_t{0}));
    if (it == assistant.end() || it->first != v) return -1;
    return static_cast<int>(it->second);
}

FtTree::FtTree(const GeoGraph& g, VertexId u, VertexId v, double W, double vicinity_radius, FtOptions opts)
    : g_(&g), u_(u), v_(v), W_(W), opts_(opts), vic_(g, u, v, vicinity_radius) {
    if (u == v) throw PreconditionError("FT tree needs u != v");
    if (!(W > 0)) throw PreconditionError("FT tree needs W > 0");
    leaf_len_ = 2.0 * opts_.t * g.euclid(u, v);
    sp_.resize(vic_.size());
    mask_.assign(vic_.size(), 0);
    FtNode root;
    degenerate_ = !vic_.contains(u) || !vic_.contains(v);
    if (degenerate_) {
        root.leaf = true;
        nodes_.push_back(std::move(root));
        return;
    }
    nodes_.push_back(std::move(root));
    finish_node(nodes_.back());
}

// Runs the shortest-path search for a node whose removal mask is in mask_,
// then fills in segments and the assistant row.
void FtTree::finish_node(FtNode& n) {
    const VertexId lu = vic_.local(u_), lv = vic_.local(v_);
    VertexId src[1] = {lu};
    sp_.run(vic_, src, [&](VertexId x) { return mask_[x] != 0; }, kInf, lv);
    if (sp_.settled(lv)) {
        auto p = sp_.path_to(lv);
        n.path.reserve(p.size());
        for (auto x : p) n.path.push_back(vic_.global(x));
        n.length = sp_.dist(lv);
    }
    n.leaf = n.level >= opts_.f + 1 || n.path.empty() || n.length > leaf_len_;
    if (n.path.empty()) return;

    // Prefix lengths along the path, summed in path order.
    std::vector<double> cum(n.path.size(), 0.0);
    for (std::size_t i = 1; i < n.path.size(); ++i) cum[i] = cum[i - 1] + g_->euclid(n.path[i - 1], n.path[i]);
    const double step = opts_.t * W_ / 4.0;
    const std::size_t last = n.path.size() - 1;
    std::size_t prev = 0;
    while (prev < last) {
        // Smallest multiple of step that reaches the next vertex.
        double k = std::max(1.0, std::ceil(cum[prev + 1] / step));
        while (k * step < cum[prev + 1]) k += 1;
        while (k > 1 && (k - 1) * step >= cum[prev + 1]) k -= 1;
        const double lim = k * step;
        std::size_t b = prev + 1;
        while (b + 1 <= last && cum[b + 1] <= lim) ++b;
        n.seg_end.push_back(static_cast<std::uint32_t>(b));
        prev = b;
    }
    std::size_t start = 0;
    for (std::uint32_t s = 0; s < n.seg_end.size(); ++s) {
        for (std::size_t i = start + 1; i <= n.seg_end[s]; ++i) n.assistant.emplace_back(n.path[i], s);
        start = n.seg_end[s];
    }
    std::sort(n.assistant.begin(), n.assistant.end());
    if (!n.leaf) n.child.assign(n.seg_end.size(), kChildUnbuilt);
}

std::vector<VertexId> FtTree::removed_upto(std::int32_t node) const {
    std::vector<VertexId> out;
    for (std::int32_t a = node; a >= 0; a = nodes_[a].parent)
        out.insert(out.end(), nodes_[a].removed.begin(), nodes_[a].removed.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::int32_t FtTree::make_child(std::int32_t parent, std::uint32_t seg) {
    const FtNode& par = nodes_[parent];
    const std::size_t start = seg == 0 ? 0 : par.seg_end[seg - 1];
    const std::size_t end = par.seg_end[seg];
    const std::size_t last = par.path.size() - 1;

    FtNode c;
    c.parent = parent;
    c.segment = static_cast<std::int32_t>(seg);
    c.level = par.level + 1;
    for (std::size_t i = start + 1; i <= end; ++i)
        if (i != last) c.removed.push_back(par.path[i]);
    if (c.removed.empty()) {
        nodes_[parent].child[seg] = kChildNone;
        return kChildNone;
    }
    if (nodes_.size() >= opts_.max_nodes) {
        std::ostringstream msg;
        msg << "FT tree node cap " << opts_.max_nodes << " exceeded for (u=" << u_ << ", v=" << v_ << ", W=" << W_
            << ")";
        throw CapExceededError(msg.str());
    }
    if (end >= start + 2) {
        // Median internal vertex of the closed segment; drop its tW/4 ball.
        const std::size_t cnt = end - start - 1;
        c.seed = par.path[start + 1 + (cnt - 1) / 2];
        if (ball_.capacity() == 0) ball_.resize(g_->num_vertices());
        VertexId src[1] = {c.seed};
        ball_.run(*g_, src, [](VertexId) { return false; }, opts_.t * W_ / 4.0);
        for (auto x : ball_.settled())
            if (x != u_ && x != v_ && vic_.contains(x)) c.removed.push_back(x);
    }
    std::sort(c.removed.begin(), c.removed.end());
    c.removed.erase(std::unique(c.removed.begin(), c.removed.end()), c.removed.end());

    std::vector<VertexId> marked;
    auto mark = [&](const std::vector<VertexId>& ids) {
        for (auto x : ids) {
            VertexId l = vic_.local(x);
            if (l != kNoVertex && !mask_[l]) {
                mask_[l] = 1;
                marked.push_back(l);
            }
        }
    };
    mark(c.removed);
    for (std::int32_t a = parent; a >= 0; a = nodes_[a].parent) mark(nodes_[a].removed);
    finish_node(c);
    for (auto l : marked) mask_[l] = 0;

    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(std::move(c));
    nodes_[parent].child[seg] = id;
    return id;
}

void FtTree::expand_all() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].leaf) continue;
        for (std::uint32_t s = 0; s < nodes_[i].child.size(); ++s)
            if (nodes_[i].child[s] == kChildUnbuilt) make_child(static_cast<std::int32_t>(i), s);
    }
}

int FtTree::depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.level);
    return d;
}

std::optional<FtPathRef> FtTree::query(const FailureSet& F) {
    if (F.contains(u_) || F.contains(v_)) throw PreconditionError("FT query endpoint is failed");
    std::int32_t cur = 0;
    while (true) {
        const FtNode& n = nodes_[cur];
        if (n.path.empty()) return std::nullopt;
        int seg = -1;
        std::size_t first_pos = n.path.size();
        for (auto x : F) {
            int s = n.segment_of(x);
            if (s < 0) continue;
            // Follow the failure that appears first along the path.
            auto pos = static_cast<std::size_t>(std::find(n.path.begin(), n.path.end(), x) - n.path.begin());
            if (pos < first_pos) {
                first_pos = pos;
                seg = s;
            }
        }
        if (seg < 0) return FtPathRef{cur, n.length, n.path};
        if (n.leaf) return std::nullopt;
        std::int32_t next = n.child[seg];
        if (next == kChildUnbuilt) next = make_child(cur, static_cast<std::uint32_t>(seg));
        if (next == kChildNone) return std::nullopt;
        cur = next;
    }
}

} // namespace ftoracle
