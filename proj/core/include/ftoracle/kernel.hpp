#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "ftoracle/ft_tree.hpp"
#include "ftoracle/graph.hpp"
#include "ftoracle/net.hpp"

namespace ftoracle {

// ---- preprocessing --------------------------------------------------------

// W_i = 2^i W_0 with W_0 = L / (2 m^6), i in [1, K], K = ceil(6 log2 m) + 1.
struct ScaleLevels {
    double W0 = 0;
    int K = 0;

    static ScaleLevels make(double L, double m);
    double W(int i) const { return std::ldexp(W0, i); }
    // Level i in [1,K] with d in [W_i/2, W_i), if any.
    std::optional<int> level_of(double d) const;
};

// Input graph after dropping edges >= 2L and (optionally) subdividing long
// edges.  Vertices [0, original_vertices) are the input vertices; later ids
// are subdivision points.
struct SplitGraph {
    GeoGraph graph;
    std::size_t original_vertices = 0;
    std::size_t original_edges = 0;     // m of the input graph
    double eps_prime = 0;
    bool subdivided = false;
    std::vector<std::int64_t> origin;   // per vertex: -1 or index of the input edge it subdivides
    std::vector<Edge> input_edges;      // edges of the input graph
    std::vector<char> dropped;          // per input edge: length >= 2L
    std::vector<int> governing_level;   // per input edge: level used for subdivision, 0 if none
    std::vector<std::uint32_t> pieces;  // per input edge: number of subedges (1 if not subdivided)

    bool is_original(VertexId v) const { return v < original_vertices; }
    // Drops subdivision points and collapses repeats; maps a split-graph walk
    // to an input-graph walk.
    std::vector<VertexId> project(std::span<const VertexId> walk) const;
};

struct SplitOptions {
    bool subdivide = false;
    std::size_t max_split_vertices = 2'000'000;
};

SplitGraph split_graph(const GeoGraph& g0, double L, double t, double eps_prime, double m_floor,
                       const SplitOptions& opts);

// ---- parameters ------------------------------------------------------------

struct KernelParams {
    double eps = 0.1;                // accuracy the kernels are built for
    double t = 2.0;
    int f = 1;
    double L = 1.0;                  // partial-spanner radius (finite)
    double m_floor = 0;              // lower bound used for m in level arithmetic
    double eps_prime_divisor = 500;  // eps' = eps / (divisor * t^3 * (f+1))
    double eps_prime = 0;            // > 0 overrides the formula
    SplitOptions split;
    std::size_t max_nodes = 200000;
    VicinityMode vicinity = VicinityMode::Pair;
};

// ---- kernels --------------------------------------------------------------

enum class EdgeKind : std::uint8_t { FtPath = 0, Short = 1 };

struct KernelEdge {
    VertexId a = 0, b = 0;        // a < b
    double w = kInf;
    EdgeKind kind = EdgeKind::Short;
    int level = 0;
    std::int32_t ft_node = -1;    // node of FT(a,b; eps' W_level) holding the path
};

struct Kernel {
    int level = 0;                     // i*
    VertexId s = kNoVertex, t = kNoVertex;
    std::vector<VertexId> vertices;    // sorted
    std::vector<VertexId> portals;     // sorted; vertices admitted as portals
    std::vector<KernelEdge> edges;     // sorted by (a,b); one edge per pair

    bool has_vertex(VertexId v) const;
    const KernelEdge* edge(VertexId a, VertexId b) const;
    // Dijkstra on H (ties as in core Dijkstra).  Empty path if disconnected.
    WeightedPath shortest_path(VertexId from, VertexId to) const;
};

class FtBank {
public:
    FtBank(const GeoGraph& g, const ScaleLevels& levels, const std::vector<Net>& nets, double eps, double eps_prime,
           double t, int f, std::size_t max_nodes, VicinityMode mode);

    // Pairs u,v of level-j net vertices with |uv| <= (1+eps) t W_j.
    bool is_key(VertexId u, VertexId v, int j) const;
    // Distance rule alone; portal vertices (see KernelOracle::portals) may
    // hold FT structures with any vertex in range.
    bool in_range(VertexId u, VertexId v, int j) const;
    std::vector<std::tuple<VertexId, VertexId, int>> keys() const;

    // Materializes FT(u,v; eps' W_j) on first use (u < v is enforced; the
    // pair must be in range).
    FtTree& tree(VertexId u, VertexId v, int j);
    // FT-path of FT(min,max; eps' W_j) w.r.t. F: (node, length) or nothing.
    std::optional<std::pair<std::int32_t, double>> query(VertexId u, VertexId v, int j, const FailureSet& F);
    // Copy of the stored path of a node, oriented from `from`.
    std::vector<VertexId> node_path(VertexId a, VertexId b, int j, std::int32_t node, VertexId from);

    std::size_t materialized() const;
    template <class Fn>
    void for_each_tree(Fn&& fn) {
        std::lock_guard lk(mu_);
        for (auto& [k, t] : trees_) fn(std::get<0>(k), std::get<1>(k), std::get<2>(k), *t);
    }

private:
    FtTree& tree_locked(VertexId u, VertexId v, int j);

    const GeoGraph* g_;
    const ScaleLevels* levels_;
    const std::vector<Net>* nets_;
    double eps_, eps_prime_, t_;
    int f_;
    std::size_t max_nodes_;
    VicinityMode mode_;
    mutable std::mutex mu_;
    std::map<std::tuple<VertexId, VertexId, int>, std::unique_ptr<FtTree>> trees_;
};

// Preprocessed structures plus the two kernel queries for moderately far
// pairs (|ss'| in [L/m^2, L/t)).
class KernelOracle {
public:
    KernelOracle(const GeoGraph& g0, KernelParams p);
    // Reuses net member lists (e.g. from a bundle); they must be the ones
    // build_aligned_nets produces for this graph.
    KernelOracle(const GeoGraph& g0, KernelParams p, const std::vector<std::vector<VertexId>>& net_members);

    KernelOracle(const KernelOracle&) = delete;
    KernelOracle& operator=(const KernelOracle&) = delete;

    const KernelParams& params() const { return p_; }
    const GeoGraph& input() const { return *g0_; }
    const SplitGraph& split() const { return split_; }
    const GeoGraph& graph() const { return split_.graph; }
    const ScaleLevels& levels() const { return levels_; }
    // nets()[j-1] is the level-j net (radius eps' W_j).
    const std::vector<Net>& nets() const { return nets_; }
    const Net& net(int j) const { return nets_[j - 1]; }
    FtBank& bank() { return *bank_; }
    double eps_prime() const { return split_.eps_prime; }
    double m() const { return m_; }
    double kappa() const;
    double short_weight(int j) const;

    bool moderately_far(VertexId s, VertexId t) const;
    // Level i* of a moderately far pair; throws PreconditionError otherwise.
    int level_for(VertexId s, VertexId t) const;

    Kernel kernel_query(VertexId s, VertexId t, const FailureSet& F);
    Kernel pp_kernel_query(VertexId s, VertexId t, const FailureSet& F);

    // Level-j net vertices within graph distance `radius` of x (radius at
    // most kappa eps' W_j), sorted by id.
    std::vector<VertexId> near_net_lookup(VertexId x, int j, double radius);

    // Non-failed vertices within kappa r_j of F with an edge leaving that
    // ball (sorted).  They play the role of subdivision points on the
    // crossing edges.
    std::vector<VertexId> portals(int j, const FailureSet& F);

    // True if v subdivides an input edge incident to F.
    bool touches_failure(VertexId v, const FailureSet& F) const;

private:
    void init(const std::vector<std::vector<VertexId>>* members);
    void check_query(VertexId s, VertexId t, const FailureSet& F) const;
    const std::vector<std::pair<VertexId, double>>& near_list(VertexId x, int j);
    // portals(j, F) plus s or t when their own level-j net vertex failed.
    std::vector<VertexId> level_portals(int j, VertexId s, VertexId t, const FailureSet& F);

    class EdgeRule;

    const GeoGraph* g0_;
    KernelParams p_;
    SplitGraph split_;
    double m_ = 0;
    ScaleLevels levels_;
    std::vector<Net> nets_;
    std::unique_ptr<FtBank> bank_;
    std::mutex near_mu_;
    std::unordered_map<std::uint64_t, std::vector<std::pair<VertexId, double>>> near_;
};

} // namespace ftoracle
