#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ftoracle/far_oracle.hpp"
#include "ftoracle/path_oracle.hpp"

namespace ftoracle {

// ---- scale sequences ---------------------------------------------------------

struct ScaleRef {
    std::uint32_t seq = 0;    // sequence index
    std::uint32_t index = 0;  // 1-based position inside the sequence
    double L = 0;
};

class ScaleSequences {
public:
    ScaleSequences() = default;
    // Covers every distinct pairwise Euclidean distance d with a scale L
    // such that d in [L/m, L/t), then splits the scales into sequences with
    // L_i >= m^2 L_{i-1} (first fit).
    static ScaleSequences build(const GeoGraph& g, double m, double t);
    static ScaleSequences from_sequences(std::vector<std::vector<double>> seqs, double m, double t);

    double m() const { return m_; }
    double t() const { return t_; }
    const std::vector<std::vector<double>>& sequences() const { return seqs_; }
    std::size_t num_scales() const { return all_.size(); }
    // Element with d in [L/m, L/t), if any.
    std::optional<ScaleRef> lookup(double d) const;

private:
    void index();

    double m_ = 2, t_ = 1;
    std::vector<std::vector<double>> seqs_;
    std::vector<ScaleRef> all_;  // sorted by L
};

// ---- per-sequence level sets ------------------------------------------------

// L_0 = 0, L_{r+1} = +inf; E_j = edges with length in [L_{j-1}, L_j),
// G_j = edges of length <= L_j, V_j = endpoints of E_j.
class LevelSets {
public:
    LevelSets(const GeoGraph& g, const std::vector<double>& seq);

    std::size_t r() const { return seq_.size(); }
    double L(long j) const;
    bool in_E(std::size_t e, long j) const;
    bool in_G(std::size_t e, long j) const { return j >= 1 && edge_len(e) <= L(j); }
    bool in_V(VertexId v, long j) const;
    const std::vector<VertexId>& V(long j) const;

private:
    double edge_len(std::size_t e) const { return g_->edge_length(e); }

    const GeoGraph* g_;
    std::vector<double> seq_;
    std::vector<std::vector<VertexId>> V_;     // V_[j] for j in [0, r+2]
    std::vector<std::vector<char>> inV_;
};

// ---- partial spanners ----------------------------------------------------------

struct PartialSpanner {
    double L = 0;
    GeoGraph graph;                  // all n points; edges of S_i
    std::vector<char> synthetic;     // per edge of graph: not an edge of G
};

// S_i for element `index` (1-based) of seq: E_{i-1} u E_i u E_{i+1} plus, for
// each component U of G_{i-2} with |U| >= 2, an f-FT (1+eps)-spanner on U.
PartialSpanner build_partial_spanner(const GeoGraph& g, const std::vector<double>& seq, std::size_t index,
                                     double eps);

// ---- connection tree ---------------------------------------------------------------

struct CtNode {
    int level = 0;                        // i(c); leaves 0; virtual root r+2
    std::int32_t parent = -1;
    std::vector<std::int32_t> children;
    std::vector<VertexId> stored;         // candidates on the edge to the parent
    VertexId leaf = kNoVertex;
};

class ConnectionTree {
public:
    ConnectionTree() = default;
    ConnectionTree(const GeoGraph& g, const std::vector<double>& seq, int f);
    // Rebuilds from serialized nodes (leaves first, ids 0..n-1).
    static ConnectionTree from_nodes(std::vector<CtNode> nodes, std::size_t n, bool virtual_root);

    std::size_t num_nodes() const { return nodes_.size(); }
    const CtNode& node(std::int32_t c) const { return nodes_[c]; }
    const std::vector<CtNode>& nodes() const { return nodes_; }
    std::int32_t root() const { return root_; }
    bool has_virtual_root() const { return virtual_root_; }
    std::int32_t leaf(VertexId v) const { return static_cast<std::int32_t>(v); }

    std::int32_t lca(VertexId a, VertexId b) const;
    // Child of ancestor c on the way to leaf v.
    std::int32_t child_toward(std::int32_t c, VertexId v) const;
    // All leaves (vertices) below c, sorted.
    std::vector<VertexId> leaves_below(std::int32_t c) const;

private:
    void finish();

    std::vector<CtNode> nodes_;
    std::int32_t root_ = -1;
    bool virtual_root_ = false;
    // Euler tour + sparse table over first-visit indices.
    std::vector<std::int32_t> euler_;
    std::vector<int> depth_;
    std::vector<std::int32_t> first_;
    std::vector<std::vector<std::int32_t>> sparse_;
};

struct Proxies {
    VertexId p = kNoVertex, q = kNoVertex;
    std::int32_t lca = -1;
    int lca_level = 0;
    std::string reason;  // non-empty when no proxy pair exists
    bool ok() const { return reason.empty(); }
};

// Non-failed stand-ins for s and s' at element i of the sequence.
Proxies find_proxies(const ConnectionTree& T, long i, VertexId s, VertexId t, const FailureSet& F);

// ---- top-level oracle -----------------------------------------------------------

struct OracleConfig {
    double eps = 0.25;            // user accuracy
    double eps_int = 0;           // > 0 overrides eps / 8
    std::size_t max_nodes = 200000;
    VicinityMode vicinity = VicinityMode::Pair;
    SplitOptions split;
    double eps_prime_divisor = 500;
    double eps_prime = 0;         // > 0 overrides the formula
};

struct GeneralDistance {
    DistanceAnswer answer;
    ScaleRef scale;
    Proxies proxies;
};

struct GeneralPath {
    PathAnswer answer;
    ScaleRef scale;
    Proxies proxies;
};

class GeneralOracle {
public:
    GeneralOracle(const GeoGraph& g, OracleConfig cfg);
    ~GeneralOracle();
    GeneralOracle(const GeneralOracle&) = delete;
    GeneralOracle& operator=(const GeneralOracle&) = delete;

    const GeoGraph& graph() const { return g_; }
    const OracleConfig& config() const { return cfg_; }
    double eps_int() const { return eps_int_; }
    double m_scale() const { return m_scale_; }
    double t() const { return g_.meta().t; }
    int f() const { return g_.meta().f; }
    const ScaleSequences& sequences() const { return seqs_; }
    const ConnectionTree& tree(std::size_t seq) const { return trees_[seq]; }
    bool small_instance() const;

    // Structures of one scale, built on first use.
    const PartialSpanner& spanner(const ScaleRef& s);
    ModerateOracle& moderate(const ScaleRef& s);
    PathOracle short_paths(const ScaleRef& s);
    // Builds every scale; `threads` > 1 builds scales concurrently.
    void prepare_all(unsigned threads = 1);

    GeneralDistance distance_full(VertexId s, VertexId t, const FailureSet& F);
    GeneralPath path_full(VertexId s, VertexId t, const FailureSet& F, bool simplify = false);
    DistanceAnswer distance(VertexId s, VertexId t, const FailureSet& F) { return distance_full(s, t, F).answer; }
    PathAnswer path(VertexId s, VertexId t, const FailureSet& F, bool simplify = false) {
        return path_full(s, t, F, simplify).answer;
    }

    std::vector<unsigned char> serialize(unsigned threads = 1);
    static std::unique_ptr<GeneralOracle> deserialize(std::span<const unsigned char> bytes);

private:
    struct Scale;
    struct Slot;
    struct Restored;
    GeneralOracle(const GeoGraph& g, OracleConfig cfg, Restored&& r);
    Scale& scale(const ScaleRef& s);
    void check_query(VertexId s, VertexId t, const FailureSet& F) const;
    KernelParams kernel_params(double L) const;

    GeoGraph g_;
    OracleConfig cfg_;
    double eps_int_ = 0;
    double m_scale_ = 2;
    ScaleSequences seqs_;
    std::vector<ConnectionTree> trees_;
    std::vector<std::vector<std::unique_ptr<Slot>>> scales_;  // [seq][index-1]
};

} // namespace ftoracle
