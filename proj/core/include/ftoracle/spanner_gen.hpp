#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftoracle/graph.hpp"

namespace ftoracle {

enum class Distribution { UniformSquare, Clustered, Grid, Hierarchical };

std::string to_string(Distribution d);
std::optional<Distribution> parse_distribution(const std::string& s);

struct SpannerSpec {
    std::size_t n = 2;
    double t = 2.0;
    int f = 1;
    std::uint64_t seed = 1;
    Distribution distribution = Distribution::UniformSquare;
};

// Deterministic point sets; identical across platforms for a given spec.
std::vector<Point> generate_points(const SpannerSpec& spec);

// Fault-tolerant greedy: pairs in increasing |uv| (ties by ids); uv is added
// unless d_{G-F}(u,v) <= t|uv| already holds for every F of size <= f.
// `max_len` restricts the pairs considered (L-partial spanners).
GeoGraph greedy_ft_spanner(std::vector<Point> points, double t, int f, double max_len = kInf);

GeoGraph generate_ft_spanner(const SpannerSpec& spec);

// True iff d_{G-F}(u,v) <= bound for every F subset of V\{u,v} with |F| <= f.
// On failure, *witness receives a violating F.
bool robust_within(const GeoGraph& g, VertexId u, VertexId v, double bound, int f,
                   std::vector<VertexId>* witness = nullptr);

struct Violation {
    VertexId u = 0;
    VertexId v = 0;
    std::vector<VertexId> failed;
    double distance = kInf;
    double bound = 0.0;
};

struct ValidationOptions {
    // Full enumeration of failure sets when C(n, <=f) is at most this.
    std::size_t exhaustive_limit = 20000;
    // Stop after this many violations.
    std::size_t max_violations = 100;
};

struct ValidationReport {
    bool exhaustive = false;
    std::size_t pairs_checked = 0;
    std::size_t failure_sets_checked = 0;
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Checks d_{G-F}(u,v) <= t|uv| for every pair with |uv| <= L and every F
// with |F| <= f.  Small instances enumerate F outright; larger ones branch on
// the vertices of the current shortest path, which is exact as well.
ValidationReport validate_ft_spanner(const GeoGraph& g, double t, int f, double L, ValidationOptions opts = {});

} // namespace ftoracle
