#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ftoracle/generalization.hpp"

namespace ftoracle {

struct SampledQuery {
    VertexId s = 0, t = 0;
    FailureSet F;
};

// Random (s, s', F) triples; every other query draws F from the interior of
// the current shortest s-s' path so that failures actually bite.
std::vector<SampledQuery> sample_queries(const GeoGraph& g, std::size_t count, std::uint64_t seed);

struct VerifyIssue {
    VertexId s = 0, t = 0;
    std::vector<VertexId> F;
    std::string what;
    double truth = 0, got = 0;
};

struct VerifyReport {
    std::size_t queries = 0;
    std::size_t disconnected = 0;     // ground truth +inf
    std::size_t tagged = 0;           // small_instance answers
    double worst_distance_ratio = 0;  // answer / truth
    double worst_path_ratio = 0;      // |path| / truth
    std::vector<VerifyIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Runs distance and path queries against Dijkstra on G - F and checks
// truth <= answer <= (1+eps) truth, walk validity and |walk| <= (1+eps) truth
// (relative slack `slack`).  Exceptions are reported as issues.
VerifyReport verify_oracle(GeneralOracle& o, std::span<const SampledQuery> queries, double slack = 1e-9,
                           unsigned threads = 1);

} // namespace ftoracle
