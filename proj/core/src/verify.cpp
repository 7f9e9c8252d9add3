#include "ftoracle/verify.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <random>
#include <thread>

#include "ftoracle/dijkstra.hpp"

namespace ftoracle {

std::vector<SampledQuery> sample_queries(const GeoGraph& g, std::size_t count, std::uint64_t seed) {
    std::vector<SampledQuery> out;
    const auto n = g.num_vertices();
    if (n < 2) return out;
    std::mt19937_64 rng(seed);
    const int f = g.meta().f;
    for (std::size_t q = 0; q < count; ++q) {
        SampledQuery sq;
        sq.s = static_cast<VertexId>(rng() % n);
        do sq.t = static_cast<VertexId>(rng() % n);
        while (sq.t == sq.s);
        std::vector<VertexId> F;
        if (q % 2 == 0) {
            for (int k = 0; k < f; ++k) {
                const auto x = static_cast<VertexId>(rng() % n);
                if (x != sq.s && x != sq.t) F.push_back(x);
            }
        } else {
            for (int k = 0; k < f; ++k) {
                auto p = ground_truth_path(g, sq.s, sq.t, FailureSet(F));
                if (p.size() <= 2) break;
                F.push_back(p[1 + rng() % (p.size() - 2)]);
            }
        }
        sq.F = FailureSet(std::move(F));
        out.push_back(std::move(sq));
    }
    return out;
}

VerifyReport verify_oracle(GeneralOracle& o, std::span<const SampledQuery> queries, double slack, unsigned threads) {
    const GeoGraph& g = o.graph();
    const double eps = o.config().eps;
    VerifyReport rep;
    rep.queries = queries.size();
    std::mutex mu;
    auto one = [&](const SampledQuery& q) {
        std::vector<VerifyIssue> issues;
        auto issue = [&](std::string what, double truth, double got) {
            issues.push_back({q.s, q.t, {q.F.begin(), q.F.end()}, std::move(what), truth, got});
        };
        const double truth = ground_truth_distance(g, q.s, q.t, q.F);
        double dr = 0, pr = 0;
        bool tagged = false;
        try {
            const auto d = o.distance(q.s, q.t, q.F);
            tagged = d.small_instance;
            if (truth == kInf) {
                if (d.value != kInf) issue("finite distance for a disconnected pair", truth, d.value);
            } else if (d.value < truth * (1 - slack)) {
                issue("distance below the truth", truth, d.value);
            } else if (d.value > (1 + eps) * truth * (1 + slack)) {
                issue("distance above (1+eps) truth", truth, d.value);
            }
            if (truth > 0 && truth < kInf) dr = d.value / truth;
        } catch (const std::exception& e) {
            issue(std::string("distance query threw: ") + e.what(), truth, kInf);
        }
        try {
            const auto p = o.path(q.s, q.t, q.F);
            if (truth == kInf) {
                if (p.found()) issue("path for a disconnected pair", truth, p.length);
            } else if (!p.found()) {
                issue("no path for a connected pair", truth, kInf);
            } else if (!is_valid_path(g, p.path, q.s, q.t, q.F)) {
                issue("invalid walk", truth, p.length);
            } else if (p.length > (1 + eps) * truth * (1 + slack)) {
                issue("walk longer than (1+eps) truth", truth, p.length);
            }
            if (truth > 0 && truth < kInf && p.found()) pr = p.length / truth;
        } catch (const std::exception& e) {
            issue(std::string("path query threw: ") + e.what(), truth, kInf);
        }
        std::lock_guard lk(mu);
        if (truth == kInf) ++rep.disconnected;
        if (tagged) ++rep.tagged;
        rep.worst_distance_ratio = std::max(rep.worst_distance_ratio, dr);
        rep.worst_path_ratio = std::max(rep.worst_path_ratio, pr);
        rep.issues.insert(rep.issues.end(), issues.begin(), issues.end());
    };
    threads = std::max(1u, threads);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    auto work = [&] {
        for (std::size_t k; (k = next++) < queries.size();) one(queries[k]);
    };
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    // Stable order regardless of scheduling.
    std::sort(rep.issues.begin(), rep.issues.end(), [](const VerifyIssue& a, const VerifyIssue& b) {
        return std::tie(a.s, a.t, a.F, a.what) < std::tie(b.s, b.t, b.F, b.what);
    });
    return rep;
}

} // namespace ftoracle
