#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "ftoracle/dijkstra.hpp"
#include "ftoracle/ft_tree.hpp"
#include "ftoracle/generalization.hpp"
#include "ftoracle/path_oracle.hpp"
#include "ftoracle/spanner_gen.hpp"

using namespace ftoracle;

namespace {

// Generation dominates setup, so instances are cached per size.
const GeoGraph& instance(std::size_t n, int f = 1) {
    static std::map<std::pair<std::size_t, int>, GeoGraph> cache;
    auto it = cache.find({n, f});
    if (it == cache.end())
        it = cache.emplace(std::pair{n, f}, generate_ft_spanner({n, 2.0, f, 7, Distribution::UniformSquare})).first;
    return it->second;
}

struct Q {
    VertexId s, t;
    FailureSet F;
};

std::vector<Q> queries(const GeoGraph& g, int f, std::size_t count) {
    std::mt19937_64 rng(11);
    std::vector<Q> out;
    const auto n = g.num_vertices();
    while (out.size() < count) {
        VertexId s = rng() % n, t = rng() % n;
        if (s == t) continue;
        std::vector<VertexId> F;
        while (static_cast<int>(F.size()) < f) {
            VertexId x = rng() % n;
            if (x != s && x != t) F.push_back(x);
        }
        out.push_back({s, t, FailureSet(F)});
    }
    return out;
}

GeneralOracle& warm_oracle(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<GeneralOracle>> cache;
    auto& slot = cache[n];
    if (!slot) {
        OracleConfig cfg;
        cfg.eps = 0.5;
        slot = std::make_unique<GeneralOracle>(instance(n), cfg);
        slot->serialize();  // materializes every scale
    }
    return *slot;
}

void BM_Dijkstra(benchmark::State& st) {
    const auto& g = instance(st.range(0));
    VertexId s = 0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(dijkstra(g, s, {}));
        s = (s + 1) % g.num_vertices();
    }
}
BENCHMARK(BM_Dijkstra)->Arg(100)->Arg(200)->Arg(400);

void BM_FtTreeExpand(benchmark::State& st) {
    const auto& g = instance(200);
    const VertexId u = 0, v = 17;
    const double uv = g.euclid(u, v);
    for (auto _ : st) {
        FtTree T(g, u, v, uv / st.range(0), 2 * 2.0 * uv, {1, 2.0, 200000});
        T.expand_all();
        benchmark::DoNotOptimize(T.num_nodes());
    }
}
BENCHMARK(BM_FtTreeExpand)->Arg(4)->Arg(16);

void BM_FtTreeQuery(benchmark::State& st) {
    const auto& g = instance(200);
    const VertexId u = 0, v = 17;
    const double uv = g.euclid(u, v);
    FtTree T(g, u, v, uv / 8, 2 * 2.0 * uv, {1, 2.0, 200000});
    T.expand_all();
    std::vector<FailureSet> fs;
    for (VertexId x = 0; x < g.num_vertices(); ++x)
        if (x != u && x != v) fs.push_back(FailureSet({x}));
    std::size_t i = 0;
    for (auto _ : st) benchmark::DoNotOptimize(T.query(fs[i++ % fs.size()]));
}
BENCHMARK(BM_FtTreeQuery);

void BM_PathOracleActivate(benchmark::State& st) {
    const auto& g = instance(st.range(0));
    PathOracle o(g, kInf);
    std::size_t i = 0;
    for (auto _ : st) {
        o.activate(FailureSet({static_cast<VertexId>(i++ % g.num_vertices())}));
        benchmark::DoNotOptimize(o.connected(0, 1));
    }
}
BENCHMARK(BM_PathOracleActivate)->Arg(100)->Arg(400);

void BM_Build(benchmark::State& st) {
    const auto& g = instance(st.range(0));
    OracleConfig cfg;
    cfg.eps = 0.5;
    for (auto _ : st) {
        GeneralOracle o(g, cfg);
        benchmark::DoNotOptimize(o.serialize());
    }
}
BENCHMARK(BM_Build)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Deserialize(benchmark::State& st) {
    const auto bytes = warm_oracle(st.range(0)).serialize();
    st.counters["bytes"] = static_cast<double>(bytes.size());
    for (auto _ : st) benchmark::DoNotOptimize(GeneralOracle::deserialize(bytes));
}
BENCHMARK(BM_Deserialize)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Distance(benchmark::State& st) {
    auto& o = warm_oracle(st.range(0));
    const auto qs = queries(o.graph(), 1, 256);
    std::size_t i = 0;
    for (auto _ : st) {
        const auto& q = qs[i++ % qs.size()];
        benchmark::DoNotOptimize(o.distance(q.s, q.t, q.F));
    }
}
BENCHMARK(BM_Distance)->Arg(100)->Arg(200)->Arg(400);

void BM_Path(benchmark::State& st) {
    auto& o = warm_oracle(st.range(0));
    const auto qs = queries(o.graph(), 1, 256);
    std::size_t i = 0;
    for (auto _ : st) {
        const auto& q = qs[i++ % qs.size()];
        benchmark::DoNotOptimize(o.path(q.s, q.t, q.F));
    }
}
BENCHMARK(BM_Path)->Arg(100)->Arg(200)->Arg(400);

} // namespace

BENCHMARK_MAIN();
