// ftoracle: generate, validate, build, query and verify fault-tolerant
// distance oracles for Euclidean spanners.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "ftoracle/generalization.hpp"
#include "ftoracle/io.hpp"
#include "ftoracle/spanner_gen.hpp"
#include "ftoracle/verify.hpp"

using namespace ftoracle;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct BuildFlags {
    double eps = 0.25;
    double eps_int = 0;
    std::size_t max_nodes = 200000;
    std::string vicinity = "pair";
    bool split = false;

    OracleConfig config() const {
        OracleConfig c;
        c.eps = eps;
        c.eps_int = eps_int;
        c.max_nodes = max_nodes;
        auto v = parse_vicinity_mode(vicinity);
        if (!v) throw PreconditionError("unknown vicinity mode '" + vicinity + "'");
        c.vicinity = *v;
        c.split.subdivide = split;
        return c;
    }
};

void add_build_flags(CLI::App* c, BuildFlags& b) {
    c->add_option("--eps", b.eps, "accuracy eps (answers within 1+eps)")->check(CLI::PositiveNumber);
    c->add_option("--eps-int", b.eps_int, "internal accuracy (default eps/8)");
    c->add_option("--max-nodes", b.max_nodes, "node cap per FT tree");
    c->add_option("--vicinity-mode", b.vicinity, "FT vicinity radius: pair (2t|uv|) or scale")
        ->check(CLI::IsMember({"pair", "scale"}));
    c->add_flag("--split", b.split, "subdivide long edges (memory heavy)");
}

unsigned resolve_threads(unsigned t) { return t == 0 ? std::max(1u, std::thread::hardware_concurrency()) : t; }

std::string join_ids(std::span<const VertexId> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s.empty() ? "-" : s;
}

// ---- gen ----------------------------------------------------------------------

struct GenArgs {
    std::size_t n = 100;
    double t = 2.0;
    int f = 1;
    std::uint64_t seed = 1;
    std::string dist = "uniform";
    std::string out;
};

int run_gen(const GenArgs& a) {
    auto d = parse_distribution(a.dist);
    if (!d) throw PreconditionError("unknown distribution '" + a.dist + "'");
    SpannerSpec spec{a.n, a.t, a.f, a.seed, *d};
    GeoGraph g = generate_ft_spanner(spec);
    if (a.out.empty() || a.out == "-") {
        write_graph(std::cout, g);
    } else {
        write_graph_file(a.out, g);
        std::cerr << "wrote " << a.out << " n=" << g.num_vertices() << " m=" << g.num_edges() << "\n";
    }
    return 0;
}

// ---- validate -------------------------------------------------------------------

struct ValidateArgs {
    std::string graph;
    std::size_t exhaustive_limit = 20000;
    std::size_t max_violations = 20;
};

int report_validation(const GeoGraph& g, const ValidationReport& r, std::ostream& out) {
    for (const auto& v : r.violations)
        out << "violation " << v.u << ' ' << v.v << " F=" << join_ids(v.failed) << " distance=" << format_double(v.distance)
            << " bound=" << format_double(v.bound) << "\n";
    out << (r.ok() ? "ok" : "fail") << " n=" << g.num_vertices() << " m=" << g.num_edges()
        << " t=" << format_double(g.meta().t) << " f=" << g.meta().f << " exhaustive=" << (r.exhaustive ? 1 : 0)
        << " pairs=" << r.pairs_checked << " failure_sets=" << r.failure_sets_checked
        << " violations=" << r.violations.size() << "\n";
    return r.ok() ? 0 : 1;
}

int run_validate(const ValidateArgs& a) {
    GeoGraph g = read_graph_file(a.graph);
    ValidationOptions o{a.exhaustive_limit, a.max_violations};
    auto r = validate_ft_spanner(g, g.meta().t, g.meta().f, g.meta().L, o);
    return report_validation(g, r, std::cout);
}

// ---- build ------------------------------------------------------------------------

struct BuildArgs {
    std::string graph, out;
    BuildFlags flags;
    bool trust = false;
    unsigned threads = 1;
};

int run_build(const BuildArgs& a) {
    GeoGraph g = read_graph_file(a.graph);
    if (!a.trust) {
        auto r = validate_ft_spanner(g, g.meta().t, g.meta().f, g.meta().L, {20000, 20});
        if (!r.ok()) {
            report_validation(g, r, std::cerr);
            std::cerr << "error: input is not an f-fault-tolerant t-spanner (use --trust to skip this check)\n";
            return 1;
        }
    }
    const auto t0 = Clock::now();
    GeneralOracle o(g, a.flags.config());
    auto bytes = o.serialize(resolve_threads(a.threads));
    write_binary_file(a.out, bytes);
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(graph_digest(g)));
    std::cout << "bundle " << a.out << " bytes=" << bytes.size() << " digest=" << digest
              << " sequences=" << o.sequences().sequences().size() << " scales=" << o.sequences().num_scales()
              << " m_scale=" << format_double(o.m_scale()) << " small_instance=" << (o.small_instance() ? 1 : 0)
              << " seconds=" << seconds_since(t0) << "\n";
    return 0;
}

std::unique_ptr<GeneralOracle> load_bundle(const std::string& path) {
    return GeneralOracle::deserialize(read_binary_file(path));
}

// ---- query ------------------------------------------------------------------------

struct QueryArgs {
    std::string bundle, queries, diag;
    unsigned threads = 1;
    bool simplify = false;
};

int run_query(const QueryArgs& a) {
    auto o = load_bundle(a.bundle);
    QueryFile qf = read_queries_file(a.queries);
    std::ofstream diag_file;
    if (!a.diag.empty()) {
        diag_file.open(a.diag);
        if (!diag_file) throw std::runtime_error("cannot write " + a.diag);
    }
    std::ostream& diag = a.diag.empty() ? std::cerr : diag_file;
    for (const auto& e : qf.errors) diag << "skip " << e << "\n";

    const GeoGraph& g = o->graph();
    std::vector<std::string> out(qf.records.size()), notes(qf.records.size());
    std::vector<char> valid(qf.records.size(), 0);
    auto one = [&](std::size_t k) {
        const auto& q = qf.records[k];
        std::ostringstream note;
        note << "line=" << q.line << " kind=" << to_string(q.kind);
        try {
            if (!g.valid_vertex(q.s) || !g.valid_vertex(q.t)) throw PreconditionError("vertex id out of range");
            FailureSet F(q.failed);
            const auto t0 = Clock::now();
            if (q.kind == QueryKind::Distance) {
                auto d = o->distance(q.s, q.t, F);
                const double us = seconds_since(t0) * 1e6;
                out[k] = format_double(d.value);
                note << " value=" << format_double(d.value) << " level=" << d.level << " kernel_vertices=" << d.kernel_vertices
                     << " kernel_edges=" << d.kernel_edges << " small_instance=" << d.small_instance << " us=" << us;
                if (!d.reason.empty()) note << " reason=\"" << d.reason << "\"";
            } else {
                auto p = o->path(q.s, q.t, F, a.simplify);
                const double us = seconds_since(t0) * 1e6;
                std::string line = format_double(p.length);
                for (auto v : p.path) line += " " + std::to_string(v);
                out[k] = std::move(line);
                note << " length=" << format_double(p.length) << " hops=" << (p.path.empty() ? 0 : p.path.size() - 1)
                     << " level=" << p.level << " kernel_vertices=" << p.kernel_vertices << " kernel_edges=" << p.kernel_edges
                     << " expanded_edges=" << p.expansion_log.size() << " small_instance=" << p.small_instance << " us=" << us;
                if (!p.reason.empty()) note << " reason=\"" << p.reason << "\"";
            }
            valid[k] = 1;
        } catch (const PreconditionError& e) {
            note << " skipped: " << e.what();
        }
        notes[k] = note.str();
    };
    const unsigned threads = resolve_threads(a.threads);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (std::size_t k; (k = next++) < qf.records.size();) {
            try {
                one(k);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (valid[k]) std::cout << out[k] << "\n";
        diag << (valid[k] ? "" : "skip ") << notes[k] << "\n";
    }
    return 0;
}

// ---- verify -------------------------------------------------------------------------

struct VerifyArgs {
    std::string graph, bundle;
    std::size_t queries = 200;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

int run_verify(const VerifyArgs& a) {
    GeoGraph g = read_graph_file(a.graph);
    auto o = load_bundle(a.bundle);
    if (graph_digest(o->graph()) != graph_digest(g)) {
        std::cout << "fail digest mismatch: bundle was built for a different graph\n";
        return 1;
    }
    auto qs = sample_queries(g, a.queries, a.seed);
    auto r = verify_oracle(*o, qs, 1e-9, resolve_threads(a.threads));
    for (const auto& i : r.issues)
        std::cout << "violation " << i.s << ' ' << i.t << " F=" << join_ids(i.F) << " truth=" << format_double(i.truth)
                  << " got=" << format_double(i.got) << " what=\"" << i.what << "\"\n";
    std::cout << (r.ok() ? "ok" : "fail") << " queries=" << r.queries << " disconnected=" << r.disconnected
              << " small_instance=" << r.tagged << " worst_distance_ratio=" << format_double(r.worst_distance_ratio)
              << " worst_path_ratio=" << format_double(r.worst_path_ratio) << " violations=" << r.issues.size() << "\n";
    return r.ok() ? 0 : 1;
}

// ---- bench ---------------------------------------------------------------------------

struct BenchArgs {
    std::string graph;
    std::vector<std::size_t> sizes{100, 200, 400};
    double t = 2.0;
    int f = 1;
    std::string dist = "uniform";
    std::uint64_t seed = 1;
    std::size_t queries = 200;
    BuildFlags flags;
    unsigned threads = 1;
};

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1));
    return v[k];
}

void bench_one(const GeoGraph& g, const BenchArgs& a, double gen_s) {
    const auto t0 = Clock::now();
    GeneralOracle o(g, a.flags.config());
    o.prepare_all(resolve_threads(a.threads));
    const double build_s = seconds_since(t0);
    auto qs = sample_queries(g, a.queries, a.seed + 1);
    std::vector<double> dus, pus, kv;
    for (const auto& q : qs) {
        auto t1 = Clock::now();
        auto d = o.distance(q.s, q.t, q.F);
        dus.push_back(seconds_since(t1) * 1e6);
        kv.push_back(static_cast<double>(d.kernel_vertices));
        t1 = Clock::now();
        o.path(q.s, q.t, q.F);
        pus.push_back(seconds_since(t1) * 1e6);
    }
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    std::cout << g.num_vertices() << ',' << g.num_edges() << ',' << format_double(g.meta().t) << ',' << g.meta().f << ','
              << format_double(a.flags.eps) << ',' << gen_s << ',' << build_s << ',' << mean(dus) << ','
              << percentile(dus, 0.5) << ',' << percentile(dus, 0.99) << ',' << mean(pus) << ',' << percentile(pus, 0.5)
              << ',' << percentile(pus, 0.99) << ',' << mean(kv) << "\n";
}

int run_bench(const BenchArgs& a) {
    std::cout << "n,m,t,f,eps,gen_s,build_s,distance_us_mean,distance_us_p50,distance_us_p99,path_us_mean,path_us_p50,"
                 "path_us_p99,kernel_vertices_mean\n";
    if (!a.graph.empty()) {
        bench_one(read_graph_file(a.graph), a, 0);
        return 0;
    }
    auto d = parse_distribution(a.dist);
    if (!d) throw PreconditionError("unknown distribution '" + a.dist + "'");
    for (auto n : a.sizes) {
        const auto t0 = Clock::now();
        GeoGraph g = generate_ft_spanner({n, a.t, a.f, a.seed, *d});
        bench_one(g, a, seconds_since(t0));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fault-tolerant distance and path oracles for Euclidean spanners"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* c_gen = app.add_subcommand("gen", "generate an f-fault-tolerant t-spanner");
    c_gen->add_option("--n", gen.n, "number of points")->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
    c_gen->add_option("--t", gen.t, "stretch factor (> 1)");
    c_gen->add_option("--f", gen.f, "fault tolerance")->check(CLI::NonNegativeNumber);
    c_gen->add_option("--seed", gen.seed, "random seed");
    c_gen->add_option("--dist", gen.dist, "uniform | clustered | grid | hierarchical");
    c_gen->add_option("-o,--out", gen.out, "output graph file (default stdout)");

    ValidateArgs val;
    auto* c_val = app.add_subcommand("validate", "check the f-FT t-spanner property of a graph");
    c_val->add_option("graph", val.graph, "graph file")->required()->check(CLI::ExistingFile);
    c_val->add_option("--exhaustive-limit", val.exhaustive_limit, "enumerate failure sets up to this many");
    c_val->add_option("--max-violations", val.max_violations, "stop after this many violations");

    BuildArgs bld;
    auto* c_bld = app.add_subcommand("build", "preprocess a graph into an oracle bundle");
    c_bld->add_option("graph", bld.graph, "graph file")->required()->check(CLI::ExistingFile);
    c_bld->add_option("-o,--out", bld.out, "bundle file")->required();
    c_bld->add_flag("--trust", bld.trust, "skip spanner validation");
    c_bld->add_option("--threads", bld.threads, "worker threads (0 = all cores)");
    add_build_flags(c_bld, bld.flags);

    QueryArgs qry;
    auto* c_qry = app.add_subcommand("query", "answer a query file");
    c_qry->add_option("bundle", qry.bundle, "bundle file")->required()->check(CLI::ExistingFile);
    c_qry->add_option("queries", qry.queries, "query file")->required()->check(CLI::ExistingFile);
    c_qry->add_option("--threads", qry.threads, "worker threads (0 = all cores)");
    c_qry->add_flag("--simplify", qry.simplify, "erase loops from returned walks");
    c_qry->add_option("--diag", qry.diag, "write diagnostics here instead of stderr");

    VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "check a bundle against ground truth on random queries");
    c_ver->add_option("graph", ver.graph, "graph file")->required()->check(CLI::ExistingFile);
    c_ver->add_option("bundle", ver.bundle, "bundle file")->required()->check(CLI::ExistingFile);
    c_ver->add_option("--queries", ver.queries, "number of random queries");
    c_ver->add_option("--seed", ver.seed, "random seed");
    c_ver->add_option("--threads", ver.threads, "worker threads (0 = all cores)");

    BenchArgs ben;
    auto* c_ben = app.add_subcommand("bench", "wall-clock build and query timings (CSV)");
    c_ben->add_option("--graph", ben.graph, "benchmark this graph instead of generated ones")->check(CLI::ExistingFile);
    c_ben->add_option("--sizes", ben.sizes, "instance sizes to generate")->delimiter(',');
    c_ben->add_option("--t", ben.t, "stretch of generated instances");
    c_ben->add_option("--f", ben.f, "fault tolerance of generated instances");
    c_ben->add_option("--dist", ben.dist, "point distribution of generated instances");
    c_ben->add_option("--seed", ben.seed, "random seed");
    c_ben->add_option("--queries", ben.queries, "queries per instance");
    c_ben->add_option("--threads", ben.threads, "build threads (0 = all cores)");
    add_build_flags(c_ben, ben.flags);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*c_gen) return run_gen(gen);
        if (*c_val) return run_validate(val);
        if (*c_bld) return run_build(bld);
        if (*c_qry) return run_query(qry);
        if (*c_ver) return run_verify(ver);
        if (*c_ben) return run_bench(ben);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
