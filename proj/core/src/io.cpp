#include "ftoracle/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ftoracle/binary.hpp"

namespace ftoracle {

std::string to_string(QueryKind k) { return k == QueryKind::Distance ? "distance" : "path"; }

namespace {

bool parse_id(const std::string& tok, VertexId& out) {
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return r.ec == std::errc() && r.ptr == tok.data() + tok.size();
}

} // namespace

QueryFile read_queries(std::istream& in) {
    QueryFile qf;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ss(line);
        std::vector<std::string> tok{std::istream_iterator<std::string>(ss), {}};
        if (tok.empty()) continue;
        auto fail = [&](const std::string& msg) { qf.errors.push_back("line " + std::to_string(no) + ": " + msg); };
        QueryRecord q;
        q.line = no;
        VertexId k = 0;
        if (tok.size() < 4 || !parse_id(tok[0], q.s) || !parse_id(tok[1], q.t) || !parse_id(tok[2], k)) {
            fail("expected `s s' k F_1..F_k kind`");
            continue;
        }
        if (tok.size() != 4 + static_cast<std::size_t>(k)) {
            fail("failure count does not match the number of ids");
            continue;
        }
        bool ok = true;
        for (VertexId i = 0; i < k; ++i) {
            VertexId x;
            if (!parse_id(tok[3 + i], x)) ok = false;
            q.failed.push_back(x);
        }
        if (!ok) {
            fail("bad failed-vertex id");
            continue;
        }
        const std::string& kind = tok.back();
        if (kind == "distance") {
            q.kind = QueryKind::Distance;
        } else if (kind == "path") {
            q.kind = QueryKind::Path;
        } else {
            fail("unknown kind '" + kind + "'");
            continue;
        }
        qf.records.push_back(std::move(q));
    }
    return qf;
}

QueryFile read_queries_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_queries(in);
}

std::string format_query(const QueryRecord& q) {
    std::ostringstream out;
    out << q.s << ' ' << q.t << ' ' << q.failed.size();
    for (auto x : q.failed) out << ' ' << x;
    out << ' ' << to_string(q.kind);
    return out.str();
}

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

std::string BundleSection::name() const {
    std::string s(4, ' ');
    for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((tag >> (8 * i)) & 0xff);
    return s;
}

BundleLayout split_bundle(std::span<const unsigned char> bytes) {
    ByteReader r(bytes);
    BundleLayout l;
    l.magic = r.u64();
    l.format = r.u32();
    while (!r.done()) {
        BundleSection s;
        s.tag = r.u32();
        s.version = r.u32();
        auto p = r.bytes();
        s.payload.assign(p.begin(), p.end());
        l.sections.push_back(std::move(s));
    }
    return l;
}

std::vector<unsigned char> join_bundle(const BundleLayout& l) {
    ByteWriter w;
    w.u64(l.magic);
    w.u32(l.format);
    for (const auto& s : l.sections) {
        w.u32(s.tag);
        w.u32(s.version);
        w.bytes(s.payload);
    }
    return w.take();
}

std::vector<unsigned char> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_binary_file(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace ftoracle
