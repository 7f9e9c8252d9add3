#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "ftoracle/graph.hpp"

namespace ftoracle {

enum class QueryKind { Distance, Path };

// One line of a query file: `s s' k F_1 .. F_k kind`, kind in {distance, path}.
struct QueryRecord {
    VertexId s = 0, t = 0;
    std::vector<VertexId> failed;
    QueryKind kind = QueryKind::Distance;
    std::size_t line = 0;
};

struct QueryFile {
    std::vector<QueryRecord> records;
    std::vector<std::string> errors;  // "line N: message" for skipped lines
};

// Malformed lines are skipped and reported; `#` starts a comment.
QueryFile read_queries(std::istream& in);
QueryFile read_queries_file(const std::string& path);
std::string format_query(const QueryRecord& q);
std::string to_string(QueryKind k);

// Shortest round-trip decimal; "inf" for +infinity.
std::string format_double(double x);

// Raw view of an oracle bundle: header plus tagged, versioned sections.
struct BundleSection {
    std::uint32_t tag = 0;
    std::uint32_t version = 0;
    std::vector<unsigned char> payload;
    std::string name() const;  // four-character tag
};

struct BundleLayout {
    std::uint64_t magic = 0;
    std::uint32_t format = 0;
    std::vector<BundleSection> sections;
};

BundleLayout split_bundle(std::span<const unsigned char> bytes);
std::vector<unsigned char> join_bundle(const BundleLayout& layout);

std::vector<unsigned char> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<unsigned char>& bytes);

} // namespace ftoracle
