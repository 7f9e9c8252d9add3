#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ftoracle {

using VertexId = std::uint32_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Caller broke a documented precondition (failed source, bad level, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Something the guarantees say cannot happen did happen.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// FT-tree construction exceeded its node budget.
class CapExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace ftoracle
