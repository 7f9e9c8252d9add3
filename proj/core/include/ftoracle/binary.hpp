#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftoracle {

static_assert(std::endian::native == std::endian::little, "bundle I/O assumes a little-endian host");

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i32(std::int32_t v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void bytes(std::span<const unsigned char> b) {
        u64(b.size());
        buf_.insert(buf_.end(), b.begin(), b.end());
    }
    void str(const std::string& s) {
        u64(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    template <class T>
    void u32s(const std::vector<T>& v) {
        u64(v.size());
        for (auto x : v) u32(static_cast<std::uint32_t>(x));
    }
    void f64s(const std::vector<double>& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }

    const std::vector<unsigned char>& data() const { return buf_; }
    std::vector<unsigned char> take() { return std::move(buf_); }

private:
    void raw(const void* p, std::size_t n) {
        auto* c = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const unsigned char> b) : b_(b) {}

    std::uint8_t u8() { return b_[need(1)]; }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    std::int32_t i32() { return get<std::int32_t>(); }
    double f64() { return get<double>(); }
    std::span<const unsigned char> bytes() {
        auto n = count(1);
        auto at = need(n);
        return b_.subspan(at, n);
    }
    std::string str() {
        auto s = bytes();
        return {s.begin(), s.end()};
    }
    template <class T = std::uint32_t>
    std::vector<T> u32s() {
        auto n = count(4);
        std::vector<T> v(n);
        for (auto& x : v) x = static_cast<T>(u32());
        return v;
    }
    std::vector<double> f64s() {
        auto n = count(8);
        std::vector<double> v(n);
        for (auto& x : v) x = f64();
        return v;
    }

    bool done() const { return pos_ == b_.size(); }
    std::size_t remaining() const { return b_.size() - pos_; }

    // Reads an element count and rejects counts the buffer cannot hold.
    std::size_t count(std::size_t elem_size) {
        auto n = u64();
        if (elem_size != 0 && n > remaining() / elem_size) throw std::runtime_error("truncated data");
        return static_cast<std::size_t>(n);
    }

private:
    template <class T>
    T get() {
        T v;
        std::memcpy(&v, b_.data() + need(sizeof(T)), sizeof(T));
        return v;
    }
    std::size_t need(std::size_t n) {
        if (b_.size() - pos_ < n) throw std::runtime_error("truncated data");
        auto at = pos_;
        pos_ += n;
        return at;
    }

    std::span<const unsigned char> b_;
    std::size_t pos_ = 0;
};

} // namespace ftoracle
