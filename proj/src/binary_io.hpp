#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kremu/error.hpp"

namespace kremu::detail {

class ByteWriter {
public:
    void bytes(std::string_view raw) { out_.insert(out_.end(), raw.begin(), raw.end()); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(std::span<const double> vs) {
        for (double v : vs) f64(v);
    }
    void str(std::string_view s) {
        u64(s.size());
        bytes(s);
    }

    [[nodiscard]] std::size_t size() const noexcept { return out_.size(); }
    std::vector<std::uint8_t>& buffer() noexcept { return out_; }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    [[nodiscard]] std::size_t remaining() const noexcept { return in_.size() - pos_; }
    [[nodiscard]] std::size_t position() const noexcept { return pos_; }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> f64s(std::size_t n) {
        if (n > remaining() / 8) throw Error(ErrorCode::TruncatedFile, "array of " + std::to_string(n) + " doubles");
        std::vector<double> v(n);
        for (auto& x : v) x = f64();
        return v;
    }
    std::string str() {
        const std::uint64_t n = u64();
        if (n > remaining()) throw Error(ErrorCode::TruncatedFile, "string of " + std::to_string(n) + " bytes");
        return bytes(static_cast<std::size_t>(n));
    }

private:
    void need(std::size_t n) const {
        if (n > remaining()) {
            throw Error(ErrorCode::TruncatedFile, "need " + std::to_string(n) + " bytes at offset " +
                                                      std::to_string(pos_) + ", have " + std::to_string(remaining()));
        }
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace kremu::detail
