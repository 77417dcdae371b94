#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "wast/errors.hpp"

namespace wast {

// Little-endian binary encoding used by the index and model files. Fixed
// widths keep the formats platform independent.
class ByteWriter {
public:
    void put_u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }

    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void put_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }

    void put_f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put_u64(bits);
    }

    void put_str(std::string_view s) {
        put_u64(s.size());
        buffer_.append(s.data(), s.size());
    }

    const std::string& buffer() const { return buffer_; }

private:
    std::string buffer_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint8_t get_u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }

    std::uint32_t get_u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }

    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }

    std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }

    double get_f64() {
        const std::uint64_t bits = get_u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string get_str() {
        const std::uint64_t n = get_u64();
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::uint64_t n) const {
        if (pos_ + n > data_.size()) throw CorruptIndex("file truncated or malformed");
    }

    std::uint8_t byte() { return static_cast<std::uint8_t>(data_[pos_++]); }

    std::string_view data_;
    std::size_t pos_ = 0;
};

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t hash = seed;
    for (char c : data) {
        hash ^= static_cast<std::uint8_t>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// Whole-file helpers; IoError on filesystem failures.
void write_file(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

}  // namespace wast
