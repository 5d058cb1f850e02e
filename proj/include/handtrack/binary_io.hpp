#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "handtrack/error.hpp"

// Little-endian primitives shared by the binary exchange formats.
namespace handtrack::binio {

inline void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }

inline void put_u16(std::ostream& os, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    os.write(b, 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>(v >> 24)};
    os.write(b, 4);
}

inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

inline void put_f32s(std::ostream& os, std::span<const float> vs) {
    for (float v : vs) put_f32(os, v);
}

inline void put_magic(std::ostream& os, std::string_view magic) { os.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

class Reader {
public:
    Reader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

    bool at_eof() { return is_.peek() == std::char_traits<char>::eof(); }

    void bytes(char* dst, std::size_t n) {
        is_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n) throw DataError(what_ + ": truncated input");
    }

    std::uint8_t u8() {
        unsigned char b;
        bytes(reinterpret_cast<char*>(&b), 1);
        return b;
    }

    std::uint16_t u16() {
        unsigned char b[2];
        bytes(reinterpret_cast<char*>(b), 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }

    std::uint32_t u32() {
        unsigned char b[4];
        bytes(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    float f32() { return std::bit_cast<float>(u32()); }

    void f32s(std::span<float> dst) {
        for (auto& v : dst) v = f32();
    }

    void expect_magic(std::string_view magic) {
        std::string got(magic.size(), '\0');
        bytes(got.data(), got.size());
        if (got != magic) throw DataError(what_ + ": bad magic, expected '" + std::string(magic) + "'");
    }

    const std::string& what() const { return what_; }

private:
    std::istream& is_;
    std::string what_;
};

}  // namespace handtrack::binio
