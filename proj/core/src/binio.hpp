#pragma once

// Low-level little-endian chunk I/O shared by the trace and weight
// containers. Not installed; implementation detail.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dualprobe/errors.hpp"

namespace dualprobe::detail {

inline void write_bytes(std::ostream& sink, const void* data, std::size_t size) {
    sink.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!sink) raise(errc::io, "failed writing to sink");
}

inline void write_u32le(std::ostream& sink, std::uint32_t value) {
    unsigned char bytes[4] = {
        static_cast<unsigned char>(value & 0xff),
        static_cast<unsigned char>((value >> 8) & 0xff),
        static_cast<unsigned char>((value >> 16) & 0xff),
        static_cast<unsigned char>((value >> 24) & 0xff),
    };
    write_bytes(sink, bytes, 4);
}

inline void write_f32le_block(std::ostream& sink, std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
        if (!values.empty()) write_bytes(sink, values.data(), values.size() * 4);
    } else {
        for (float v : values) write_u32le(sink, std::bit_cast<std::uint32_t>(v));
    }
}

// Reads exactly `size` bytes or throws errc::truncated.
inline void read_exact(std::istream& source, void* data, std::size_t size, const char* what) {
    source.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(source.gcount()) != size) {
        raise(errc::truncated, std::string("unexpected end of stream while reading ") + what);
    }
}

inline std::uint32_t read_u32le(std::istream& source, const char* what) {
    unsigned char bytes[4];
    read_exact(source, bytes, 4, what);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

inline void read_f32le_block(std::istream& source, std::span<float> values, const char* what) {
    if (values.empty()) return;
    if constexpr (std::endian::native == std::endian::little) {
        read_exact(source, values.data(), values.size() * 4, what);
    } else {
        for (float& v : values) v = std::bit_cast<float>(read_u32le(source, what));
    }
}

// "NTRC"/"NWTS"-style 4-byte magic check.
inline void expect_magic(std::istream& source, const char magic[4], const char* container) {
    char got[4];
    source.read(got, 4);
    if (source.gcount() != 4) raise(errc::truncated, std::string("stream shorter than the ") + container + " magic");
    if (std::memcmp(got, magic, 4) != 0) {
        raise(errc::bad_magic, std::string("not a ") + container + " container");
    }
}

}  // namespace dualprobe::detail
