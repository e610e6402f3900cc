#pragma once

// Little-endian scalar IO for the GDFS / GDFN / GDFG / PLY formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "gdf/common/error.hpp"

namespace gdf::io {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

template <typename T>
    requires std::is_arithmetic_v<T>
void write_le(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
    requires std::is_arithmetic_v<T>
T read_le(std::istream& in, std::string_view what = "value") {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw FormatError("unexpected end of file while reading " + std::string(what));
    }
    return value;
}

inline void write_magic(std::ostream& out, std::string_view magic) {
    out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, std::string_view magic) {
    std::array<char, 8> buf{};
    in.read(buf.data(), static_cast<std::streamsize>(magic.size()));
    if (!in || std::string_view(buf.data(), magic.size()) != magic) {
        throw FormatError("bad magic, expected \"" + std::string(magic) + "\"");
    }
}

/// 64-bit FNV-1a over a file's bytes. Used for manifest input hashes.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace gdf::io
