#pragma once

// Little-endian scalar encoding shared by the binary formats.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace clir::detail {

template <typename T>
T byteswap(T value) {
    auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

template <typename T>
void put_le(std::string& out, T value) {
    if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get_le(std::string_view in, std::size_t offset) {
    T value;
    std::memcpy(&value, in.data() + offset, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
    return value;
}

}  // namespace clir::detail
