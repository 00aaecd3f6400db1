#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace texclass {

// All library failures surface as texclass::error with a one-line message.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Axis-aligned rectangle in pixel coordinates, (x,y) = top-left corner.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    long long area() const { return static_cast<long long>(w) * h; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

// FNV-1a, used for histogram layout ids.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

template <typename T>
std::uint64_t fnv1a_value(const T& v, std::uint64_t seed) {
    static_assert(std::is_trivially_copyable_v<T>);
    return fnv1a(&v, sizeof(v), seed);
}

} // namespace texclass
