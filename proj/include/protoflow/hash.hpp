#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace protoflow {

// 64-bit FNV-1a. Stable across platforms, which std::hash is not.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t basis = 0xcbf29ce484222325ULL) {
    std::uint64_t h = basis;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t hash_values(std::string_view text, std::initializer_list<std::uint64_t> values) {
    std::uint64_t h = fnv1a64(text);
    for (auto v : values) h = hash_combine(h, v);
    return h;
}

/// Lowercase 16-digit hex rendering of a 64-bit value.
inline std::string hex16(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace protoflow
