#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ahi {

// FNV-1a, 64-bit. Used for artifact fingerprints, not security.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t value);

// Hash of a file's raw bytes. Throws ahi::DataError if unreadable.
std::string hash_file(const std::string& path);

} // namespace ahi
