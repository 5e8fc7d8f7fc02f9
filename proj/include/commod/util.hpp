#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace commod {

// FNV-1a 64-bit content digest. Not cryptographic; used by run manifests to
// detect that an input or artifact changed.
inline std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::string file_digest_hex(const std::string& path);
std::string digest_hex(std::uint64_t h);

}  // namespace commod
