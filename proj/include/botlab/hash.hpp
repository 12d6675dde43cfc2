#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace botlab {

/// FNV-1a, used to derive content-addressed artifact version strings.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string content_version(std::string_view prefix, std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(prefix) + "-" + buf;
}

}  // namespace botlab
