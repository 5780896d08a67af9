#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace unmt {

// FNV-1a, used for file checksums in manifests and for the vocabulary hash
// stored in checkpoints.
inline std::uint64_t fnv1a(std::string_view data,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path);

std::string hex64(std::uint64_t v);

}  // namespace unmt
