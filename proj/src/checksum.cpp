#include "topicstream/checksum.hpp"

#include <bit>
#include <cstdio>

namespace topicstream {

std::uint64_t Fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string HexDigest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string ChecksumDoubles(std::span<const double> values) {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    // Fixed little-endian byte order regardless of host.
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(bits >> (8 * i));
    state = Fnv1a(std::string_view(bytes, 8), state);
  }
  return HexDigest(state);
}

}  // namespace topicstream
