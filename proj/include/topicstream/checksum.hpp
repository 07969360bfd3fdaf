#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace topicstream {

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t Fnv1a(std::string_view bytes,
                    std::uint64_t state = 0xcbf29ce484222325ULL);
std::string HexDigest(std::uint64_t value);

// Checksum over the IEEE-754 bit patterns of a matrix/vector payload.
std::string ChecksumDoubles(std::span<const double> values);

}  // namespace topicstream
