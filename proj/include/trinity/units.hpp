#pragma once

#include <cstdint>
#include <string_view>

namespace trinity {

/// Decimal gigabyte. All GB quantities in this project are 10^9 bytes.
inline constexpr double kBytesPerGB = 1e9;

constexpr double bytes_to_gb(std::uint64_t bytes) { return static_cast<double>(bytes) / kBytesPerGB; }

/// Rounds to the nearest byte. Negative input is the caller's responsibility.
std::uint64_t gb_to_bytes(double gb);

/// Parses a capacity such as "10GB", "0.08 GB", "1.5TB", "500MB", "2e9B" or a bare
/// number (interpreted as GB). Units are decimal powers of ten. Throws
/// Error(InvalidArgument) on malformed or negative input.
std::uint64_t parse_capacity_bytes(std::string_view text);

}  // namespace trinity
