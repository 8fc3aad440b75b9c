#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fsde {

/// Shortest round-trippable decimal with at most 17 significant digits.
std::string format_double17(double value);

/// FNV-1a 64-bit hash; used to stamp output files with the config they came
/// from.
std::uint64_t fnv1a64(std::string_view text);

/// Lower-case 16-digit hex.
std::string to_hex(std::uint64_t value);

}  // namespace fsde
