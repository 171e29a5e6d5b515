#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcac {

/// A message as one 0/1 value per element.
using Bits = std::vector<std::uint8_t>;

/// Parse "0101"; whitespace is skipped, any other character is a format error.
Bits bits_from_string(std::string_view text);
std::string bits_to_string(std::span<const std::uint8_t> bits);

/// Pack MSB-first, zero-padding the final partial byte.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);
/// Take the first `count` bits of `bytes`, MSB-first.
Bits unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count);

}  // namespace bcac
