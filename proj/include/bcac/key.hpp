#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bcac/maps.hpp"

namespace bcac {

/// Per-position mode digits for the encrypted prefix plus the public tail mode.
class EncryptionKey {
 public:
  EncryptionKey() = default;
  EncryptionKey(std::vector<MapMode> modes, MapMode tail = MapMode(1))
      : modes_(std::move(modes)), tail_(tail) {}

  /// From a digit string such as "136".
  static EncryptionKey from_digits(std::string_view digits, MapMode tail = MapMode(1));

  std::size_t size() const noexcept { return modes_.size(); }
  bool empty() const noexcept { return modes_.empty(); }
  const std::vector<MapMode>& modes() const noexcept { return modes_; }
  MapMode tail() const noexcept { return tail_; }

  /// Mode governing message position `pos` (0-based).
  MapMode mode_at(std::size_t pos) const noexcept {
    return pos < modes_.size() ? modes_[pos] : tail_;
  }

  std::string digits() const;

  /// 3 bits per position, digit-1, MSB-first; 3M bits in ceil(3M/8) bytes.
  std::vector<std::uint8_t> pack() const;
  static EncryptionKey unpack(std::span<const std::uint8_t> bytes, std::size_t m,
                              MapMode tail = MapMode(1));

  /// `CACKEY v1 M=<m> tail=<d> key=<digits>`
  std::string to_key_line() const;
  static EncryptionKey from_key_line(std::string_view line);

  friend bool operator==(const EncryptionKey&, const EncryptionKey&) = default;

 private:
  std::vector<MapMode> modes_;
  MapMode tail_{};
};

}  // namespace bcac
