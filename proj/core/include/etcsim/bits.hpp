#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace etcsim {

/// Fixed-capacity bit string (up to 64 bits), most significant bit first.
class BitString {
 public:
  static constexpr unsigned kMaxBits = 64;

  BitString() = default;

  /// The low `width` bits of `value`, MSB first.
  static BitString from_uint(std::uint64_t value, unsigned width);
  /// Parses a string of '0'/'1' characters.
  static BitString parse(std::string_view text);

  void push_back(bool bit);

  [[nodiscard]] unsigned size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
  [[nodiscard]] bool operator[](unsigned i) const;

  /// Bits [first, first+count) as an unsigned integer.
  [[nodiscard]] std::uint64_t slice(unsigned first, unsigned count) const;
  [[nodiscard]] std::uint64_t to_uint() const { return slice(0, size_); }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::uint64_t bits_ = 0;  // bit i stored at position (size_-1-i)
  unsigned size_ = 0;
};

}  // namespace etcsim
