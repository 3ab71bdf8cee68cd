#include "etcsim/bits.hpp"

#include <stdexcept>

namespace etcsim {

BitString BitString::from_uint(std::uint64_t value, unsigned width) {
  if (width > kMaxBits) throw std::length_error("bit string longer than 64 bits");
  if (width < kMaxBits && (value >> width) != 0) throw std::out_of_range("value does not fit in bit width");
  BitString out;
  out.bits_ = value;
  out.size_ = width;
  return out;
}

BitString BitString::parse(std::string_view text) {
  BitString out;
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit string may only contain '0' and '1'");
    out.push_back(c == '1');
  }
  return out;
}

void BitString::push_back(bool bit) {
  if (size_ == kMaxBits) throw std::length_error("bit string longer than 64 bits");
  bits_ = (bits_ << 1) | (bit ? 1U : 0U);
  ++size_;
}

bool BitString::operator[](unsigned i) const {
  if (i >= size_) throw std::out_of_range("bit index");
  return ((bits_ >> (size_ - 1 - i)) & 1U) != 0;
}

std::uint64_t BitString::slice(unsigned first, unsigned count) const {
  if (first + count > size_) throw std::out_of_range("bit slice");
  if (count == 0) return 0;
  const unsigned shift = size_ - first - count;
  const std::uint64_t mask = count == kMaxBits ? ~0ULL : ((1ULL << count) - 1);
  return (bits_ >> shift) & mask;
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(size_);
  for (unsigned i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
  return s;
}

}  // namespace etcsim
