#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cle {

// FNV-1a over raw bytes, 64-bit variant.
constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = kFnvOffsetBasis) noexcept {
  std::uint64_t h = basis;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

// splitmix64 finalizer; spreads FNV output across all bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Digest of a page's extracted text, used to detect content change.
class ContentHash {
 public:
  constexpr ContentHash() = default;
  constexpr explicit ContentHash(std::uint64_t value) : value_(value) {}

  static ContentHash of(std::string_view text) noexcept { return ContentHash(fnv1a64(text)); }
  /// Parses the 16-digit lowercase hex form; throws std::invalid_argument.
  static ContentHash from_hex(std::string_view hex);

  constexpr std::uint64_t value() const noexcept { return value_; }
  std::string hex() const;

  friend constexpr auto operator<=>(const ContentHash&, const ContentHash&) = default;

 private:
  std::uint64_t value_ = 0;
};

}  // namespace cle
