#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>

namespace nxplay {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// Incremental 64-bit FNV-1a. Multi-byte values are fed little-endian.
class Fnv1a {
 public:
  void byte(std::uint8_t b) noexcept {
    hash_ ^= b;
    hash_ *= kFnvPrime;
  }
  void bytes(std::string_view s) noexcept {
    for (char c : s) byte(static_cast<std::uint8_t>(c));
  }
  void u32(std::uint32_t v) noexcept {
    for (int i = 0; i < 4; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) noexcept { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) noexcept { u64(std::bit_cast<std::uint64_t>(v)); }

  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = kFnvOffset;
};

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  Fnv1a h;
  h.bytes(s);
  return h.value();
}

}  // namespace nxplay
