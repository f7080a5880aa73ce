#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace morphotok::internal {

struct Fingerprint {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  bool operator==(const Fingerprint&) const = default;

  std::string Hex() const;
};

struct FingerprintHash {
  std::size_t operator()(const Fingerprint& f) const {
    return static_cast<std::size_t>(f.hi ^ (f.lo * 0x9E3779B97F4A7C15ULL));
  }
};

inline std::uint64_t Fnv1a(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t Mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

// Two independent 64-bit hashes; the length is folded in so that
// collisions would also need equal lengths.
inline Fingerprint FingerprintOf(std::string_view s) {
  return {Fnv1a(s, 0xCBF29CE484222325ULL),
          Mix(Fnv1a(s, 0x84222325CBF29CE4ULL) ^ s.size())};
}

inline std::string Fingerprint::Hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(32, '0');
  for (int i = 0; i < 16; ++i) {
    out[15 - i] = kDigits[(hi >> (4 * i)) & 0xF];
    out[31 - i] = kDigits[(lo >> (4 * i)) & 0xF];
  }
  return out;
}

}  // namespace morphotok::internal
