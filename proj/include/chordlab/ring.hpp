#ifndef CHORDLAB_RING_HPP
#define CHORDLAB_RING_HPP

#include <bit>
#include <cassert>
#include <cstdint>

namespace chordlab {

using Key = std::uint64_t;

/// Sentinel for "no key" (nil pointer in a node's tables).
inline constexpr Key kNilKey = ~std::uint64_t{0};

inline bool is_nil(Key k) { return k == kNilKey; }

/// Circular identifier space of size K = 2^M.
struct Ring {
  std::uint64_t size = 0;  // K
  int bits = 0;            // M = log2(K)

  static Ring with_bits(int m) {
    assert(m > 0 && m < 64);
    return Ring{std::uint64_t{1} << m, m};
  }

  static Ring with_size(std::uint64_t k) {
    assert(k > 1 && std::has_single_bit(k));
    return Ring{k, std::countr_zero(k)};
  }

  std::uint64_t mask() const { return size - 1; }
};

/// Modular distance (u - v) mod K.
inline std::uint64_t distance(const Ring& ring, Key u, Key v) {
  return (u - v) & ring.mask();
}

enum class Closure {
  OpenOpen,    // (a, b)
  OpenClosed,  // (a, b]
};

/// Circular interval membership. For a == b the open interval is the
/// whole ring minus {a}; the half-open (a, a] is the whole ring.
inline bool in_interval(const Ring& ring, Key x, Key a, Key b, Closure c) {
  const std::uint64_t dx = distance(ring, x, a);
  const std::uint64_t db = distance(ring, b, a);
  if (db == 0) {  // full-circle convention
    return c == Closure::OpenClosed ? true : dx != 0;
  }
  if (c == Closure::OpenClosed) return dx > 0 && dx <= db;
  return dx > 0 && dx < db;
}

/// Start of finger i of node n: (n + 2^{i-1}) mod K, i in 1..M.
inline Key finger_start(const Ring& ring, Key n, int i) {
  assert(i >= 1 && i <= ring.bits);
  return (n + (std::uint64_t{1} << (i - 1))) & ring.mask();
}

}  // namespace chordlab

#endif  // CHORDLAB_RING_HPP
