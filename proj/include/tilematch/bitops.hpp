#pragma once

// Bit-vector primitives for pair testing on a 64-cell-wide doubled grid.
//
// A BitRow is the population vector of one doubled row (bit i = column i),
// or of one doubled column when used transposed. The OrTree keeps the rows
// of one level in the odd slots of a 128-entry array and their disjunctions
// in the even slots, so that the OR of any run of rows costs O(log d).

#include <array>
#include <bit>
#include <cassert>
#include <cstdint>
#include <span>

namespace tilematch {

using BitRow = std::uint64_t;

inline constexpr int kGridSize = 64;

enum class FillMode { bitscan, cascade };

#ifndef TILEMATCH_DEFAULT_FILL_MODE
#define TILEMATCH_DEFAULT_FILL_MODE ::tilematch::FillMode::bitscan
#endif

inline constexpr FillMode kDefaultFillMode = TILEMATCH_DEFAULT_FILL_MODE;

// Returns the maximal run of cleared bits of `f` containing position `p`,
// as set bits. Bit p of f must be clear: remove the scanned tile first.
template <FillMode Mode = kDefaultFillMode>
constexpr BitRow fill_range(BitRow f, int p) noexcept {
  assert(p >= 0 && p < kGridSize);
  assert(((f >> p) & 1u) == 0);
  BitRow g = f & ((BitRow{1} << p) - 1);
  if (g == 0) return ~f & (f - 1);
  // g becomes the smallest power of two exceeding the bits below p
  if constexpr (Mode == FillMode::bitscan) {
    g = BitRow{2} << (63 ^ std::countl_zero(g));
  } else {
    g |= g >> 1;
    g |= g >> 2;
    g |= g >> 4;
    g |= g >> 8;
    g |= g >> 16;
    g |= g >> 32;
    g++;
  }
  return ~f & (f - g);
}

// -(2^floor(log2 i)) for i >= 1, and -1 for i == 0.
inline constexpr std::array<int, 128> kNegationOfLeadingBit = [] {
  std::array<int, 128> table{};
  table[0] = -1;
  for (int i = 1; i < 128; ++i) table[i] = -(1 << (std::bit_width(unsigned(i)) - 1));
  return table;
}();

// Interlaced OR-tree over 64 leaves.
//
//                                 ______________________________32
//                 ______________16______________
//         ______08______                  ______24______
//     __04__          __12__          __20__          __28__
//   02      06      10      14      18      22      26      30
// 01  03  05  07  09  11  13  15  17  19  21  23  25  27  29  31
//
// Leaf k lives at index 2k+1. Only the levels up to the 16-spaced nodes are
// maintained; nodes 32, 64 and 96 stay stale because queries never need them
// (see range_or).
class OrTree {
 public:
  static constexpr int kSize = 128;

  constexpr BitRow leaf(int k) const noexcept { return fill_[2 * k + 1]; }

  // Leaf read that yields 0 outside 0..63.
  constexpr BitRow leaf_or_zero(int k) const noexcept {
    return (k < 0 || k >= kGridSize) ? 0 : fill_[2 * k + 1];
  }

  constexpr void set_leaf(int k, BitRow value) noexcept {
    fill_[2 * k + 1] = value;
    update(2 * k + 1);
  }

  constexpr BitRow& operator[](int i) noexcept { return fill_[i]; }
  constexpr BitRow operator[](int i) const noexcept { return fill_[i]; }

  std::span<const BitRow, kSize> raw() const noexcept { return fill_; }

  // Recomputes the ancestors of odd index p after fill_[p] changed.
  // Rewrites 4 internal nodes.
  constexpr void update(int p) noexcept {
    assert(p > 0 && p < kSize && (p & 1));
    p &= -4;
    fill_[p + 2] = fill_[p + 1] | fill_[p + 3];
    p &= -8;
    fill_[p + 4] = fill_[p + 2] | fill_[p + 6];
    p &= -16;
    fill_[p + 8] = fill_[p + 4] | fill_[p + 12];
    p &= -32;
    fill_[p + 16] = fill_[p + 8] | fill_[p + 24];
  }

  // OR of leaves p1 .. p2-1, i.e. of fill_[2*p1+1] | ... | fill_[2*p2-1].
  // The empty range (p1 == p2) yields 0. The range must not start at leaf 0
  // and reach leaf 32 or beyond, since that would need the stale node 32.
  constexpr BitRow range_or(int p1, int p2) const noexcept {
    assert(0 <= p1 && p1 <= p2 && p2 < kGridSize);
    assert(p1 > 0 || p2 < 32);
    // if p1 < p2, then 2p is the last common ancestor of 2p1+1 and 2p2+1
    int p = p2 & kNegationOfLeadingBit[p1 ^ p2];
    BitRow f = 0;
    const int base = 2 * p;

    p1 -= p;
    while (p1) {
      int s = p1 & -p1;
      f |= fill_[base + 2 * p1 + s];
      p1 += s;
    }

    p2 -= p;
    while (p2) {
      int s = p2 & -p2;
      p2 -= s;
      f |= fill_[base + 2 * p2 + s];
    }
    return f;
  }

  // Rebuilds every maintained internal node from the leaves.
  constexpr void rebuild() noexcept {
    for (int p = 1; p < kSize; p += 4) update(p);
  }

  friend constexpr bool operator==(const OrTree&, const OrTree&) = default;

 private:
  std::array<BitRow, kSize> fill_{};
};

// Same-index OR of leaves k and k+1 with out-of-range leaves read as 0.
constexpr BitRow leaf_pair(const OrTree& t, int k) noexcept {
  return t.leaf_or_zero(k) | t.leaf_or_zero(k + 1);
}

}  // namespace tilematch
