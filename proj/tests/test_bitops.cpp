#include <gtest/gtest.h>

#include <random>

#include <tilematch/bitops.hpp>

#include "oracle/naive.hpp"

using namespace tilematch;

namespace {

std::uint64_t random_row(std::mt19937_64& rng) {
  // mix dense and sparse rows so runs of every length show up
  switch (rng() % 3) {
    case 0: return rng();
    case 1: return rng() & rng() & rng();
    default: return rng() | rng();
  }
}

BitRow naive_or(const OrTree& t, int p1, int p2) {
  BitRow f = 0;
  for (int k = p1; k < p2; ++k) f |= t.leaf(k);
  return f;
}

}  // namespace

TEST(FillRange, WorkedExamples) {
  // f = ...0100110 with p = 3: run of zeros at bits 3..4
  EXPECT_EQ(fill_range(0b100110, 3), BitRow{0b011000});
  EXPECT_EQ(fill_range(0b100110, 0), BitRow{0b000001});
  EXPECT_EQ(fill_range(0, 17), ~BitRow{0});
  EXPECT_EQ(fill_range(BitRow{1} << 63, 0), ~BitRow{0} >> 1);
  EXPECT_EQ(fill_range(1, 63), ~BitRow{1});
}

TEST(FillRange, BothPathsMatchScan) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200000; ++i) {
    BitRow f = random_row(rng);
    const int p = int(rng() % 64);
    f &= ~(BitRow{1} << p);
    const BitRow want = oracle::fill_range_scan(f, p);
    ASSERT_EQ(fill_range<FillMode::bitscan>(f, p), want) << f << " " << p;
    ASSERT_EQ(fill_range<FillMode::cascade>(f, p), want) << f << " " << p;
  }
}

TEST(FillRange, IsConstexpr) {
  static_assert(fill_range<FillMode::cascade>(0b1001, 1) == 0b0110);
  static_assert(fill_range<FillMode::bitscan>(0b1001, 2) == 0b0110);
}

TEST(NegationTable, Values) {
  EXPECT_EQ(kNegationOfLeadingBit[0], -1);
  EXPECT_EQ(kNegationOfLeadingBit[1], -1);
  EXPECT_EQ(kNegationOfLeadingBit[5], -4);
  EXPECT_EQ(kNegationOfLeadingBit[64], -64);
  EXPECT_EQ(kNegationOfLeadingBit[127], -64);
}

TEST(OrTree, UpdateTouchesFourNodes) {
  OrTree t;
  t.set_leaf(5, 0xf0);
  int nonzero = 0;
  for (int i = 0; i < OrTree::kSize; ++i) nonzero += t[i] != 0;
  EXPECT_EQ(nonzero, 5);
  EXPECT_EQ(t[11], 0xf0u);
  EXPECT_EQ(t[10], 0xf0u);
  EXPECT_EQ(t[12], 0xf0u);
  EXPECT_EQ(t[8], 0xf0u);
  EXPECT_EQ(t[16], 0xf0u);
}

TEST(OrTree, TopNodesStayStale) {
  OrTree t;
  for (int k = 0; k < 64; ++k) t.set_leaf(k, BitRow{1} << k);
  EXPECT_EQ(t[32], 0u);
  EXPECT_EQ(t[64], 0u);
  EXPECT_EQ(t[96], 0u);
  EXPECT_EQ(t[0], 0u);
}

TEST(OrTree, RangesMatchNaiveLoop) {
  std::mt19937_64 rng(11);
  OrTree t;
  for (int round = 0; round < 50; ++round) {
    for (int w = 0; w < 40; ++w) t.set_leaf(int(rng() % 64), random_row(rng) & random_row(rng));
    for (int p1 = 0; p1 < 64; ++p1)
      for (int p2 = p1; p2 < 64; ++p2) {
        if (p1 == 0 && p2 >= 32) continue;
        ASSERT_EQ(t.range_or(p1, p2), naive_or(t, p1, p2)) << p1 << " " << p2;
      }
  }
}

TEST(OrTree, ShortRangesFromLeafZero) {
  OrTree t;
  for (int k = 0; k < 64; ++k) t.set_leaf(k, BitRow{1} << k);
  EXPECT_EQ(t.range_or(0, 0), 0u);
  EXPECT_EQ(t.range_or(0, 1), 1u);
  EXPECT_EQ(t.range_or(0, 31), (BitRow{1} << 31) - 1);
  EXPECT_EQ(t.range_or(1, 63), ((BitRow{1} << 63) - 1) & ~BitRow{1});
}

TEST(OrTree, RebuildMatchesIncrementalState) {
  std::mt19937_64 rng(3);
  OrTree t;
  for (int w = 0; w < 500; ++w) t.set_leaf(int(rng() % 64), rng());
  OrTree copy;
  for (int k = 0; k < 64; ++k) copy[2 * k + 1] = t.leaf(k);
  copy.rebuild();
  EXPECT_EQ(copy, t);
}
