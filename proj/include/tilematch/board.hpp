#pragma once

// Mutable game state: slot occupancy, faces and groups, and the population
// vectors that the pair predicates read.
//
// Row population vectors are stored per level in an OrTree whose leaf r holds
// bits {col, col+1} of every present tile with top row r. A tile therefore
// appears in one stored row only; the real population of doubled row r is
// leaf(r-1) | leaf(r). Column vectors are the transposed construction.
// Pillar masks (one bit per level) are exact for every doubled cell.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "bitops.hpp"
#include "layout.hpp"

namespace tilematch {

enum class MoveKind { pair, lone };

struct Move {
  int a = -1;
  int b = -1;
  MoveKind kind = MoveKind::pair;

  static constexpr Move pair_of(int a, int b) noexcept { return {a, b, MoveKind::pair}; }
  static constexpr Move lone(int a) noexcept { return {a, a, MoveKind::lone}; }

  friend constexpr bool operator==(const Move&, const Move&) = default;
};

struct UndoToken {
  std::size_t depth = 0;
  Move move;
};

using PillarMask = std::uint16_t;

class Board {
 public:
  Board(LayoutPtr layout, std::vector<int> faces)
      : layout_(std::move(layout)), faces_(std::move(faces)) {
    if (!layout_) throw std::invalid_argument("null layout");
    if (faces_.size() != layout_->size()) throw std::invalid_argument("one face per slot required");
    groups_ = groups_from_faces(faces_);
    group_of_.assign(faces_.size(), -1);
    for (const auto& g : groups_.groups)
      for (int m : g.members) group_of_[std::size_t(m)] = g.group_id;
    remaining_.assign(groups_.groups.size(), 0);
    rowfill_.resize(std::size_t(std::max(1, layout_->num_levels())));
    colfill_.resize(rowfill_.size());
    words_.assign((faces_.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < faces_.size(); ++i) add(int(i));

    int rmin = 64, rmax = -1, cmin = 64, cmax = -1;
    for (const auto& s : layout_->slots) {
      rmin = std::min(rmin, s.row);
      rmax = std::max(rmax, s.row + 1);
      cmin = std::min(cmin, s.col);
      cmax = std::max(cmax, s.col + 1);
    }
    row_extent_ = rmax < 0 ? 0 : span_mask(rmin, rmax);
    col_extent_ = cmax < 0 ? 0 : span_mask(cmin, cmax);
  }

  const Layout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  std::size_t size() const noexcept { return faces_.size(); }
  const Slot& slot(int i) const { return layout_->slots[std::size_t(i)]; }
  int num_levels() const noexcept { return int(rowfill_.size()); }

  bool occupied(int i) const noexcept { return (words_[std::size_t(i) >> 6] >> (i & 63)) & 1u; }
  int face(int i) const noexcept { return faces_[std::size_t(i)]; }
  const std::vector<int>& faces() const noexcept { return faces_; }
  int group_of(int i) const noexcept { return group_of_[std::size_t(i)]; }
  const GroupAssignment& groups() const noexcept { return groups_; }
  const TileGroup& group(int g) const { return groups_.groups[std::size_t(g)]; }
  int num_groups() const noexcept { return int(groups_.groups.size()); }
  int remaining(int g) const noexcept { return remaining_[std::size_t(g)]; }
  std::size_t tiles_left() const noexcept { return tiles_left_; }
  bool empty() const noexcept { return tiles_left_ == 0; }

  const OrTree& rowfill(int level) const { return rowfill_[std::size_t(level)]; }
  const OrTree& colfill(int level) const { return colfill_[std::size_t(level)]; }
  PillarMask pillar(int row, int col) const noexcept { return pillar_[std::size_t(row)][std::size_t(col)]; }

  bool cell_occupied(int level, int row, int col) const noexcept {
    if (row < 0 || row >= kGridSize || col < 0 || col >= kGridSize) return false;
    return (pillar_[std::size_t(row)][std::size_t(col)] >> level) & 1u;
  }

  // Doubled columns (rows) spanned by the layout, for border-free play.
  BitRow col_extent() const noexcept { return col_extent_; }
  BitRow row_extent() const noexcept { return row_extent_; }

  // Occupancy bitset in slot order; the transposition-table signature.
  std::span<const std::uint64_t> occupancy_words() const noexcept { return words_; }

  std::span<const Move> history() const noexcept { return history_; }

  UndoToken play(const Move& m) {
    check_present(m.a);
    if (m.kind == MoveKind::pair) {
      if (m.a == m.b) throw std::logic_error("a pair needs two distinct slots");
      check_present(m.b);
      if (group_of(m.a) != group_of(m.b)) throw std::logic_error("slots carry different faces");
      remove(m.a);
      remove(m.b);
    } else {
      if (m.a != m.b) throw std::logic_error("a lone move names one slot");
      remove(m.a);
    }
    history_.push_back(m);
    return {history_.size() - 1, m};
  }

  void unplay(const UndoToken& token) {
    if (history_.empty() || token.depth != history_.size() - 1 || !(history_.back() == token.move))
      throw std::logic_error("unplay out of stack order");
    history_.pop_back();
    add(token.move.a);
    if (token.move.kind == MoveKind::pair) add(token.move.b);
  }

  // Unplays the most recent move.
  void undo() {
    if (history_.empty()) throw std::logic_error("nothing to undo");
    unplay({history_.size() - 1, history_.back()});
  }

  // Rewinds the history to `depth` moves.
  void undo_to(std::size_t depth) {
    while (history_.size() > depth) undo();
  }

  // State equality (occupancy, vectors, trees, history); layouts must be the
  // same object.
  friend bool operator==(const Board& x, const Board& y) {
    return x.layout_ == y.layout_ && x.faces_ == y.faces_ && x.words_ == y.words_ &&
           x.remaining_ == y.remaining_ && x.tiles_left_ == y.tiles_left_ && x.rowfill_ == y.rowfill_ &&
           x.colfill_ == y.colfill_ && x.pillar_ == y.pillar_ && x.history_ == y.history_;
  }

 private:
  static constexpr BitRow span_mask(int lo, int hi_inclusive) noexcept {
    BitRow upto = hi_inclusive >= 63 ? ~BitRow{0} : (BitRow{2} << hi_inclusive) - 1;
    return upto & ~((BitRow{1} << lo) - 1);
  }

  void check_present(int i) const {
    if (i < 0 || std::size_t(i) >= size()) throw std::out_of_range("slot index out of range");
    if (!occupied(i)) throw std::logic_error("slot " + std::to_string(i) + " is not occupied");
  }

  void remove(int i) { toggle(i, false); }
  void add(int i) { toggle(i, true); }

  void toggle(int i, bool present) {
    const Slot& s = slot(i);
    auto& rows = rowfill_[std::size_t(s.level)];
    auto& cols = colfill_[std::size_t(s.level)];
    const BitRow hbits = BitRow{3} << s.col;
    const BitRow vbits = BitRow{3} << s.row;
    const PillarMask lbit = PillarMask(1u << s.level);
    const std::uint64_t wbit = std::uint64_t{1} << (i & 63);
    if (present) {
      rows.set_leaf(s.row, rows.leaf(s.row) | hbits);
      cols.set_leaf(s.col, cols.leaf(s.col) | vbits);
      for (int dr = 0; dr < 2; ++dr)
        for (int dc = 0; dc < 2; ++dc) pillar_[std::size_t(s.row + dr)][std::size_t(s.col + dc)] |= lbit;
      words_[std::size_t(i) >> 6] |= wbit;
      ++remaining_[std::size_t(group_of(i))];
      ++tiles_left_;
    } else {
      rows.set_leaf(s.row, rows.leaf(s.row) & ~hbits);
      cols.set_leaf(s.col, cols.leaf(s.col) & ~vbits);
      for (int dr = 0; dr < 2; ++dr)
        for (int dc = 0; dc < 2; ++dc)
          pillar_[std::size_t(s.row + dr)][std::size_t(s.col + dc)] &= PillarMask(~lbit);
      words_[std::size_t(i) >> 6] &= ~wbit;
      --remaining_[std::size_t(group_of(i))];
      --tiles_left_;
    }
  }

  LayoutPtr layout_;
  std::vector<int> faces_;
  GroupAssignment groups_;
  std::vector<int> group_of_;
  std::vector<int> remaining_;
  std::size_t tiles_left_ = 0;
  std::vector<OrTree> rowfill_;
  std::vector<OrTree> colfill_;
  std::array<std::array<PillarMask, kGridSize>, kGridSize> pillar_{};
  std::vector<std::uint64_t> words_;
  std::vector<Move> history_;
  BitRow row_extent_ = 0;
  BitRow col_extent_ = 0;
};

inline Board make_board(const Layout& layout, std::vector<int> faces) {
  return Board(std::make_shared<const Layout>(layout), std::move(faces));
}

// Deals `layout` with `ga` using the seeded shuffle of make_deal.
inline Board deal(LayoutPtr layout, const GroupAssignment& ga, std::uint64_t seed) {
  if (ga.num_tiles() != layout->size()) throw std::invalid_argument("group assignment does not cover the layout");
  auto d = make_deal(ga, seed);
  return Board(std::move(layout), std::move(d.faces));
}

inline Board deal(LayoutPtr layout, std::uint64_t seed) {
  auto ga = make_groups(*layout);
  return deal(std::move(layout), ga, seed);
}

}  // namespace tilematch
