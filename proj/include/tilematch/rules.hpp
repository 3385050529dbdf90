#pragma once

// Playable-pair predicates for Shisen-Sho (on the doubled Mahjong grid) and
// Mahjong Solitaire, plus connection witnesses and move enumeration.
//
// Shisen-Sho: both tiles need an empty pillar above them. Tiles on one level
// connect by at most 3 axis-aligned free lines through empty doubled cells of
// that level. Tiles on different levels connect by the pillar line above the
// lower tile plus at most 2 lines on the level of the higher tile.

#include <optional>
#include <string>
#include <vector>

#include "board.hpp"

namespace tilematch {

enum class RuleKind { shisen, mahjong, mahjong_transposed };
enum class FreeVariant { pillar_above, adjacent_above };

struct Rules {
  RuleKind kind = RuleKind::shisen;
  FreeVariant free_variant = FreeVariant::pillar_above;
  // Shisen-Sho lines may leave the layout's bounding box.
  bool border_paths = true;
};

inline std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::shisen: return "shisen";
    case RuleKind::mahjong: return "mahjong";
    case RuleKind::mahjong_transposed: return "mahjong-t";
  }
  return "?";
}

inline std::optional<RuleKind> parse_rule_kind(const std::string& s) {
  if (s == "shisen") return RuleKind::shisen;
  if (s == "mahjong") return RuleKind::mahjong;
  if (s == "mahjong-t" || s == "mahjong_transposed") return RuleKind::mahjong_transposed;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Connections

enum class SegmentKind { horizontal, vertical, pillar };

struct Cell {
  int row = 0;
  int col = 0;
  int level = 0;
  friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

struct Segment {
  SegmentKind kind = SegmentKind::horizontal;
  Cell from;
  Cell to;
  friend constexpr bool operator==(const Segment&, const Segment&) = default;
};

struct Connection {
  std::vector<Segment> segments;
};

// ---------------------------------------------------------------------------
// Ranges

// True when no tile sits on any level above the slot's footprint.
inline bool pillar_clear(const Board& b, int i) noexcept {
  const Slot& s = b.slot(i);
  const PillarMask above = PillarMask(~((2u << s.level) - 1));
  return ((b.pillar(s.row, s.col) | b.pillar(s.row, s.col + 1) | b.pillar(s.row + 1, s.col) |
           b.pillar(s.row + 1, s.col + 1)) &
          above) == 0;
}

// Doubled columns reachable horizontally from the slot on its level, through
// either of the two doubled rows it spans. The slot itself is excluded from
// the population, so this also works for a removed slot's position.
inline BitRow horizontal_range(const Board& b, int i) noexcept {
  const Slot& s = b.slot(i);
  const OrTree& rows = b.rowfill(s.level);
  // row above tile
  BitRow f1 = rows.leaf_or_zero(s.row - 1);
  // row of tile without tile itself
  BitRow f2 = rows.leaf(s.row) & ~(BitRow{3} << s.col);
  // row below tile
  BitRow f3 = rows.leaf_or_zero(s.row + 1);
  f1 |= f2;
  f3 |= f2;
  if (f1 == f2 || f2 == f3) return fill_range(f2, s.col);
  return fill_range(f1, s.col) | fill_range(f3, s.col);
}

// Transposed counterpart of horizontal_range over the column vectors.
inline BitRow vertical_range(const Board& b, int i) noexcept {
  const Slot& s = b.slot(i);
  const OrTree& cols = b.colfill(s.level);
  BitRow f1 = cols.leaf_or_zero(s.col - 1);
  BitRow f2 = cols.leaf(s.col) & ~(BitRow{3} << s.row);
  BitRow f3 = cols.leaf_or_zero(s.col + 1);
  f1 |= f2;
  f3 |= f2;
  if (f1 == f2 || f2 == f3) return fill_range(f2, s.row);
  return fill_range(f1, s.row) | fill_range(f3, s.row);
}

namespace detail {

// Bits of the lines between two stored rows (or columns) lo < hi of a level:
// stored leaves lo+1 .. hi-1, covering real lines lo+1 .. hi.
inline BitRow between(const OrTree& t, int lo, int hi) noexcept {
  return lo < hi ? t.range_or(lo + 1, hi) : 0;
}

enum class Shape { none, hvh, vhv };

struct PairProbe {
  Shape shape = Shape::none;
  int level = 0;     // level of the in-plane lines
  int line = -1;     // doubled column (hvh) or row (vhv) of the middle line
  int lower = -1;    // slot owning the pillar line, -1 on one level
};

inline PairProbe probe_shisen(const Board& b, int x, int y, const Rules& rules) noexcept {
  PairProbe probe;
  if (!pillar_clear(b, x) || !pillar_clear(b, y)) return probe;
  const Slot& sx = b.slot(x);
  const Slot& sy = b.slot(y);
  BitRow hx, hy, vx, vy;
  int level = sx.level;
  if (sx.level == sy.level) {
    hx = horizontal_range(b, x);
    hy = horizontal_range(b, y);
    vx = vertical_range(b, x);
    vy = vertical_range(b, y);
  } else {
    // the lower tile is replaced by just its footprint on the higher level
    const bool x_lower = sx.level < sy.level;
    const int hi = x_lower ? y : x;
    const Slot& sl = x_lower ? sx : sy;
    level = b.slot(hi).level;
    BitRow hl = BitRow{3} << sl.col, vl = BitRow{3} << sl.row;
    BitRow hh = horizontal_range(b, hi), vh = vertical_range(b, hi);
    hx = x_lower ? hl : hh;
    hy = x_lower ? hh : hl;
    vx = x_lower ? vl : vh;
    vy = x_lower ? vh : vl;
    probe.lower = x_lower ? x : y;
  }
  if (!rules.border_paths) {
    hx &= b.col_extent();
    hy &= b.col_extent();
    vx &= b.row_extent();
    vy &= b.row_extent();
  }
  probe.level = level;
  const int rlo = std::min(sx.row, sy.row), rhi = std::max(sx.row, sy.row);
  if (BitRow cand = hx & hy & ~between(b.rowfill(level), rlo, rhi)) {
    probe.shape = Shape::hvh;
    probe.line = std::countr_zero(cand);
    return probe;
  }
  const int clo = std::min(sx.col, sy.col), chi = std::max(sx.col, sy.col);
  if (BitRow cand = vx & vy & ~between(b.colfill(level), clo, chi)) {
    probe.shape = Shape::vhv;
    probe.line = std::countr_zero(cand);
    return probe;
  }
  probe.lower = -1;
  return probe;
}

}  // namespace detail

// Shisen-Sho connection test between slots x and y. Either may be a removed
// slot's position; the caller checks faces and occupancy.
inline bool shisen_connects(const Board& b, int x, int y, const Rules& rules = {}) noexcept {
  return detail::probe_shisen(b, x, y, rules).shape != detail::Shape::none;
}

// ---------------------------------------------------------------------------
// Mahjong Solitaire freedom

inline bool mahjong_free(const Board& b, int i, const Rules& rules) noexcept {
  const Slot& s = b.slot(i);
  if (rules.free_variant == FreeVariant::pillar_above) {
    if (!pillar_clear(b, i)) return false;
  } else {
    const int up = s.level + 1;
    if (b.cell_occupied(up, s.row, s.col) || b.cell_occupied(up, s.row, s.col + 1) ||
        b.cell_occupied(up, s.row + 1, s.col) || b.cell_occupied(up, s.row + 1, s.col + 1))
      return false;
  }
  const int l = s.level;
  if (rules.kind == RuleKind::mahjong_transposed) {
    const bool front = b.cell_occupied(l, s.row - 1, s.col) || b.cell_occupied(l, s.row - 1, s.col + 1);
    const bool rear = b.cell_occupied(l, s.row + 2, s.col) || b.cell_occupied(l, s.row + 2, s.col + 1);
    return !front || !rear;
  }
  const bool left = b.cell_occupied(l, s.row, s.col - 1) || b.cell_occupied(l, s.row + 1, s.col - 1);
  const bool right = b.cell_occupied(l, s.row, s.col + 2) || b.cell_occupied(l, s.row + 1, s.col + 2);
  return !left || !right;
}

// ---------------------------------------------------------------------------
// Pair predicates

// Rule-level test for slots x != y of one group; both must be present.
inline bool pair_playable(const Board& b, int x, int y, const Rules& rules) noexcept {
  if (x == y || !b.occupied(x) || !b.occupied(y) || b.group_of(x) != b.group_of(y)) return false;
  if (rules.kind == RuleKind::shisen) return shisen_connects(b, x, y, rules);
  return mahjong_free(b, x, rules) && mahjong_free(b, y, rules);
}

inline bool mahjong_pair_playable(const Board& b, int x, int y, const Rules& rules) noexcept {
  Rules r = rules;
  if (r.kind == RuleKind::shisen) r.kind = RuleKind::mahjong;
  return pair_playable(b, x, y, r);
}

// Present tile t paired with the position of group member u, which may
// already be removed (then it is an empty target box).
inline bool connects_to_position(const Board& b, int t, int u, const Rules& rules) noexcept {
  if (rules.kind == RuleKind::shisen) return shisen_connects(b, t, u, rules);
  return mahjong_free(b, t, rules) && (!b.occupied(u) || mahjong_free(b, u, rules));
}

namespace detail {

inline bool cell_in(const Slot& s, int row, int col) noexcept {
  return row >= s.row && row <= s.row + 1 && col >= s.col && col <= s.col + 1;
}

inline bool row_reaches(const Board& b, int i, int row, int col) noexcept {
  // col reachable along doubled row `row` from slot i on its level
  const Slot& s = b.slot(i);
  int lo = std::min(col, s.col), hi = std::max(col, s.col + 1);
  for (int c = lo; c <= hi; ++c)
    if (!cell_in(s, row, c) && b.cell_occupied(s.level, row, c)) return false;
  return true;
}

inline bool col_reaches(const Board& b, int i, int col, int row) noexcept {
  const Slot& s = b.slot(i);
  int lo = std::min(row, s.row), hi = std::max(row, s.row + 1);
  for (int r = lo; r <= hi; ++r)
    if (!cell_in(s, r, col) && b.cell_occupied(s.level, r, col)) return false;
  return true;
}

inline bool cells_free(const Board& b, int level, Cell from, Cell to, const Slot& ex1, const Slot& ex2,
                       bool ex1_here, bool ex2_here) noexcept {
  const int dr = (to.row > from.row) - (to.row < from.row);
  const int dc = (to.col > from.col) - (to.col < from.col);
  for (Cell c = from;; c.row += dr, c.col += dc) {
    const bool own = (ex1_here && cell_in(ex1, c.row, c.col)) || (ex2_here && cell_in(ex2, c.row, c.col));
    if (!own && b.cell_occupied(level, c.row, c.col)) return false;
    if (c.row == to.row && c.col == to.col) return true;
  }
}

// Nearest footprint column (row) of slot s to `target`.
inline int nearest(int lo, int target) noexcept { return target < lo ? lo : (target > lo + 1 ? lo + 1 : target); }

}  // namespace detail

// Shisen-Sho witness path between x and y (positions may be removed).
inline std::optional<Connection> shisen_connection(const Board& b, int x, int y, const Rules& rules = {}) {
  using detail::Shape;
  const auto probe = detail::probe_shisen(b, x, y, rules);
  if (probe.shape == Shape::none) return std::nullopt;
  const Slot& sx = b.slot(x);
  const Slot& sy = b.slot(y);
  const int L = probe.level;
  const int m = probe.line;
  const bool hvh = probe.shape == Shape::hvh;
  const bool lower_x = probe.lower == x, lower_y = probe.lower == y;

  // An end tile reaches the middle line along one of its two rows (hvh) or
  // columns (vhv). The lower tile of a two-level pair starts from its
  // footprint on level L, which is empty.
  auto reaches = [&](int i, bool lower, int lane) {
    if (lower) return true;
    return hvh ? detail::row_reaches(b, i, lane, m) : detail::col_reaches(b, i, lane, m);
  };
  auto cell_at = [&](int lane, int pos) { return hvh ? Cell{lane, pos, L} : Cell{pos, lane, L}; };
  const int x_base = hvh ? sx.row : sx.col;
  const int y_base = hvh ? sy.row : sy.col;
  const int x_lo = hvh ? sx.col : sx.row;
  const int y_lo = hvh ? sy.col : sy.row;

  for (int lx = x_base; lx <= x_base + 1; ++lx) {
    if (!reaches(x, lower_x, lx)) continue;
    for (int ly = y_base; ly <= y_base + 1; ++ly) {
      if (!reaches(y, lower_y, ly)) continue;
      // middle line along `m` from lane lx to lane ly
      Cell mid_from = cell_at(lx, m), mid_to = cell_at(ly, m);
      if (!detail::cells_free(b, L, mid_from, mid_to, sx, sy, sx.level == L, sy.level == L)) continue;
      Connection conn;
      Cell start = cell_at(lx, detail::nearest(x_lo, m));
      Cell end = cell_at(ly, detail::nearest(y_lo, m));
      if (lower_x) conn.segments.push_back({SegmentKind::pillar, {start.row, start.col, sx.level}, start});
      const SegmentKind along = hvh ? SegmentKind::horizontal : SegmentKind::vertical;
      const SegmentKind across = hvh ? SegmentKind::vertical : SegmentKind::horizontal;
      if (!(start == mid_from)) conn.segments.push_back({along, start, mid_from});
      if (!(mid_from == mid_to)) conn.segments.push_back({across, mid_from, mid_to});
      if (!(mid_to == end)) conn.segments.push_back({along, mid_to, end});
      if (lower_y) conn.segments.push_back({SegmentKind::pillar, end, {end.row, end.col, sy.level}});
      if (conn.segments.empty()) conn.segments.push_back({along, start, end});
      return conn;
    }
  }
  return std::nullopt;  // unreachable when the probe is sound
}

inline std::optional<Connection> shisen_pair_playable(const Board& b, int x, int y, const Rules& rules = {}) {
  if (x == y || !b.occupied(x) || !b.occupied(y) || b.group_of(x) != b.group_of(y)) return std::nullopt;
  return shisen_connection(b, x, y, rules);
}

// Checks that `conn` is a legal Shisen-Sho path from x to y on the current
// board: 1..3 segments, at most one pillar segment, contiguous, axis-aligned,
// starting in x, ending in y, and crossing only empty cells (or x and y).
inline bool validate_connection(const Board& b, int x, int y, const Connection& conn) {
  const auto& segs = conn.segments;
  if (segs.empty() || segs.size() > 3) return false;
  int pillars = 0;
  const Slot& sx = b.slot(x);
  const Slot& sy = b.slot(y);
  auto in = [](const Slot& s, const Cell& c) { return c.level == s.level && detail::cell_in(s, c.row, c.col); };
  if (!in(sx, segs.front().from) || !in(sy, segs.back().to)) return false;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto& g = segs[k];
    if (k > 0 && !(segs[k - 1].to == g.from)) return false;
    if (g.kind == SegmentKind::pillar) {
      ++pillars;
      if (g.from.row != g.to.row || g.from.col != g.to.col) return false;
      const int lo = std::min(g.from.level, g.to.level), hi = std::max(g.from.level, g.to.level);
      for (int l = lo; l <= hi; ++l) {
        const Cell c{g.from.row, g.from.col, l};
        if (!in(sx, c) && !in(sy, c) && b.cell_occupied(l, c.row, c.col)) return false;
      }
      continue;
    }
    if (g.from.level != g.to.level) return false;
    if (g.kind == SegmentKind::horizontal && g.from.row != g.to.row) return false;
    if (g.kind == SegmentKind::vertical && g.from.col != g.to.col) return false;
    const int l = g.from.level;
    if (!detail::cells_free(b, l, g.from, g.to, sx, sy, sx.level == l, sy.level == l)) return false;
  }
  return pillars <= 1;
}

// ---------------------------------------------------------------------------
// Move enumeration

// Every playable same-group pair, ordered by group id then slot indices.
inline std::vector<Move> enumerate_playable_pairs(const Board& b, const Rules& rules) {
  std::vector<Move> moves;
  int present[4];
  for (int g = 0; g < b.num_groups(); ++g) {
    if (b.remaining(g) < 2) continue;
    int n = 0;
    for (int m : b.group(g).members) {
      if (!b.occupied(m)) continue;
      const bool candidate = rules.kind == RuleKind::shisen ? pillar_clear(b, m) : mahjong_free(b, m, rules);
      if (candidate) present[n++] = m;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rules.kind != RuleKind::shisen || shisen_connects(b, present[i], present[j], rules))
          moves.push_back(Move::pair_of(present[i], present[j]));
  }
  return moves;
}

}  // namespace tilematch
