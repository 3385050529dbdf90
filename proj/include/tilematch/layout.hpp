#pragma once

// Layout geometry on the doubled grid, built-in layouts, group assignment and
// seeded dealing.
//
// Coordinates are in half-tile units: a tile at (row, col, level) covers the
// doubled cells {row, row+1} x {col, col+1} on its level.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace tilematch {

inline constexpr int kMaxLevels = 16;

struct Slot {
  int row = 0;
  int col = 0;
  int level = 0;

  friend constexpr auto operator<=>(const Slot&, const Slot&) = default;
};

constexpr bool boxes_overlap(const Slot& a, const Slot& b) noexcept {
  return a.level == b.level && a.row - b.row < 2 && b.row - a.row < 2 &&
         a.col - b.col < 2 && b.col - a.col < 2;
}

enum class GridKind { shisen, mahjong };

class LayoutError : public std::runtime_error {
 public:
  LayoutError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct Layout {
  std::string name;
  std::vector<Slot> slots;
  GridKind grid_kind = GridKind::mahjong;

  std::size_t size() const noexcept { return slots.size(); }

  int num_levels() const noexcept {
    int levels = 0;
    for (const auto& s : slots) levels = std::max(levels, s.level + 1);
    return levels;
  }

  std::vector<Slot> sorted_slots() const {
    auto v = slots;
    std::sort(v.begin(), v.end());
    return v;
  }

  // Slot-set equality; order and name are ignored.
  bool same_slots(const Layout& other) const { return sorted_slots() == other.sorted_slots(); }
};

using LayoutPtr = std::shared_ptr<const Layout>;

namespace detail {

inline bool slot_count_ok(std::size_t n) { return n % 4 == 0 || n % 4 == 2; }

// Overlap check via a per-level occupancy grid of the doubled cells.
inline void check_no_overlap(const std::vector<Slot>& slots, const std::vector<int>& lines = {}) {
  std::vector<int> owner(std::size_t(kMaxLevels) * 64 * 64, -1);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    for (int dr = 0; dr < 2; ++dr)
      for (int dc = 0; dc < 2; ++dc) {
        auto& cell = owner[(std::size_t(s.level) * 64 + std::size_t(s.row + dr)) * 64 + std::size_t(s.col + dc)];
        if (cell >= 0) {
          int line = lines.empty() ? 0 : lines[i];
          throw LayoutError(line, "slot (" + std::to_string(s.row) + " " + std::to_string(s.col) + " " +
                                      std::to_string(s.level) + ") overlaps slot #" + std::to_string(cell));
        }
        cell = int(i);
      }
  }
}

}  // namespace detail

// Checks the overlap, coordinate-range, slot-count and (optionally) margin
// invariants. Throws LayoutError.
inline void validate(const Layout& layout, bool require_margin = true) {
  const int lo = require_margin ? 1 : 0;
  const int hi = require_margin ? 61 : 62;
  for (const auto& s : layout.slots) {
    if (s.row < lo || s.row > hi || s.col < lo || s.col > hi || s.level < 0 || s.level >= kMaxLevels)
      throw LayoutError(0, "slot (" + std::to_string(s.row) + " " + std::to_string(s.col) + " " +
                               std::to_string(s.level) + ") out of range");
    if (layout.grid_kind == GridKind::shisen && ((s.row | s.col) & 1))
      throw LayoutError(0, "shisen grid layouts use even coordinates only");
  }
  if (!detail::slot_count_ok(layout.size()))
    throw LayoutError(0, "slot count " + std::to_string(layout.size()) + " is not 0 or 2 mod 4");
  detail::check_no_overlap(layout.slots);
}

inline Layout transpose(const Layout& layout) {
  Layout t{layout.name + "^T", {}, layout.grid_kind};
  t.slots.reserve(layout.size());
  for (const auto& s : layout.slots) t.slots.push_back({s.col, s.row, s.level});
  return t;
}

// Rectangle of width x height tiles on even doubled coordinates, named
// rect<rows>x<cols>. Axes of up
// to 30 tiles start at doubled offset 2, leaving an empty margin; 31 and 32
// tile axes start at 0 and have no margin on that axis.
inline Layout make_rectangle(int width, int height) {
  if (width < 1 || width > 32 || height < 1 || height > 32)
    throw std::invalid_argument("rectangle dimensions must be within 1..32");
  if (width * height < 2) throw std::invalid_argument("the 1x1 rectangle is a void layout");
  const int row0 = height <= 30 ? 2 : 0;
  const int col0 = width <= 30 ? 2 : 0;
  Layout layout{"rect" + std::to_string(height) + "x" + std::to_string(width), {}, GridKind::shisen};
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) layout.slots.push_back({row0 + 2 * r, col0 + 2 * c, 0});
  // odd tile count: drop the greatest row/col corner
  if ((width * height) % 2) layout.slots.pop_back();
  return layout;
}

namespace detail {

inline void add_block(Layout& layout, int row0, int col0, int rows, int cols, int level) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) layout.slots.push_back({row0 + 2 * r, col0 + 2 * c, level});
}

}  // namespace detail

// Three concentric terraces of 9x10, 6x7 and 3x4 tiles (width x height).
inline Layout make_foo() {
  Layout layout{"foo", {}, GridKind::mahjong};
  detail::add_block(layout, 2, 2, 10, 9, 0);
  detail::add_block(layout, 5, 5, 7, 6, 1);
  detail::add_block(layout, 8, 8, 4, 3, 2);
  return layout;
}

inline Layout make_bar() {
  Layout layout = transpose(make_foo());
  layout.name = "bar";
  std::sort(layout.slots.begin(), layout.slots.end(),
            [](const Slot& a, const Slot& b) {
              return std::tie(a.level, a.row, a.col) < std::tie(b.level, b.row, b.col);
            });
  return layout;
}

// Layout text format: one slot per line as "row col level" in doubled
// half-tile units; '#' starts a comment; blank lines are ignored. The slots
// are translated by an even offset so the smallest row and column land on
// 1 or 2, which keeps parity and guarantees the empty margin.
inline Layout parse_layout(std::istream& in, std::string name = "file") {
  Layout layout{std::move(name), {}, GridKind::mahjong};
  std::vector<int> lines;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream ls(text);
    Slot s;
    if (!(ls >> s.row)) {
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw LayoutError(line_no, "expected \"row col level\"");
    }
    if (!(ls >> s.col >> s.level)) throw LayoutError(line_no, "expected \"row col level\"");
    std::string rest;
    if (ls >> rest) throw LayoutError(line_no, "trailing text \"" + rest + "\"");
    if (s.row < 0 || s.row > 62 || s.col < 0 || s.col > 62 || s.level < 0 || s.level >= kMaxLevels)
      throw LayoutError(line_no, "coordinate out of range");
    layout.slots.push_back(s);
    lines.push_back(line_no);
  }
  if (!layout.slots.empty()) {
    int min_row = 64, min_col = 64;
    for (const auto& s : layout.slots) {
      min_row = std::min(min_row, s.row);
      min_col = std::min(min_col, s.col);
    }
    const int dr = (2 - (min_row & 1)) - min_row;
    const int dc = (2 - (min_col & 1)) - min_col;
    for (std::size_t i = 0; i < layout.slots.size(); ++i) {
      auto& s = layout.slots[i];
      s.row += dr;
      s.col += dc;
      if (s.row > 61 || s.col > 61) throw LayoutError(lines[i], "layout too large for the 64-cell grid with margin");
    }
  }
  detail::check_no_overlap(layout.slots, lines);
  if (!detail::slot_count_ok(layout.size()))
    throw LayoutError(line_no, "slot count " + std::to_string(layout.size()) + " is not 0 or 2 mod 4");
  return layout;
}

inline Layout load_layout(const std::string& text, std::string name = "file") {
  std::istringstream in(text);
  return parse_layout(in, std::move(name));
}

inline Layout load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout file " + path);
  auto slash = path.find_last_of('/');
  auto base = path.substr(slash == std::string::npos ? 0 : slash + 1);
  if (auto dot = base.rfind('.'); dot != std::string::npos) base.erase(dot);
  return parse_layout(in, base);
}

inline std::string format_layout(const Layout& layout) {
  std::ostringstream out;
  out << "# " << layout.name << ": " << layout.size() << " slots, row col level\n";
  for (const auto& s : layout.slots) out << s.row << ' ' << s.col << ' ' << s.level << '\n';
  return out.str();
}

// Order-independent fingerprint of the slot set (FNV-1a over sorted slots).
inline std::uint64_t fingerprint(const Layout& layout) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& s : layout.sorted_slots()) {
    for (int v : {s.row, s.col, s.level}) {
      h ^= std::uint64_t(std::uint32_t(v));
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Groups and dealing

struct TileGroup {
  int group_id = 0;
  int face_id = 0;
  std::vector<int> members;  // slot indices (or deal positions), 4 or 2 of them
};

struct GroupAssignment {
  std::vector<TileGroup> groups;

  std::size_t num_tiles() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.members.size();
    return n;
  }
};

// floor(n/4) groups of 4 followed by one group of 2 when n = 2 mod 4; faces
// are assigned to groups in index order.
inline GroupAssignment make_groups(std::size_t n) {
  if (!detail::slot_count_ok(n)) throw std::invalid_argument("tile count must be 0 or 2 mod 4");
  GroupAssignment ga;
  for (std::size_t i = 0; i < n; i += 4) {
    TileGroup g{int(ga.groups.size()), int(ga.groups.size()), {}};
    for (std::size_t j = i; j < std::min(n, i + 4); ++j) g.members.push_back(int(j));
    ga.groups.push_back(std::move(g));
  }
  return ga;
}

inline GroupAssignment make_groups(const Layout& layout) { return make_groups(layout.size()); }

// Groups from a per-slot face vector, numbered by ascending face id. Every
// face must occur 4 times except for at most one face occurring twice.
inline GroupAssignment groups_from_faces(const std::vector<int>& faces) {
  std::map<int, std::vector<int>> by_face;
  for (std::size_t i = 0; i < faces.size(); ++i) by_face[faces[i]].push_back(int(i));
  GroupAssignment ga;
  int pairs = 0;
  for (auto& [face, members] : by_face) {
    if (members.size() == 2) ++pairs;
    else if (members.size() != 4)
      throw std::invalid_argument("face " + std::to_string(face) + " occurs " +
                                  std::to_string(members.size()) + " times");
    ga.groups.push_back({int(ga.groups.size()), face, std::move(members)});
  }
  if (pairs > 1) throw std::invalid_argument("more than one group of 2");
  return ga;
}

// splitmix64: state += 0x9e3779b97f4a7c15, then the standard output mix.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by 128-bit multiply-high.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    return std::uint64_t((unsigned __int128)(*this)() * bound >> 64);
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

 private:
  std::uint64_t state_;
};

struct Deal {
  std::uint64_t seed = 0;
  std::vector<int> permutation;  // slot i receives the tile of group member permutation[i]
  std::vector<int> faces;        // resulting face per slot
};

// Fisher-Yates over member positions, from the last index down, drawing
// j = below(i + 1) from SplitMix64(seed).
inline Deal make_deal(const GroupAssignment& ga, std::uint64_t seed) {
  const std::size_t n = ga.num_tiles();
  std::vector<int> member_face(n, -1);
  for (const auto& g : ga.groups)
    for (int m : g.members) member_face.at(std::size_t(m)) = g.face_id;
  Deal deal{seed, std::vector<int>(n), std::vector<int>(n)};
  std::iota(deal.permutation.begin(), deal.permutation.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = n; i-- > 1;) std::swap(deal.permutation[i], deal.permutation[rng.below(i + 1)]);
  for (std::size_t i = 0; i < n; ++i) deal.faces[i] = member_face[std::size_t(deal.permutation[i])];
  return deal;
}

}  // namespace tilematch
