#pragma once

// Reductions from Mahjong Solitaire with peeking on isolated stacks to
// Shisen-Sho, and a brute-force solver for the stack game.
//
// Stacks list faces bottom to top. In a reduced board the top of every stack
// sits at the top edge of the board, where it can reach the margin.

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "board.hpp"

namespace tilematch {

struct StackInstance {
  std::vector<std::vector<int>> stacks;  // bottom to top

  std::size_t num_tiles() const {
    std::size_t n = 0;
    for (const auto& s : stacks) n += s.size();
    return n;
  }

  std::size_t height() const {
    std::size_t h = 0;
    for (const auto& s : stacks) h = std::max(h, s.size());
    return h;
  }

  int max_face() const {
    int m = -1;
    for (const auto& s : stacks)
      for (int f : s) m = std::max(m, f);
    return m;
  }

  // Every face occurs exactly 4 times.
  void validate() const {
    std::map<int, int> count;
    for (const auto& s : stacks)
      for (int f : s) {
        if (f < 0) throw std::invalid_argument("negative face id");
        ++count[f];
      }
    for (auto [f, c] : count)
      if (c != 4) throw std::invalid_argument("face " + std::to_string(f) + " occurs " + std::to_string(c) + " times");
  }
};

// Shapes named top first: aab has two equal tiles on top of a different one.
enum class StackShape { aab, abb };

inline std::optional<StackShape> shape_of(const std::vector<int>& s) {
  if (s.size() != 3) return std::nullopt;
  if (s[2] == s[1] && s[1] != s[0]) return StackShape::aab;
  if (s[1] == s[0] && s[2] != s[1]) return StackShape::abb;
  return std::nullopt;
}

inline bool is_restricted(const StackInstance& inst) {
  return std::all_of(inst.stacks.begin(), inst.stacks.end(), [](const auto& s) { return shape_of(s).has_value(); });
}

// Stack file: one stack per line, bottom to top, whitespace separated face
// names; '#' starts a comment. Names get ids in order of first appearance.
inline StackInstance parse_instance(std::istream& in, std::vector<std::string>* names = nullptr) {
  StackInstance inst;
  std::map<std::string, int> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<int> stack;
    for (std::string tok; ls >> tok;) {
      auto [it, fresh] = ids.emplace(tok, int(ids.size()));
      if (fresh && names) names->push_back(tok);
      stack.push_back(it->second);
    }
    if (!stack.empty()) inst.stacks.push_back(std::move(stack));
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Stack game

// Exhaustive search over removals of two equal faces from the tops of two
// stacks. At most 24 tiles.
inline bool peeking_mahjong_solve(const StackInstance& inst) {
  if (inst.num_tiles() > 24) throw std::invalid_argument("peeking solver is capped at 24 tiles");
  const auto& st = inst.stacks;
  std::vector<int> h;
  for (const auto& s : st) h.push_back(int(s.size()));
  std::unordered_set<std::uint64_t> dead;
  auto key = [&] {
    std::uint64_t k = 0;
    for (int x : h) k = k * 25 + std::uint64_t(x);
    return k;
  };
  auto search = [&](auto&& self, int left) -> bool {
    if (left == 0) return true;
    const auto k = key();
    if (dead.count(k)) return false;
    for (std::size_t i = 0; i < st.size(); ++i) {
      if (h[i] == 0) continue;
      for (std::size_t j = i + 1; j < st.size(); ++j) {
        if (h[j] == 0 || st[i][std::size_t(h[i] - 1)] != st[j][std::size_t(h[j] - 1)]) continue;
        --h[i];
        --h[j];
        const bool ok = self(self, left - 2);
        ++h[i];
        ++h[j];
        if (ok) return true;
      }
    }
    dead.insert(k);
    return false;
  };
  return search(search, int(inst.num_tiles()));
}

// ---------------------------------------------------------------------------
// Reduced boards

// A rectangular Shisen-Sho board with fixed faces and a label per tile.
struct Reduction {
  int width = 0;   // tiles
  int height = 0;  // tiles
  Layout layout{"reduced", {}, GridKind::shisen};
  std::vector<int> faces;           // per slot, row-major
  std::vector<std::string> labels;  // per slot
  std::vector<std::vector<int>> filler;  // filler groups in literal order

  int slot_at(int row, int col) const { return row * width + col; }

  std::vector<std::string> label_rows() const {
    std::vector<std::string> rows;
    for (int r = 0; r < height; ++r) {
      std::string line;
      for (int c = 0; c < width; ++c) line += (c ? " " : "") + labels[std::size_t(slot_at(r, c))];
      rows.push_back(line);
    }
    return rows;
  }

  // Rows joined by " / ".
  std::string figure() const {
    std::string out;
    for (const auto& row : label_rows()) out += (out.empty() ? "" : " / ") + row;
    return out;
  }

  Board board() const { return Board(std::make_shared<const Layout>(layout), faces); }
};

namespace detail {

inline std::string face_label(int f) {
  if (f < 23) return std::string(1, char('a' + f));  // x, y, z stay free for gadget groups
  return "f" + std::to_string(f);
}

class ReductionBuilder {
 public:
  ReductionBuilder(int width, int height, int first_fresh) : next_(first_fresh) {
    if (width > 30 || height > 30)
      throw std::length_error("reduced board of " + std::to_string(width) + "x" + std::to_string(height) +
                              " tiles exceeds the 30x30 capacity");
    r_.width = width;
    r_.height = height;
    r_.faces.assign(std::size_t(width * height), -1);
    r_.labels.assign(r_.faces.size(), "");
  }

  int fresh() { return next_++; }

  void put(int row, int col, int face, std::string label) {
    auto& f = r_.faces.at(std::size_t(r_.slot_at(row, col)));
    if (f != -1) throw std::logic_error("gadget cell written twice");
    f = face;
    r_.labels[std::size_t(r_.slot_at(row, col))] = std::move(label);
  }

  bool filled(int row, int col) const { return r_.faces[std::size_t(r_.slot_at(row, col))] != -1; }

  // Places a 5x5 pattern whose letters name gadget groups; 'a'/'b' take the
  // given instance faces and every other name maps through `groups`.
  void pattern(int row0, int col0, const char* const rows[5][5], const std::map<std::string, int>& groups,
               int a, int b) {
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        const std::string name = rows[r][c];
        if (name == "a") put(row0 + r, col0 + c, a, face_label(a));
        else if (name == "b") put(row0 + r, col0 + c, b, face_label(b));
        else put(row0 + r, col0 + c, groups.at(name), name);
      }
  }

  // Fills every empty cell with fresh groups of 4 in row-major order; a
  // trailing group of 2 is allowed.
  void fill() {
    std::vector<int> cells;
    for (int r = 0; r < r_.height; ++r)
      for (int c = 0; c < r_.width; ++c)
        if (!filled(r, c)) cells.push_back(r_.slot_at(r, c));
    if (cells.size() % 4 != 0 && cells.size() % 4 != 2) throw std::logic_error("filler count is odd");
    for (std::size_t i = 0; i < cells.size(); i += 4) {
      const int face = fresh();
      std::vector<int> group;
      for (std::size_t j = i; j < std::min(cells.size(), i + 4); ++j) {
        r_.faces[std::size_t(cells[j])] = face;
        r_.labels[std::size_t(cells[j])] = "#";
        group.push_back(cells[j]);
      }
      r_.filler.push_back(std::move(group));
    }
  }

  Reduction finish() {
    r_.layout = make_rectangle_or_empty(r_.width, r_.height);
    return std::move(r_);
  }

 private:
  static Layout make_rectangle_or_empty(int w, int h) {
    Layout l{"reduced", {}, GridKind::shisen};
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) l.slots.push_back({2 + 2 * r, 2 + 2 * c, 0});
    return l;
  }

  Reduction r_;
  int next_;
};

// clang-format off
inline constexpr const char* kSupertile[5][5] = {
    {"z", "z", "z", "z'", "z'"},
    {"x", "x'", "z'", "y'", "y"},
    {"x'", "x", "a", "y", "y'"},
    {"y'", "y", "z", "x", "x'"},
    {"y", "y'", "z'", "x'", "x"},
};

inline constexpr const char* kBlockAab[5][5] = {
    {"z", "z'", "a", "z'", "z"},
    {"x", "x'", "z", "y'", "y"},
    {"x'", "x", "a", "y", "y'"},
    {"y'", "y", "b", "x", "x'"},
    {"y", "y'", "z", "x'", "x"},
};

inline constexpr const char* kBlockAbb[5][5] = {
    {"z", "z'", "a", "z'", "z"},
    {"x", "x'", "b", "y'", "y"},
    {"x'", "x", "z", "y", "y'"},
    {"y'", "y", "b", "x", "x'"},
    {"y", "y'", "z", "x'", "x"},
};
// clang-format on

}  // namespace detail

// Every stack becomes a column of 5x5 supertiles with its top element in the
// topmost supertile. Shorter columns and 0 to 3 extra rows at the bottom are
// filled with fresh groups in literal order.
inline Reduction reduce_general(const StackInstance& inst) {
  const int stacks = int(inst.stacks.size());
  const int tall = int(inst.height());
  if (inst.num_tiles() == 0) return detail::ReductionBuilder(0, 0, 0).finish();
  const int width = 5 * stacks;
  int extra = 0;
  const int base_filler = width * 5 * tall - 25 * int(inst.num_tiles());
  auto filler_ok = [&](int k, int mod) { return (base_filler + width * k) % 4 == mod; };
  while (extra < 4 && !filler_ok(extra, 0)) ++extra;
  if (extra == 4) {
    extra = 0;
    while (!filler_ok(extra, 2)) ++extra;
  }
  detail::ReductionBuilder b(width, 5 * tall + extra, inst.max_face() + 1);
  for (int s = 0; s < stacks; ++s) {
    const auto& stack = inst.stacks[std::size_t(s)];
    const int h = int(stack.size());
    for (int k = 0; k < h; ++k) {
      // k = 0 is the top element
      const int face = stack[std::size_t(h - 1 - k)];
      std::map<std::string, int> groups;
      for (const char* g : {"x", "x'", "y", "y'", "z", "z'"}) groups[g] = b.fresh();
      b.pattern(5 * k, 5 * s, detail::kSupertile, groups, face, -1);
    }
  }
  b.fill();
  return b.finish();
}

// One 5x5 tileblock per aab/abb stack, side by side in 5 rows. The z' tiles
// of blocks 2i and 2i+1 form one group; an odd last block keeps a group of 2.
inline Reduction reduce_5rows(const StackInstance& inst) {
  const int stacks = int(inst.stacks.size());
  detail::ReductionBuilder b(5 * stacks, stacks ? 5 : 0, inst.max_face() + 1);
  int shared = -1;
  for (int s = 0; s < stacks; ++s) {
    const auto& stack = inst.stacks[std::size_t(s)];
    const auto shape = shape_of(stack);
    if (!shape) throw std::invalid_argument("stack " + std::to_string(s) + " is not of the form aab or abb");
    if (s % 2 == 0) shared = b.fresh();
    std::map<std::string, int> groups{{"z'", shared}};
    for (const char* g : {"x", "x'", "y", "y'", "z"}) groups[g] = b.fresh();
    const int a = stack[2];
    const int other = *shape == StackShape::aab ? stack[0] : stack[1];
    b.pattern(0, 5 * s, *shape == StackShape::aab ? detail::kBlockAab : detail::kBlockAbb, groups, a, other);
  }
  return b.finish();
}

}  // namespace tilematch
