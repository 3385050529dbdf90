#pragma once

// Random boards shared by the unit tests and the acceptance run.

#include <memory>
#include <random>

#include <tilematch/rules.hpp>

#include "oracle/naive.hpp"

namespace support {

using namespace tilematch;

inline LayoutPtr share(Layout l) { return std::make_shared<const Layout>(std::move(l)); }

// Removes each tile with probability `q` as a lone move.
inline void thin_out(Board& b, std::mt19937_64& rng, double q) {
  std::bernoulli_distribution drop(q);
  for (int i = 0; i < int(b.size()); ++i)
    if (drop(rng)) b.play(Move::lone(i));
}

// Rectangle of up to max_side x max_side tiles, dealt and partly cleared.
inline Board random_rect_board(std::mt19937_64& rng, int max_side) {
  int w, h;
  do {
    w = int(rng() % unsigned(max_side)) + 1;
    h = int(rng() % unsigned(max_side)) + 1;
  } while (w * h < 2);
  Board b = deal(share(make_rectangle(w, h)), rng());
  thin_out(b, rng, std::uniform_real_distribution<double>(0, 0.8)(rng));
  return b;
}

// Two levels of tiles at arbitrary (half-offset) doubled coordinates inside
// a square of `span` cells, trimmed to a valid slot count.
inline Layout random_grid_layout(std::mt19937_64& rng, int span, int levels = 2) {
  Layout l{"random", {}, GridKind::mahjong};
  for (int level = 0; level < levels; ++level) {
    const int tries = int(rng() % unsigned(span * span / 2)) + 4;
    for (int t = 0; t < tries; ++t) {
      Slot s{2 + int(rng() % unsigned(span - 1)), 2 + int(rng() % unsigned(span - 1)), level};
      bool clash = false;
      for (const auto& o : l.slots) clash |= boxes_overlap(o, s);
      if (!clash) l.slots.push_back(s);
    }
  }
  while (l.size() % 4 != 0 && l.size() % 4 != 2) l.slots.pop_back();
  if (l.size() < 2) return random_grid_layout(rng, span, levels);
  return l;
}

inline Board random_grid_board(std::mt19937_64& rng, int span, int levels = 2) {
  Board b = deal(share(random_grid_layout(rng, span, levels)), rng());
  thin_out(b, rng, std::uniform_real_distribution<double>(0, 0.6)(rng));
  return b;
}

inline oracle::Position position_of(const Board& b) {
  oracle::Position p(b.layout(), b.faces());
  for (int i = 0; i < int(b.size()); ++i) p.present[std::size_t(i)] = b.occupied(i);
  return p;
}

inline oracle::Game game_of(RuleKind k) {
  switch (k) {
    case RuleKind::shisen: return oracle::Game::shisen;
    case RuleKind::mahjong: return oracle::Game::mahjong;
    case RuleKind::mahjong_transposed: return oracle::Game::mahjong_t;
  }
  return oracle::Game::shisen;
}

inline oracle::GameOptions game_options(const Rules& r) {
  return {game_of(r.kind), r.free_variant == FreeVariant::pillar_above, r.border_paths};
}

// Equal-face present pairs where the library and the oracle disagree; a
// library yes must also come with a valid witness (Shisen-Sho).
inline int pair_mismatches(const Board& b, const Rules& rules, std::string* first = nullptr) {
  const auto pos = position_of(b);
  std::optional<oracle::ShisenOracle> so;
  if (rules.kind == RuleKind::shisen) so.emplace(pos, oracle::ShisenOptions{rules.border_paths});
  const auto g = game_options(rules);
  int bad = 0;
  for (int x = 0; x < int(b.size()); ++x)
    for (int y = x + 1; y < int(b.size()); ++y) {
      if (!b.occupied(x) || !b.occupied(y) || b.face(x) != b.face(y)) continue;
      const bool want = so ? so->connects(x, y) : oracle::pair_playable(pos, x, y, g);
      bool got;
      if (rules.kind == RuleKind::shisen) {
        auto conn = shisen_pair_playable(b, x, y, rules);
        got = conn.has_value();
        if (got && !validate_connection(b, x, y, *conn)) ++bad;
      } else {
        got = pair_playable(b, x, y, rules);
      }
      if (got != want) {
        if (first && first->empty())
          *first = "slots " + std::to_string(x) + "," + std::to_string(y) + " lib=" + std::to_string(got) +
                   " oracle=" + std::to_string(want);
        ++bad;
      }
    }
  return bad;
}

}  // namespace support
